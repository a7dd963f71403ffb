import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from collabdyn.errors import ModelError
from collabdyn.saom import (
    CovariateSet,
    EffectSpec,
    ModelSpec,
    choice_alternatives,
    choice_probabilities,
    effect_statistic,
    hamming_distance,
    objective,
    simulate_period,
    softmax,
    total_statistic,
)


def _random_state(n, p, rng):
    return oracles.random_symmetric_graph(n, p, rng).astype(float)


def _model(n, effects, rates=(1.0,), monadic=None, dyadic=None):
    cov = CovariateSet(monadic=monadic or {}, dyadic=dyadic or {})
    return ModelSpec(n_actors=n, effects=tuple(effects), rates=tuple(rates), covariates=cov)


class TestEffectStatistics:
    def test_density_is_degree(self):
        x = _random_state(6, 0.5, np.random.default_rng(0))
        model = _model(6, [EffectSpec("density", parameter=1.0)])
        for i in range(6):
            assert effect_statistic(model.effects[0], i, x, model.covariates) == x[i].sum()

    def test_triangle_statistic_identity(self):
        x = np.zeros((3, 3))
        x[0, 1] = x[1, 0] = x[1, 2] = x[2, 1] = x[0, 2] = x[2, 0] = 1.0
        eff = EffectSpec("transitive_triads")
        cov = CovariateSet()
        for i in range(3):
            assert effect_statistic(eff, i, x, cov) == 1.0
        assert total_statistic(eff, x, cov) == 3.0  # 3 x one triangle

    def test_summed_triads_equal_three_times_triangles(self):
        rng = np.random.default_rng(1)
        eff = EffectSpec("transitive_triads")
        cov = CovariateSet()
        for _ in range(25):
            n = int(rng.integers(3, 13))
            x = _random_state(n, 0.4, rng)
            total = sum(effect_statistic(eff, i, x, cov) for i in range(n))
            assert total == 3 * oracles.triangle_count(x.astype(np.int8))
            assert total_statistic(eff, x, cov) == total

    def test_dyadic_with_unit_matrix_reduces_to_density(self):
        rng = np.random.default_rng(2)
        n = 7
        x = _random_state(n, 0.4, rng)
        ones = np.ones((1, n, n))
        eff = EffectSpec("dyadic_covariate", name="w")
        cov = CovariateSet(dyadic={"w": ones})
        for i in range(n):
            assert effect_statistic(eff, i, x, cov) == x[i].sum()

    def test_covariate_activity(self):
        n = 5
        v = np.arange(n, dtype=float).reshape(1, n)
        x = _random_state(n, 0.6, np.random.default_rng(3))
        eff = EffectSpec("covariate_activity", name="v")
        cov = CovariateSet(monadic={"v": v})
        for i in range(n):
            assert effect_statistic(eff, i, x, cov) == v[0, i] * x[i].sum()

    def test_unknown_covariate_name(self):
        with pytest.raises(ModelError, match="unknown actor covariate"):
            _model(4, [EffectSpec("covariate_activity", name="missing")])


class TestObjective:
    def test_zero_parameters(self):
        x = _random_state(5, 0.5, np.random.default_rng(4))
        model = _model(5, [EffectSpec("density", parameter=0.0)])
        assert objective(0, x, model) == 0.0

    def test_single_density_equals_degree(self):
        x = _random_state(5, 0.5, np.random.default_rng(5))
        model = _model(5, [EffectSpec("density", parameter=1.0)])
        for i in range(5):
            assert objective(i, x, model) == x[i].sum()

    def test_three_effect_fixture_matches_oracle(self):
        rng = np.random.default_rng(6)
        n = 5
        x = _random_state(n, 0.5, rng)
        w = rng.normal(size=(n, n))
        w = (w + w.T) / 2
        np.fill_diagonal(w, 0.0)
        v = rng.normal(size=n)
        model = _model(
            n,
            [
                EffectSpec("density", parameter=-1.5),
                EffectSpec("transitive_triads", parameter=0.7),
                EffectSpec("dyadic_covariate", name="w", parameter=2.0),
            ],
            monadic={"v": v.reshape(1, n)},
            dyadic={"w": w.reshape(1, n, n)},
        )
        for i in range(n):
            expected = (
                -1.5 * oracles.actor_statistic("density", i, x)
                + 0.7 * oracles.actor_statistic("transitive_triads", i, x)
                + 2.0 * oracles.actor_statistic("dyadic_covariate", i, x, w)
            )
            assert objective(i, x, model) == pytest.approx(expected, abs=1e-12)


class TestChoiceProbabilities:
    def test_uniform_at_zero_parameters(self):
        n = 6
        x = _random_state(n, 0.5, np.random.default_rng(7))
        model = _model(n, [EffectSpec("density", parameter=0.0)])
        probs = choice_probabilities(0, x, model)
        assert np.all(probs == 1.0 / n)

    def test_sums_to_one(self):
        rng = np.random.default_rng(8)
        model_effects = [
            EffectSpec("density", parameter=-2.0),
            EffectSpec("transitive_triads", parameter=0.5),
        ]
        for _ in range(100):
            n = int(rng.integers(3, 10))
            x = _random_state(n, 0.4, rng)
            model = _model(n, model_effects)
            probs = choice_probabilities(int(rng.integers(n)), x, model)
            assert abs(probs.sum() - 1.0) <= 1e-12
            assert np.all(probs >= 0.0)

    def test_matches_bruteforce_full_objective_softmax(self):
        rng = np.random.default_rng(9)
        n = 6
        w = rng.normal(size=(n, n))
        w = (w + w.T) / 2
        np.fill_diagonal(w, 0.0)
        model = _model(
            n,
            [
                EffectSpec("density", parameter=-1.0),
                EffectSpec("transitive_triads", parameter=0.8),
                EffectSpec("dyadic_covariate", name="w", parameter=1.3),
            ],
            dyadic={"w": w.reshape(1, n, n)},
        )
        for _ in range(30):
            x = _random_state(n, 0.5, rng)
            i = int(rng.integers(n))
            values = []
            for j in choice_alternatives(i, n):
                alt = x.copy()
                if j is not None:
                    alt[i, j] = alt[j, i] = 1.0 - alt[i, j]
                values.append(objective(i, alt, model))
            expected = oracles.softmax(values)
            got = choice_probabilities(i, x, model)
            assert np.allclose(got, expected, atol=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(10)
        # dyadic values on a 2^-10 grid: adding an integer constant is exact
        grid = rng.integers(-512, 512, size=(6, 6)) / 1024.0
        grid = (grid + grid.T) / 2
        np.fill_diagonal(grid, 0.0)
        values_base = grid[0]
        for c in (1.0, -3.0, 700.0, -700.0):
            assert np.array_equal(softmax(values_base + c), softmax(values_base))
        # and for arbitrary float shifts the drift stays within 1e-12
        noisy = rng.normal(size=8)
        assert np.allclose(softmax(noisy + 0.1234567), softmax(noisy), atol=1e-12)

    def test_blocking_density_keeps_status_quo(self):
        n = 4
        x = np.zeros((n, n))
        model = _model(n, [EffectSpec("density", parameter=-10.0)])
        probs = choice_probabilities(0, x, model)
        assert probs[-1] > 0.99  # no-change alternative dominates
        # hand computation: softmax over (-10, -10, -10, 0)
        expected = oracles.softmax([-10.0, -10.0, -10.0, 0.0])
        assert np.allclose(probs, expected, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(beta=st.floats(-5, 5), seed=st.integers(0, 999))
    def test_probability_contract_random_parameters(self, beta, seed):
        rng = np.random.default_rng(seed)
        n = 5
        x = _random_state(n, 0.5, rng)
        model = _model(n, [EffectSpec("density", parameter=beta)])
        probs = choice_probabilities(0, x, model)
        assert abs(probs.sum() - 1.0) <= 1e-12
        assert np.all(probs >= 0.0)


class TestSimulatePeriod:
    def _basic_model(self, n=8, rate=2.0, beta=-1.0):
        return _model(n, [EffectSpec("density", parameter=beta)], rates=(rate,))

    def test_vanishing_rate_leaves_network_unchanged(self):
        n = 8
        model = self._basic_model(n=n, rate=1e-9)
        rng = np.random.default_rng(11)
        x0 = oracles.random_symmetric_graph(n, 0.3, rng)
        for seed in range(100):
            x1 = simulate_period(x0, model, 0, seed=seed)
            assert np.array_equal(x1, x0)

    def test_negative_density_shrinks_edge_count(self):
        n = 8
        model = self._basic_model(n=n, rate=3.0, beta=-4.0)
        rng = np.random.default_rng(12)
        x0 = oracles.random_symmetric_graph(n, 0.5, rng)
        start_edges = int(x0.sum()) // 2
        totals = [
            int(simulate_period(x0, model, 0, seed=seed).sum()) // 2
            for seed in range(200)
        ]
        assert np.mean(totals) <= start_edges

    def test_hamming_bounded_by_ministeps(self):
        n = 8
        model = self._basic_model(n=n, rate=2.5, beta=-0.5)
        rng = np.random.default_rng(13)
        x0 = oracles.random_symmetric_graph(n, 0.4, rng)
        for seed in range(50):
            trace = []
            x1 = simulate_period(x0, model, 0, seed=seed, trace=trace)
            assert hamming_distance(x0, x1) <= len(trace)

    def test_bit_reproducible(self):
        model = self._basic_model()
        x0 = oracles.random_symmetric_graph(8, 0.4, np.random.default_rng(14))
        a = simulate_period(x0, model, 0, seed=37)
        b = simulate_period(x0, model, 0, seed=37)
        assert np.array_equal(a, b)

    def test_result_symmetric_binary(self):
        model = self._basic_model(rate=4.0, beta=0.3)
        x0 = oracles.random_symmetric_graph(8, 0.3, np.random.default_rng(15))
        for seed in range(20):
            x1 = simulate_period(x0, model, 0, seed=seed)
            assert np.array_equal(x1, x1.T)
            assert set(np.unique(x1)) <= {0, 1}
            assert np.all(np.diagonal(x1) == 0)

    def test_trace_times_increase_and_actors_valid(self):
        model = self._basic_model(rate=3.0)
        x0 = oracles.random_symmetric_graph(8, 0.4, np.random.default_rng(16))
        trace = []
        simulate_period(x0, model, 0, seed=5, trace=trace)
        times = [step.time for step in trace]
        assert times == sorted(times)
        assert all(0.0 < t < 1.0 for t in times)
        assert all(0 <= step.actor < 8 for step in trace)

    def test_rejects_asymmetric_input(self):
        model = self._basic_model(n=3)
        bad = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=float)
        with pytest.raises(ModelError, match="symmetric"):
            simulate_period(bad, model, 0, seed=1)

    def test_rejects_bad_period(self):
        model = self._basic_model()
        x0 = np.zeros((8, 8))
        with pytest.raises(ModelError, match="period"):
            simulate_period(x0, model, 1, seed=1)


class TestModelSpec:
    def test_parameter_round_trip(self):
        model = _model(
            4,
            [EffectSpec("density", parameter=-1.0), EffectSpec("transitive_triads")],
            rates=(2.0, 3.0),
        )
        theta = model.parameters()
        assert theta.tolist() == [2.0, 3.0, -1.0, 0.0]
        updated = model.with_parameters([1.0, 1.5, -2.0, 0.25])
        assert updated.rates == (1.0, 1.5)
        assert updated.effects[0].parameter == -2.0

    def test_requires_positive_rates(self):
        with pytest.raises(ModelError, match="positive"):
            _model(4, [EffectSpec("density")], rates=(0.0,))

    def test_requires_effects(self):
        with pytest.raises(ModelError, match="empty"):
            _model(4, [], rates=(1.0,))

    def test_rate_effect_labels(self):
        eff = EffectSpec("rate", period=0)
        assert eff.label == "Rate period 1"
        assert EffectSpec("density").label == "Degree (density effect)"
        assert (
            EffectSpec("covariate_activity", name="combinatorial_potential").label
            == "Combinatorial potential"
        )
