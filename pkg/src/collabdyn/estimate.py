"""Method-of-moments estimation via three-phase stochastic approximation.

Phase 1 estimates the derivative of expected statistics with respect to the
parameters by forward finite differences under common random numbers and
takes one Newton refinement step.  Phase 2 runs Robbins-Monro subphases with
halving gains and doubling lengths, averaging the final subphase's iterates.
Phase 3 simulates at the estimate to obtain convergence t-ratios (deviation
mean over deviation sd per statistic), the overall maximum convergence ratio,
and standard errors from the delta-method covariance
D^-1 cov(S) D^-T with the derivative re-estimated at the estimate.

Estimation is unconditional: every transition is simulated from its observed
start wave, rate parameters target the observed Hamming distances, and
evaluation effects are constrained equal across transitions.  The whole
procedure is a deterministic function of (waves, model, settings): per-run
seeds are derived from the master seed by phase and replicate counters, so
serial and parallel execution give identical results.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, EstimationError
from .saom import ModelSpec, as_adjacency, hamming_distance, simulate_period, total_statistic

# Normal critical values for two-sided p < 0.01 / 0.05 / 0.1.
STAR_THRESHOLDS = ((2.576, "***"), (1.960, "**"), (1.645, "*"))

_MAX_CONDITION = 1e8
_ABS_PARAM_LIMIT = 50.0
_RATE_FLOOR = 0.01

# spawn_key phase tags for the seed stream
_PH_DERIVATIVE, _PH_UPDATE, _PH_DIAGNOSE, _PH_SE = 1, 2, 3, 4


@dataclass(frozen=True)
class EstimationSettings:
    seed: int = 8
    n3: int = 3000  # phase-3 simulations
    n_sub: int = 5  # phase-2 subphases
    n1: int = 50  # phase-1 replicates
    initial_gain: float = 0.2
    max_convergence_ratio: float = 0.25
    workers: int = 1

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if min(self.n1, self.n3, self.n_sub) < 1:
            raise ConfigError("n1, n3, and n_sub must all be >= 1")
        if not 0.0 < self.initial_gain <= 1.0:
            raise ConfigError("initial gain must be in (0, 1]")
        if self.max_convergence_ratio <= 0:
            raise ConfigError("max convergence ratio must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass(frozen=True)
class EffectRow:
    label: str
    kind: str
    name: str
    estimate: float
    standard_error: float
    t_convergence: float
    stars: str
    is_rate: bool
    period: int | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "name": self.name,
            "estimate": self.estimate,
            "standard_error": self.standard_error,
            "t_convergence": self.t_convergence,
            "stars": self.stars,
            "is_rate": self.is_rate,
            "period": self.period,
        }


@dataclass(frozen=True)
class EstimationResult:
    rows: tuple[EffectRow, ...]  # rates first, then evaluation effects
    overall_max_convergence_ratio: float
    converged: bool
    targets: tuple[float, ...]
    settings: EstimationSettings
    n_actors: int
    n_waves: int
    warnings: tuple[str, ...] = ()
    phase2_trace: tuple[tuple[float, ...], ...] = ()

    @property
    def rate_rows(self) -> tuple[EffectRow, ...]:
        return tuple(r for r in self.rows if r.is_rate)

    @property
    def effect_rows(self) -> tuple[EffectRow, ...]:
        return tuple(r for r in self.rows if not r.is_rate)

    def estimates(self) -> np.ndarray:
        return np.array([r.estimate for r in self.rows])

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "overall_max_convergence_ratio": self.overall_max_convergence_ratio,
            "converged": self.converged,
            "targets": list(self.targets),
            "settings": {
                "seed": self.settings.seed,
                "n3": self.settings.n3,
                "n_sub": self.settings.n_sub,
                "n1": self.settings.n1,
                "initial_gain": self.settings.initial_gain,
                "max_convergence_ratio": self.settings.max_convergence_ratio,
                "workers": self.settings.workers,
            },
            "n_actors": self.n_actors,
            "n_waves": self.n_waves,
            "warnings": list(self.warnings),
            "phase2_trace": [list(t) for t in self.phase2_trace],
        }


def gain_schedule(initial_gain: float, n_sub: int) -> list[float]:
    """Phase-2 gains: the initial gain halves every subphase."""
    return [initial_gain * 2.0 ** (-(s - 1)) for s in range(1, n_sub + 1)]


def subphase_lengths(n_params: int, n_sub: int) -> list[int]:
    """Phase-2 lengths: 2 * (7 + p) iterations, doubling every subphase."""
    base = 2 * (7 + n_params)
    return [base * 2 ** (s - 1) for s in range(1, n_sub + 1)]


def significance_stars(estimate: float, standard_error: float) -> str:
    """Two-sided normal significance markers on estimate / SE."""
    if not np.isfinite(standard_error) or standard_error <= 0:
        return ""
    z = abs(estimate / standard_error)
    for threshold, stars in STAR_THRESHOLDS:
        if z > threshold:
            return stars
    return ""


def convergence_ratios(deviations: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-statistic t-ratios mean/sd and their maximum absolute value.

    A degenerate statistic (zero sd) yields 0 when its mean deviation is also
    zero, else infinity.
    """
    deviations = np.asarray(deviations, dtype=float)
    means = deviations.mean(axis=0)
    sds = deviations.std(axis=0, ddof=1) if deviations.shape[0] > 1 else np.zeros(
        deviations.shape[1]
    )
    ratios = np.empty_like(means)
    for k in range(means.size):
        if sds[k] > 0:
            ratios[k] = means[k] / sds[k]
        else:
            ratios[k] = 0.0 if means[k] == 0.0 else np.inf
    return ratios, float(np.max(np.abs(ratios)))


def target_statistics(waves: Sequence[np.ndarray], model: ModelSpec) -> np.ndarray:
    """Observed moment targets: per-transition Hamming distances, then the
    evaluation statistics summed over end waves (period-m covariates)."""
    stats = [
        float(hamming_distance(waves[m], waves[m + 1]))
        for m in range(len(waves) - 1)
    ]
    for eff in model.effects:
        stats.append(
            sum(
                total_statistic(eff, waves[m + 1], model.covariates, period=m)
                for m in range(len(waves) - 1)
            )
        )
    return np.array(stats)


def _simulated_statistics(
    waves: Sequence[np.ndarray],
    model: ModelSpec,
    master_seed: int,
    theta: np.ndarray,
    key: tuple[int, ...],
) -> np.ndarray:
    """One simulation of all transitions at theta; the same key replays the
    same random numbers (common random numbers across perturbations)."""
    model_theta = model.with_parameters(theta)
    t = model.n_transitions
    stats = np.zeros(t + len(model.effects))
    for m in range(t):
        seed = np.random.SeedSequence(entropy=master_seed, spawn_key=key + (m,))
        x_end = simulate_period(waves[m], model_theta, m, seed)
        stats[m] = hamming_distance(waves[m], x_end)
        for k, eff in enumerate(model.effects):
            stats[t + k] += total_statistic(eff, x_end, model.covariates, period=m)
    return stats


# Worker-process context for parallel batches (set once per worker).
_WORKER_CTX: dict = {}


def _init_worker(waves, model, master_seed):
    _WORKER_CTX["args"] = (waves, model, master_seed)


def _worker_task(task):
    theta, key = task
    waves, model, master_seed = _WORKER_CTX["args"]
    return _simulated_statistics(waves, model, master_seed, np.asarray(theta), tuple(key))


class MomentEstimator:
    """Three-phase moment estimation for one model on one wave panel.

    ``statistic_sampler`` replaces the built-in simulator when given; it is
    called as ``sampler(theta, key)`` and must return the stacked statistic
    vector.  This hook exists for the moment-fixed-point self-test and forces
    serial execution.
    """

    def __init__(
        self,
        waves: Sequence[np.ndarray],
        model: ModelSpec,
        settings: EstimationSettings | None = None,
        statistic_sampler: Callable[[np.ndarray, tuple[int, ...]], np.ndarray] | None = None,
    ):
        if len(waves) < 2:
            raise EstimationError("estimation needs at least 2 observation waves")
        self.waves = [as_adjacency(w).astype(np.int8) for w in waves]
        sizes = {w.shape[0] for w in self.waves}
        if sizes != {model.n_actors}:
            raise EstimationError("waves and model disagree on the actor count")
        if model.n_transitions != len(waves) - 1:
            raise EstimationError(
                f"model has {model.n_transitions} rate parameters for "
                f"{len(waves) - 1} transitions"
            )
        self.model = model
        self.settings = settings or EstimationSettings()
        self._sampler = statistic_sampler
        self.targets = target_statistics(self.waves, model)
        self.n_rates = model.n_transitions
        self.n_params = self.n_rates + len(model.effects)
        self._executor: ProcessPoolExecutor | None = None

    # -- simulation plumbing -------------------------------------------------

    def _sample(self, theta: np.ndarray, key: tuple[int, ...]) -> np.ndarray:
        if self._sampler is not None:
            return np.asarray(self._sampler(theta, key), dtype=float)
        return _simulated_statistics(
            self.waves, self.model, self.settings.seed, theta, key
        )

    def _sample_batch(self, tasks: list[tuple[np.ndarray, tuple[int, ...]]]) -> np.ndarray:
        """Evaluate many (theta, key) simulations; order-preserving."""
        if self._sampler is None and self.settings.workers > 1 and len(tasks) > 1:
            if self._executor is None:
                self._executor = ProcessPoolExecutor(
                    max_workers=self.settings.workers,
                    initializer=_init_worker,
                    initargs=(self.waves, self.model, self.settings.seed),
                )
            chunk = max(1, len(tasks) // (self.settings.workers * 8))
            results = list(self._executor.map(_worker_task, tasks, chunksize=chunk))
        else:
            results = [self._sample(theta, key) for theta, key in tasks]
        return np.array(results)

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    # -- initialization ------------------------------------------------------

    def initial_parameters(self) -> np.ndarray:
        """Neutral start: rates from observed change counts, density -1."""
        theta = np.zeros(self.n_params)
        n = self.model.n_actors
        for m in range(self.n_rates):
            theta[m] = max(self.targets[m] / n, _RATE_FLOOR)
        for k, eff in enumerate(self.model.effects):
            if eff.kind == "density":
                theta[self.n_rates + k] = -1.0
        return theta

    # -- phases ----------------------------------------------------------------

    def _derivative_at(self, theta: np.ndarray, phase: int) -> tuple[np.ndarray, np.ndarray]:
        """Forward-difference derivative of expected statistics at theta.

        Common random numbers: the perturbed runs of replicate r replay the
        seeds of its baseline run.  Returns (D, mean baseline statistics).
        """
        n1 = self.settings.n1
        deltas = 0.1 * np.maximum(1.0, np.abs(theta))
        tasks = []
        for r in range(n1):
            tasks.append((theta.copy(), (phase, r)))
            for k in range(self.n_params):
                perturbed = theta.copy()
                perturbed[k] += deltas[k]
                tasks.append((perturbed, (phase, r)))
        flat = self._sample_batch(tasks)
        per_replicate = flat.reshape(n1, self.n_params + 1, self.n_params)
        base = per_replicate[:, 0, :]
        derivative = np.empty((self.n_params, self.n_params))
        for k in range(self.n_params):
            derivative[:, k] = (per_replicate[:, k + 1, :] - base).mean(axis=0) / deltas[k]
        condition = np.linalg.cond(derivative)
        if not np.isfinite(condition) or condition > _MAX_CONDITION:
            raise EstimationError(
                f"derivative matrix is ill-conditioned (cond={condition:.3g}); "
                "consider removing weakly identified effects"
            )
        return derivative, base.mean(axis=0)

    def _clip_and_guard(self, theta: np.ndarray, where: str) -> np.ndarray:
        theta = theta.copy()
        theta[: self.n_rates] = np.maximum(theta[: self.n_rates], _RATE_FLOOR)
        worst = np.max(np.abs(theta))
        if worst > _ABS_PARAM_LIMIT:
            raise EstimationError(
                f"{where}: parameter magnitude {worst:.2f} exceeds "
                f"{_ABS_PARAM_LIMIT}; estimation diverged "
                f"(iterate {np.array2string(theta, precision=3)})"
            )
        return theta

    def phase1(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Derivative estimate plus one Newton refinement of theta."""
        derivative, mean_stats = self._derivative_at(theta, _PH_DERIVATIVE)
        step = np.linalg.solve(derivative, mean_stats - self.targets)
        refined = self._clip_and_guard(
            theta - self.settings.initial_gain * step, "phase 1 refinement"
        )
        return derivative, refined

    def phase2(
        self, theta: np.ndarray, derivative: np.ndarray
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        """Robbins-Monro subphases; returns the final-subphase average."""
        trace: list[np.ndarray] = []
        counter = 0
        last_subphase: list[np.ndarray] = []
        gains = gain_schedule(self.settings.initial_gain, self.settings.n_sub)
        lengths = subphase_lengths(self.n_params, self.settings.n_sub)
        for s, (gain, length) in enumerate(zip(gains, lengths), start=1):
            subphase: list[np.ndarray] = []
            for _ in range(length):
                stats = self._sample(theta, (_PH_UPDATE, counter))
                counter += 1
                step = np.linalg.solve(derivative, stats - self.targets)
                theta = self._clip_and_guard(
                    theta - gain * step, f"phase 2 subphase {s}"
                )
                subphase.append(theta)
                trace.append(theta)
            last_subphase = subphase
        return np.mean(last_subphase, axis=0), trace

    def phase3(
        self, theta_hat: np.ndarray
    ) -> tuple[np.ndarray, float, np.ndarray, list[str]]:
        """Diagnostics at the estimate: t-ratios, overall ratio, SEs."""
        tasks = [
            (theta_hat.copy(), (_PH_DIAGNOSE, r)) for r in range(self.settings.n3)
        ]
        sims = self._sample_batch(tasks)
        deviations = sims - self.targets
        ratios, overall = convergence_ratios(deviations)
        warnings = [
            f"statistic '{k}' is degenerate (zero deviation sd)"
            for k, ratio in enumerate(ratios)
            if not np.isfinite(ratio)
        ]

        try:
            derivative, _ = self._derivative_at(theta_hat, _PH_SE)
            inv = np.linalg.inv(derivative)
            cov = np.cov(sims, rowvar=False, ddof=1)
            sigma = inv @ cov @ inv.T
            ses = np.sqrt(np.clip(np.diagonal(sigma), 0.0, None))
        except EstimationError as exc:
            warnings.append(f"standard errors unavailable: {exc}")
            ses = np.full(self.n_params, np.nan)
        return ratios, overall, ses, warnings

    # -- driver ----------------------------------------------------------------

    def run(self) -> EstimationResult:
        try:
            theta = self.initial_parameters()
            derivative, theta = self.phase1(theta)
            theta_hat, trace = self.phase2(theta, derivative)
            ratios, overall, ses, warnings = self.phase3(theta_hat)
        finally:
            self.close()

        if overall > self.settings.max_convergence_ratio:
            warnings.append(
                f"overall maximum convergence ratio {overall:.4f} exceeds "
                f"{self.settings.max_convergence_ratio}; estimates may not have converged"
            )

        rows: list[EffectRow] = []
        for m in range(self.n_rates):
            rows.append(
                EffectRow(
                    label=f"Rate period {m + 1}",
                    kind="rate",
                    name="",
                    estimate=float(theta_hat[m]),
                    standard_error=float(ses[m]),
                    t_convergence=float(ratios[m]),
                    stars="",
                    is_rate=True,
                    period=m,
                )
            )
        for k, eff in enumerate(self.model.effects):
            idx = self.n_rates + k
            est, se = float(theta_hat[idx]), float(ses[idx])
            rows.append(
                EffectRow(
                    label=eff.label,
                    kind=eff.kind,
                    name=eff.name,
                    estimate=est,
                    standard_error=se,
                    t_convergence=float(ratios[idx]),
                    stars=significance_stars(est, se),
                    is_rate=False,
                )
            )
        return EstimationResult(
            rows=tuple(rows),
            overall_max_convergence_ratio=overall,
            converged=overall <= self.settings.max_convergence_ratio,
            targets=tuple(float(t) for t in self.targets),
            settings=self.settings,
            n_actors=self.model.n_actors,
            n_waves=len(self.waves),
            warnings=tuple(warnings),
            phase2_trace=tuple(tuple(float(v) for v in t) for t in trace),
        )


def estimate(
    waves: Sequence[np.ndarray],
    model: ModelSpec,
    settings: EstimationSettings | None = None,
    *,
    statistic_sampler=None,
) -> EstimationResult:
    """Estimate model parameters from observed waves; see MomentEstimator."""
    return MomentEstimator(waves, model, settings, statistic_sampler).run()
