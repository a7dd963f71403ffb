"""Actor-oriented model of non-directed tie dynamics.

Actors get change opportunities from a shared exponential clock of total rate
n * rho over model time [0, 1].  At each opportunity a uniformly chosen actor
evaluates toggling each of its n-1 ties plus keeping the status quo, scoring
alternatives with a linear objective over effect statistics, and picks one
from the multinomial logit over those scores.  Ties are non-directed under
the forcing rule: the chosen actor imposes the toggle on both directions.

Evaluation effects:

- ``density``: number of partners, s_i = sum_j x_ij
- ``transitive_triads``: closed triangles at the actor,
  s_i = sum_{j<h} x_ij x_ih x_jh
- ``covariate_activity``: own covariate times degree, s_i = v_i sum_j x_ij
- ``dyadic_covariate``: covariate-weighted ties, s_i = sum_j x_ij w_ij
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ModelError

EFFECT_KINDS = ("density", "transitive_triads", "covariate_activity", "dyadic_covariate")

_EFFECT_LABELS = {
    "density": "Degree (density effect)",
    "transitive_triads": "Transitive triads",
}


@dataclass(frozen=True)
class EffectSpec:
    """One model effect: an evaluation statistic or a period rate."""

    kind: str
    name: str = ""  # covariate / proximity-matrix name for covariate kinds
    parameter: float = 0.0
    period: int | None = None  # transitions are indexed for rate effects

    def __post_init__(self):
        if self.kind == "rate":
            if self.period is None:
                raise ModelError("rate effects need a period index")
        elif self.kind not in EFFECT_KINDS:
            raise ModelError(f"unknown effect kind '{self.kind}'")
        elif self.kind in ("covariate_activity", "dyadic_covariate") and not self.name:
            raise ModelError(f"{self.kind} effects need a covariate name")

    @property
    def label(self) -> str:
        if self.kind == "rate":
            return f"Rate period {self.period + 1}"
        if self.kind in _EFFECT_LABELS:
            return _EFFECT_LABELS[self.kind]
        return self.name.replace("_", " ").capitalize()


@dataclass(frozen=True)
class CovariateSet:
    """Per-transition covariate values: monadic (T, n), dyadic (T, n, n)."""

    monadic: Mapping[str, np.ndarray] = field(default_factory=dict)
    dyadic: Mapping[str, np.ndarray] = field(default_factory=dict)

    def monadic_values(self, name: str, period: int) -> np.ndarray:
        try:
            return self.monadic[name][period]
        except KeyError:
            raise ModelError(f"unknown actor covariate '{name}'") from None

    def dyadic_values(self, name: str, period: int) -> np.ndarray:
        try:
            return self.dyadic[name][period]
        except KeyError:
            raise ModelError(f"unknown dyadic covariate '{name}'") from None


@dataclass(frozen=True)
class ModelSpec:
    """Evaluation effects with parameters, per-transition rates, covariates."""

    n_actors: int
    effects: tuple[EffectSpec, ...]
    rates: tuple[float, ...]
    covariates: CovariateSet = field(default_factory=CovariateSet)

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(self.effects))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if self.n_actors < 2:
            raise ModelError("the model needs at least 2 actors")
        if not self.effects:
            raise ModelError("the effect list is empty")
        for eff in self.effects:
            if eff.kind == "rate":
                raise ModelError("rate effects are carried in ModelSpec.rates")
        if any(r <= 0 for r in self.rates):
            raise ModelError("rate parameters must be positive")
        # fail fast on dangling covariate references
        for eff in self.effects:
            if eff.kind == "covariate_activity" and eff.name not in self.covariates.monadic:
                raise ModelError(f"unknown actor covariate '{eff.name}'")
            if eff.kind == "dyadic_covariate" and eff.name not in self.covariates.dyadic:
                raise ModelError(f"unknown dyadic covariate '{eff.name}'")

    @property
    def n_transitions(self) -> int:
        return len(self.rates)

    def parameters(self) -> np.ndarray:
        """Stacked parameter vector: rates first, then effect betas."""
        return np.array(list(self.rates) + [e.parameter for e in self.effects])

    def with_parameters(self, theta: Sequence[float]) -> "ModelSpec":
        theta = np.asarray(theta, dtype=float)
        t = self.n_transitions
        if theta.shape != (t + len(self.effects),):
            raise ModelError("parameter vector has the wrong length")
        effects = tuple(
            replace(eff, parameter=float(theta[t + k]))
            for k, eff in enumerate(self.effects)
        )
        return replace(self, effects=effects, rates=tuple(theta[:t]))


def as_adjacency(x) -> np.ndarray:
    """Validate and return a 0/1 symmetric zero-diagonal float64 matrix."""
    mat = np.asarray(x, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ModelError("network state must be a square matrix")
    if not np.array_equal(mat, mat.T):
        raise ModelError("network state must be symmetric")
    if np.any(np.diagonal(mat) != 0):
        raise ModelError("network state must have a zero diagonal")
    if not np.all((mat == 0) | (mat == 1)):
        raise ModelError("tie variables must be 0 or 1")
    return mat


# ---------------------------------------------------------------------------
# Effect statistics and the actor objective
# ---------------------------------------------------------------------------


def effect_statistic(
    effect: EffectSpec,
    i: int,
    x: np.ndarray,
    covariates: CovariateSet,
    period: int = 0,
) -> float:
    """Evaluation statistic s_ik of one effect at actor i in state x."""
    row = x[i]
    if effect.kind == "density":
        return float(row.sum())
    if effect.kind == "transitive_triads":
        return float(row @ x @ row) / 2.0
    if effect.kind == "covariate_activity":
        v = covariates.monadic_values(effect.name, period)
        return float(v[i] * row.sum())
    if effect.kind == "dyadic_covariate":
        w = covariates.dyadic_values(effect.name, period)
        return float(row @ w[i])
    raise ModelError(f"effect '{effect.kind}' has no evaluation statistic")


def total_statistic(
    effect: EffectSpec, x: np.ndarray, covariates: CovariateSet, period: int = 0
) -> float:
    """Statistic summed over all actors (vectorized)."""
    if effect.kind == "density":
        return float(x.sum())
    if effect.kind == "transitive_triads":
        return float(np.trace(x @ x @ x)) / 2.0
    if effect.kind == "covariate_activity":
        v = covariates.monadic_values(effect.name, period)
        return float(v @ x.sum(axis=1))
    if effect.kind == "dyadic_covariate":
        w = covariates.dyadic_values(effect.name, period)
        return float((x * w).sum())
    raise ModelError(f"effect '{effect.kind}' has no evaluation statistic")


def objective(i: int, x: np.ndarray, model: ModelSpec, period: int = 0) -> float:
    """Actor i's evaluation function: sum_k beta_k s_ik(x)."""
    return sum(
        eff.parameter * effect_statistic(eff, i, x, model.covariates, period)
        for eff in model.effects
    )


def softmax(values: np.ndarray) -> np.ndarray:
    """Multinomial-logit probabilities with max-subtraction for stability."""
    values = np.asarray(values, dtype=np.float64)
    shifted = values - values.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def _toggle_gains(i: int, x: np.ndarray, model: ModelSpec, period: int) -> np.ndarray:
    """Objective change for actor i of toggling the tie to each j (vector)."""
    n = model.n_actors
    row = x[i]
    magnitude = np.zeros(n)
    common: np.ndarray | None = None
    for eff in model.effects:
        if eff.kind == "density":
            magnitude += eff.parameter
        elif eff.kind == "transitive_triads":
            if common is None:
                common = x @ row  # common neighbours of i and each j
            magnitude += eff.parameter * common
        elif eff.kind == "covariate_activity":
            v = model.covariates.monadic_values(eff.name, period)
            magnitude += eff.parameter * v[i]
        elif eff.kind == "dyadic_covariate":
            w = model.covariates.dyadic_values(eff.name, period)
            magnitude += eff.parameter * w[i]
    return (1.0 - 2.0 * row) * magnitude  # adding gains, removing loses


def choice_probabilities(
    i: int, x: np.ndarray, model: ModelSpec, period: int = 0
) -> np.ndarray:
    """Ministep distribution for actor i: n-1 tie toggles plus no-change.

    Entry k < n-1 is the probability of toggling the tie to the k-th other
    actor in ascending index order; the last entry keeps the status quo.
    Probabilities are the logit over the objective evaluated at each reached
    state; because the objective differences are used directly, adding any
    constant to all objectives cannot change the result.
    """
    gains = _toggle_gains(i, x, model, period)
    values = np.append(np.delete(gains, i), 0.0)  # status quo gains nothing
    return softmax(values)


def choice_alternatives(i: int, n_actors: int) -> list[int | None]:
    """Alternative labels aligned with choice_probabilities (None = no change)."""
    return [j for j in range(n_actors) if j != i] + [None]


# ---------------------------------------------------------------------------
# Continuous-time simulation of one transition
# ---------------------------------------------------------------------------


@dataclass
class SimState:
    """Mutable state of one running simulation."""

    x: np.ndarray
    t: float
    rng: np.random.Generator
    ministeps: int = 0


@dataclass(frozen=True)
class Ministep:
    time: float
    actor: int
    partner: int | None  # None = kept the status quo


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate_period(
    x_start: np.ndarray,
    model: ModelSpec,
    period: int,
    seed,
    trace: list[Ministep] | None = None,
) -> np.ndarray:
    """Simulate one transition on model time [0, 1]; returns the end network.

    Waiting times are exponential with total rate n * rho_period; each event
    gives a uniformly random actor one ministep.  Deterministic given the
    seed (int, SeedSequence, or Generator).
    """
    if not 0 <= period < model.n_transitions:
        raise ModelError(f"period {period} outside 0..{model.n_transitions - 1}")
    x = as_adjacency(x_start)
    n = model.n_actors
    if x.shape[0] != n:
        raise ModelError(f"state has {x.shape[0]} actors, model has {n}")
    state = SimState(x=x, t=0.0, rng=_as_generator(seed))
    total_rate = n * model.rates[period]

    while True:
        state.t += state.rng.exponential(1.0 / total_rate)
        if state.t >= 1.0:
            break
        i = int(state.rng.integers(n))
        probs = choice_probabilities(i, state.x, model, period)
        pick = int(np.searchsorted(np.cumsum(probs), state.rng.random(), side="right"))
        state.ministeps += 1
        if pick >= n - 1:  # status quo
            if trace is not None:
                trace.append(Ministep(state.t, i, None))
            continue
        j = pick if pick < i else pick + 1
        state.x[i, j] = state.x[j, i] = 1.0 - state.x[i, j]
        if trace is not None:
            trace.append(Ministep(state.t, i, j))

    return state.x.astype(np.int8)


def hamming_distance(x: np.ndarray, y: np.ndarray) -> int:
    """Number of unordered tie variables that differ between two networks."""
    x = np.asarray(x)
    y = np.asarray(y)
    return int(np.abs(x - y).sum()) // 2
