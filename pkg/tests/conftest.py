import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # oracles importable as a module

from collabdyn.corpus import filter_assignees, load_corpus, split_periods
from collabdyn.saom import CovariateSet, EffectSpec, ModelSpec, simulate_period

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
FIXTURE_CORPUS = os.path.join(DATA_DIR, "fixture_corpus.csv")
FIXTURE_PERIODS = [(2003, 2007), (2008, 2012), (2013, 2017), (2018, 2022)]

# Generating parameters of the standard recovery experiment: 30 actors,
# 3 waves simulated at known values with master seed 8.
RECOVERY_N = 30
RECOVERY_TRUTH = {
    "rate": 3.0,
    "density": -2.0,
    "transitive_triads": 0.5,
    "partner_affinity": 1.0,
}


def make_recovery_panel(affinity_scale: float = 1.0):
    """Three seeded waves plus the estimation model for the recovery test.

    Returns (waves, model, truth_theta); ``affinity_scale`` rescales the
    dyadic covariate (used by the t-ratio invariance check).
    """
    n = RECOVERY_N
    rng = np.random.default_rng(8)
    w = rng.normal(size=(n, n))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    effects = (
        EffectSpec("density"),
        EffectSpec("transitive_triads"),
        EffectSpec("dyadic_covariate", name="partner_affinity"),
    )

    def model_for(wmat):
        return ModelSpec(
            n_actors=n,
            effects=effects,
            rates=(RECOVERY_TRUTH["rate"],) * 2,
            covariates=CovariateSet(
                dyadic={"partner_affinity": np.stack([wmat, wmat])}
            ),
        )

    truth_theta = [
        RECOVERY_TRUTH["rate"],
        RECOVERY_TRUTH["rate"],
        RECOVERY_TRUTH["density"],
        RECOVERY_TRUTH["transitive_triads"],
        RECOVERY_TRUTH["partner_affinity"],
    ]
    truth = model_for(w).with_parameters(truth_theta)
    x0 = (rng.random((n, n)) < 0.10).astype(np.int8)
    x0 = np.triu(x0, 1)
    x0 = x0 + x0.T
    wave1 = simulate_period(
        x0, truth, 0, seed=np.random.SeedSequence(entropy=8, spawn_key=(100, 0))
    )
    wave2 = simulate_period(
        wave1, truth, 1, seed=np.random.SeedSequence(entropy=8, spawn_key=(100, 1))
    )
    return [x0, wave1, wave2], model_for(affinity_scale * w), truth_theta

SMALL_CSV = """patent_id,title,abstract,year,assignees
P1,Stage alignment,A wafer stage with an alignment module is described.,2003,ACME CORP|firm;NORTH UNIVERSITY|academic
P2,Laser module,A laser source and beam shaping unit for exposure.,2004,ACME CORP|firm;PHOTON WORKS|firm
P3,Resist coating,A polymer resist coating process for fine patterns.,2006,HILLTOP INSTITUTE|academic
"""


@pytest.fixture(scope="session")
def fixture_corpus_raw():
    return load_corpus(FIXTURE_CORPUS)


@pytest.fixture(scope="session")
def fixture_corpus(fixture_corpus_raw):
    return filter_assignees(fixture_corpus_raw, 2, 1)


@pytest.fixture(scope="session")
def fixture_periods(fixture_corpus):
    return split_periods(fixture_corpus, FIXTURE_PERIODS)
