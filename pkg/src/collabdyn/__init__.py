"""collabdyn: collaboration-network dynamics from patent-like corpora.

Pipeline: parse and filter a corpus, extract a knowledge-element vocabulary,
build per-period collaboration and knowledge networks, compute organization
covariates and proximities, and fit an actor-oriented model of tie dynamics
by method-of-moments stochastic approximation.
"""

from .corpus import (
    Corpus,
    Organization,
    OrgType,
    PatentRecord,
    PeriodCorpus,
    dump_corpus,
    filter_assignees,
    load_corpus,
    parse_corpus,
    split_periods,
)
from .errors import (
    ConfigError,
    CorpusError,
    EstimationError,
    ModelError,
    PipelineError,
    VocabularyError,
)
from .estimate import (
    EstimationResult,
    EstimationSettings,
    MomentEstimator,
    estimate,
    target_statistics,
)
from .graphs import UndirectedGraph, from_adjacency
from .keextract import (
    DocumentTerms,
    KnowledgeElement,
    Vocabulary,
    build_vocabulary,
    compute_tfidf,
    extract_candidates,
    merge_similar,
    normalize,
    threshold_filter,
)
from .louvain import find_communities, louvain_modularity, modularity
from .netbuild import (
    LabeledGraph,
    PeriodNetworks,
    build_collab_network,
    build_global_knowledge_network,
    build_local_knowledge_network,
    build_period_networks,
)
from .netstats import (
    CovariateTable,
    ProximityMatrices,
    build_covariate_tables,
    burt_constraint,
    cognitive_proximity,
    combinatorial_opportunity,
    combinatorial_potential,
    degree_centrality,
    global_clustering,
    knowledge_diversity,
    knowledge_uniqueness,
    org_semantic_vector,
    organizational_proximity,
    structural_holes,
)
from .saom import (
    CovariateSet,
    EffectSpec,
    Ministep,
    ModelSpec,
    SimState,
    choice_probabilities,
    effect_statistic,
    hamming_distance,
    objective,
    simulate_period,
    softmax,
    total_statistic,
)

__version__ = "0.1.0"
