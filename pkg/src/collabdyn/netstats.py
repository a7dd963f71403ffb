"""Organization covariates and dyadic proximities from the period networks.

Per organization and period this module computes

- combinatorial potential / opportunity: mean degree centrality and mean
  structural-holes score of the organization's knowledge elements in the
  period's global knowledge network;
- modularity and global clustering coefficient of the organization's local
  knowledge network;
- knowledge diversity and uniqueness (config-selectable definitions);
- the firm/academic indicator (1 = firm);

plus cognitive proximity (cosine of TF-IDF semantic vectors, mean-centered)
and organizational proximity (same-type indicator) between organizations.
Continuous covariates are also stored mean-centered within each period.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus, OrgType, PeriodCorpus
from .errors import ConfigError, PipelineError
from .graphs import UndirectedGraph
from .keextract import DocumentTerms, Vocabulary
from .louvain import DEFAULT_SEED, louvain_modularity
from .netbuild import PeriodNetworks

CONTINUOUS_COVARIATES = (
    "combinatorial_potential",
    "combinatorial_opportunity",
    "modularity",
    "global_clustering",
    "knowledge_diversity",
    "knowledge_uniqueness",
)
BINARY_COVARIATES = ("org_type",)
COVARIATE_NAMES = CONTINUOUS_COVARIATES + BINARY_COVARIATES


# ---------------------------------------------------------------------------
# Node- and graph-level metrics
# ---------------------------------------------------------------------------


def degree_centrality(graph: UndirectedGraph, v: int) -> float:
    """degree(v) / (n - 1); a single-node graph scores 0."""
    n = graph.n_nodes
    if n <= 1:
        return 0.0
    return graph.degree(v) / (n - 1)


def burt_constraint(graph: UndirectedGraph, v: int) -> float:
    """Burt's constraint with unweighted tie proportions p_vj = 1/deg(v).

    C(v) = sum_j (p_vj + sum_{q in N(v), q != j} p_vq * p_qj)^2 over the
    neighbors j of v.  An isolate has an empty sum, hence 0.
    """
    neighbors = list(graph.neighbors(v))
    d = len(neighbors)
    if d == 0:
        return 0.0
    p = 1.0 / d
    total = 0.0
    for j in neighbors:
        indirect = 0.0
        for q in neighbors:
            if q != j and graph.has_edge(q, j):
                indirect += p / graph.degree(q)
        total += (p + indirect) ** 2
    return total


def structural_holes(graph: UndirectedGraph, v: int) -> float:
    """1 - min(constraint, 1): larger means more brokerage; isolates score 0."""
    if graph.degree(v) == 0:
        return 0.0
    return 1.0 - min(burt_constraint(graph, v), 1.0)


def global_clustering(graph: UndirectedGraph) -> float:
    """Transitivity: 3 * triangles / connected triplets; 0 without triplets."""
    triplets = sum(
        graph.degree(v) * (graph.degree(v) - 1) // 2 for v in range(graph.n_nodes)
    )
    if triplets == 0:
        return 0.0
    closed = 0  # sum over edges of common neighbors == 3 * triangle count
    for u, v, _ in graph.edges():
        nu = set(graph.neighbors(u))
        closed += sum(1 for w in graph.neighbors(v) if w in nu)
    return closed / triplets


# ---------------------------------------------------------------------------
# Organization-level covariates
# ---------------------------------------------------------------------------


def org_semantic_vector(
    org_id: str,
    period: PeriodCorpus,
    terms_by_patent: Mapping[str, DocumentTerms],
    vocab: Vocabulary,
) -> np.ndarray:
    """TF-IDF bag over the retained vocabulary for one organization-period.

    The organization's period patents are pooled into one pseudo-document:
    tf(e) = occurrences of e / total retained occurrences, idf from the
    corpus-level document frequencies.  Organizations without occurrences get
    the zero vector.
    """
    counts: dict[int, int] = {}
    for p in period.patents:
        if org_id not in p.assignees:
            continue
        for ke_id, c in terms_by_patent[p.patent_id].counts.items():
            counts[ke_id] = counts.get(ke_id, 0) + c
    vec = np.zeros(len(vocab))
    total = sum(counts.values())
    if total == 0:
        return vec
    for ke_id, c in counts.items():
        vec[ke_id] = (c / total) * vocab.idf(ke_id)
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0 if either vector is zero."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _org_ke_nodes(org_id: str, net: PeriodNetworks) -> list[int]:
    """Global-network node indices of the organization's period KEs."""
    local = net.local_k.get(org_id)
    if local is None or not local.labels:
        return []
    index = net.global_k.label_index
    return [index[ke] for ke in local.labels]


def combinatorial_potential(org_id: str, net: PeriodNetworks) -> float:
    """Mean degree centrality of the org's KEs in the global knowledge net."""
    nodes = _org_ke_nodes(org_id, net)
    if not nodes:
        return 0.0
    g = net.global_k.graph
    return sum(degree_centrality(g, v) for v in nodes) / len(nodes)


def combinatorial_opportunity(org_id: str, net: PeriodNetworks) -> float:
    """Mean structural-holes score of the org's KEs in the global net."""
    nodes = _org_ke_nodes(org_id, net)
    if not nodes:
        return 0.0
    g = net.global_k.graph
    return sum(structural_holes(g, v) for v in nodes) / len(nodes)


def knowledge_diversity(
    org_id: str,
    net: PeriodNetworks,
    *,
    definition: str = "count_distance",
    org_counts: Mapping[int, int] | None = None,
) -> float:
    """Breadth of an organization's knowledge stock.

    ``count_distance`` (default): |K| times the mean cosine distance between
    the global-network co-occurrence rows of the org's KE pairs; fewer than
    two KEs scores 0.  ``entropy``: Shannon entropy of the org's KE occurrence
    distribution (needs ``org_counts``).
    """
    if definition == "entropy":
        if org_counts is None:
            raise ConfigError("entropy diversity needs per-org KE counts")
        total = sum(org_counts.values())
        if total == 0:
            return 0.0
        return -sum(
            (c / total) * math.log(c / total) for c in org_counts.values() if c > 0
        )
    if definition != "count_distance":
        raise ConfigError(f"unknown diversity definition '{definition}'")

    nodes = _org_ke_nodes(org_id, net)
    if len(nodes) <= 1:
        return 0.0
    weights = net.global_k.graph.adjacency_matrix(weighted=True)
    dist_sum = 0.0
    n_pairs = 0
    for a_idx in range(len(nodes)):
        for b_idx in range(a_idx + 1, len(nodes)):
            dist_sum += 1.0 - cosine(weights[nodes[a_idx]], weights[nodes[b_idx]])
            n_pairs += 1
    return len(nodes) * (dist_sum / n_pairs)


def knowledge_uniqueness(
    org_id: str,
    holders_by_ke: Mapping[int, int],
    org_kes: Sequence[int],
    n_orgs: int,
    *,
    definition: str = "org_rarity",
    vocab: Vocabulary | None = None,
) -> float:
    """Rarity of an organization's knowledge stock.

    ``org_rarity`` (default): mean over the org's KEs of 1 - n_e / N where
    n_e counts organizations holding the element this period.  ``idf_mean``:
    mean corpus idf of the org's KEs.  No KEs scores 0.
    """
    if not org_kes:
        return 0.0
    if definition == "org_rarity":
        return sum(1.0 - holders_by_ke[ke] / n_orgs for ke in org_kes) / len(org_kes)
    if definition == "idf_mean":
        if vocab is None:
            raise ConfigError("idf_mean uniqueness needs the vocabulary")
        return sum(vocab.idf(ke) for ke in org_kes) / len(org_kes)
    raise ConfigError(f"unknown uniqueness definition '{definition}'")


def cognitive_proximity(vec_a: np.ndarray, vec_b: np.ndarray) -> float:
    """Cosine similarity of two organizations' semantic vectors."""
    return cosine(vec_a, vec_b)


def organizational_proximity(type_a: OrgType, type_b: OrgType) -> int:
    """1 if the organizations share a type, else 0."""
    return 1 if type_a is type_b else 0


# ---------------------------------------------------------------------------
# Covariate table assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovariateTable:
    org_ids: tuple[str, ...]
    n_periods: int
    raw: Mapping[str, np.ndarray]  # name -> (periods, orgs)
    centered: Mapping[str, np.ndarray]  # continuous mean-centered per period


@dataclass(frozen=True)
class ProximityMatrices:
    org_ids: tuple[str, ...]
    cognitive: np.ndarray  # (periods, orgs, orgs), diagonal zeroed
    cognitive_centered: np.ndarray  # off-diagonal mean removed per period
    organizational: np.ndarray  # (periods, orgs, orgs) binary


def build_covariate_tables(
    corpus: Corpus,
    periods: Sequence[PeriodCorpus],
    nets: Sequence[PeriodNetworks],
    terms: Sequence[DocumentTerms],
    vocab: Vocabulary,
    *,
    diversity_definition: str = "count_distance",
    uniqueness_definition: str = "org_rarity",
    louvain_seed: int = DEFAULT_SEED,
    freeze_at_first_period: bool = False,
) -> tuple[CovariateTable, ProximityMatrices]:
    """Compute every covariate per organization and period, plus proximities.

    Continuous covariates are mean-centered over organizations within each
    period; the binary type indicator is left untouched.  With
    ``freeze_at_first_period`` the first period's values are replicated
    across all periods (time-constant covariates).
    """
    org_ids = corpus.org_ids
    if not org_ids:
        raise PipelineError("organization registry is empty")
    n_orgs = len(org_ids)
    n_periods = len(periods)
    terms_by_patent = {t.patent_id: t for t in terms}
    org_types = [corpus.organizations[oid].org_type for oid in org_ids]

    raw = {name: np.zeros((n_periods, n_orgs)) for name in COVARIATE_NAMES}
    cognitive = np.zeros((n_periods, n_orgs, n_orgs))
    organizational = np.zeros((n_periods, n_orgs, n_orgs))

    effective = periods[:1] * n_periods if freeze_at_first_period else periods
    computed: dict[int, int] = {}  # period_index already computed -> row to copy
    for p_idx, period in enumerate(effective):
        if period.period_index in computed:
            src = computed[period.period_index]
            for name in COVARIATE_NAMES:
                raw[name][p_idx] = raw[name][src]
            cognitive[p_idx] = cognitive[src]
            organizational[p_idx] = organizational[src]
            continue
        computed[period.period_index] = p_idx
        net = nets[period.period_index]

        holders: dict[int, int] = {}
        org_kes: dict[str, list[int]] = {}
        org_counts: dict[str, dict[int, int]] = {}
        for oid in org_ids:
            kes: set[int] = set()
            counts: dict[int, int] = {}
            for patent in period.patents:
                if oid not in patent.assignees:
                    continue
                for ke_id, c in terms_by_patent[patent.patent_id].counts.items():
                    kes.add(ke_id)
                    counts[ke_id] = counts.get(ke_id, 0) + c
            org_kes[oid] = sorted(kes)
            org_counts[oid] = counts
            for ke in kes:
                holders[ke] = holders.get(ke, 0) + 1

        vectors = [
            org_semantic_vector(oid, period, terms_by_patent, vocab)
            for oid in org_ids
        ]
        for a, oid in enumerate(org_ids):
            local = net.local_k[oid].graph
            raw["combinatorial_potential"][p_idx, a] = combinatorial_potential(oid, net)
            raw["combinatorial_opportunity"][p_idx, a] = combinatorial_opportunity(
                oid, net
            )
            raw["modularity"][p_idx, a] = louvain_modularity(local, seed=louvain_seed)
            raw["global_clustering"][p_idx, a] = global_clustering(local)
            raw["knowledge_diversity"][p_idx, a] = knowledge_diversity(
                oid,
                net,
                definition=diversity_definition,
                org_counts=org_counts[oid],
            )
            raw["knowledge_uniqueness"][p_idx, a] = knowledge_uniqueness(
                oid,
                holders,
                org_kes[oid],
                n_orgs,
                definition=uniqueness_definition,
                vocab=vocab,
            )
            raw["org_type"][p_idx, a] = 1.0 if org_types[a] is OrgType.FIRM else 0.0
            for b in range(a + 1, n_orgs):
                cp = cognitive_proximity(vectors[a], vectors[b])
                cognitive[p_idx, a, b] = cognitive[p_idx, b, a] = cp
                op = organizational_proximity(org_types[a], org_types[b])
                organizational[p_idx, a, b] = organizational[p_idx, b, a] = op

    centered = {}
    for name in CONTINUOUS_COVARIATES:
        centered[name] = raw[name] - raw[name].mean(axis=1, keepdims=True)
    for name in BINARY_COVARIATES:
        centered[name] = raw[name].copy()

    cognitive_centered = cognitive.copy()
    off_diag = ~np.eye(n_orgs, dtype=bool)
    for p_idx in range(n_periods):
        cognitive_centered[p_idx][off_diag] -= cognitive[p_idx][off_diag].mean()

    table = CovariateTable(
        org_ids=org_ids, n_periods=n_periods, raw=raw, centered=centered
    )
    prox = ProximityMatrices(
        org_ids=org_ids,
        cognitive=cognitive,
        cognitive_centered=cognitive_centered,
        organizational=organizational,
    )
    return table, prox


# ---------------------------------------------------------------------------
# CSV dumps (floats via repr for exact round-trips)
# ---------------------------------------------------------------------------


def dump_covariates_csv(table: CovariateTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["org_id", "period"]
        + list(COVARIATE_NAMES)
        + [f"{name}_centered" for name in COVARIATE_NAMES]
    )
    for p in range(table.n_periods):
        for a, oid in enumerate(table.org_ids):
            row = [oid, p]
            row += [repr(float(table.raw[name][p, a])) for name in COVARIATE_NAMES]
            row += [
                repr(float(table.centered[name][p, a])) for name in COVARIATE_NAMES
            ]
            writer.writerow(row)
    return buf.getvalue()


def load_covariates_csv(text: str) -> CovariateTable:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise PipelineError("empty covariate table")
    org_ids = tuple(dict.fromkeys(r["org_id"] for r in rows))
    n_periods = max(int(r["period"]) for r in rows) + 1
    raw = {name: np.zeros((n_periods, len(org_ids))) for name in COVARIATE_NAMES}
    centered = {name: np.zeros((n_periods, len(org_ids))) for name in COVARIATE_NAMES}
    index = {oid: i for i, oid in enumerate(org_ids)}
    for r in rows:
        p, a = int(r["period"]), index[r["org_id"]]
        for name in COVARIATE_NAMES:
            raw[name][p, a] = float(r[name])
            centered[name][p, a] = float(r[f"{name}_centered"])
    return CovariateTable(
        org_ids=org_ids, n_periods=n_periods, raw=raw, centered=centered
    )


def _dump_matrix_csv(org_ids: Sequence[str], matrix: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["org_id"] + list(org_ids))
    for a, oid in enumerate(org_ids):
        writer.writerow([oid] + [repr(float(x)) for x in matrix[a]])
    return buf.getvalue()


def write_proximities(prox: ProximityMatrices, directory) -> None:
    os.makedirs(str(directory), exist_ok=True)
    kinds = {
        "cognitive": prox.cognitive,
        "cognitive_centered": prox.cognitive_centered,
        "organizational": prox.organizational,
    }
    for kind, stack in kinds.items():
        for p in range(stack.shape[0]):
            path = os.path.join(str(directory), f"proximity_{kind}_p{p}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(_dump_matrix_csv(prox.org_ids, stack[p]))


def load_proximities(directory) -> ProximityMatrices:
    directory = str(directory)
    stacks: dict[str, list[np.ndarray]] = {}
    org_ids: tuple[str, ...] | None = None
    for kind in ("cognitive", "cognitive_centered", "organizational"):
        mats = []
        p = 0
        while True:
            path = os.path.join(directory, f"proximity_{kind}_p{p}.csv")
            if not os.path.exists(path):
                break
            with open(path, newline="") as fh:
                rows = list(csv.reader(fh))
            header = tuple(rows[0][1:])
            if org_ids is None:
                org_ids = header
            mats.append(np.array([[float(x) for x in r[1:]] for r in rows[1:]]))
            p += 1
        if not mats:
            raise PipelineError(f"missing proximity dumps for '{kind}' in {directory}")
        stacks[kind] = mats
    assert org_ids is not None
    return ProximityMatrices(
        org_ids=org_ids,
        cognitive=np.stack(stacks["cognitive"]),
        cognitive_centered=np.stack(stacks["cognitive_centered"]),
        organizational=np.stack(stacks["organizational"]),
    )
