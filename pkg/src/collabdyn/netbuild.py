"""Per-period network construction: collaboration, global and local knowledge nets.

For every period we build
- the collaboration network over the full filtered organization registry
  (fixed node set across periods, isolates allowed); an edge means >= 1
  co-assigned patent in the period and its weight counts those patents;
- the global knowledge network over the knowledge elements occurring in the
  period's patents, with co-occurrence-count weights;
- one local knowledge network per organization, restricted to its own patents.

Collaboration ties are period-scoped snapshots by default; pass
``cumulative_collab=True`` to accumulate ties over all periods up to and
including each period.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .corpus import Corpus, PeriodCorpus
from .errors import PipelineError
from .graphs import UndirectedGraph
from .keextract import DocumentTerms


@dataclass(frozen=True)
class LabeledGraph:
    """Graph over dense node indices plus the external identity of each node."""

    graph: UndirectedGraph
    labels: tuple[int, ...]  # node index -> ke_id

    @property
    def label_index(self) -> dict[int, int]:
        return {label: i for i, label in enumerate(self.labels)}


@dataclass(frozen=True)
class PeriodNetworks:
    period_index: int
    org_ids: tuple[str, ...]  # collab node index -> org_id
    collab: UndirectedGraph
    global_k: LabeledGraph
    local_k: Mapping[str, LabeledGraph]  # org_id -> local knowledge network


def build_collab_network(
    period: PeriodCorpus, org_ids: Sequence[str]
) -> UndirectedGraph:
    """Co-assignment graph over the full registry; weight = shared patents."""
    if not org_ids:
        raise PipelineError("organization registry is empty")
    index = {oid: i for i, oid in enumerate(org_ids)}
    g = UndirectedGraph(len(org_ids))
    for patent in period.patents:
        nodes = sorted(index[oid] for oid in patent.assignees)
        for u, v in combinations(nodes, 2):
            g.add_edge(u, v)
    return g


def _cooccurrence_graph(ke_sets: Sequence[frozenset[int]]) -> LabeledGraph:
    labels = tuple(sorted(set().union(*ke_sets))) if ke_sets else ()
    index = {label: i for i, label in enumerate(labels)}
    g = UndirectedGraph(len(labels))
    for kes in ke_sets:
        nodes = sorted(index[k] for k in kes)
        for u, v in combinations(nodes, 2):
            g.add_edge(u, v)
    return LabeledGraph(graph=g, labels=labels)


def build_global_knowledge_network(
    period: PeriodCorpus, terms_by_patent: Mapping[str, DocumentTerms]
) -> LabeledGraph:
    """Co-occurrence graph over all KEs present in the period's patents."""
    ke_sets = [terms_by_patent[p.patent_id].ke_ids for p in period.patents]
    return _cooccurrence_graph([s for s in ke_sets if s])


def build_local_knowledge_network(
    org_id: str,
    period: PeriodCorpus,
    terms_by_patent: Mapping[str, DocumentTerms],
) -> LabeledGraph:
    """Co-occurrence graph restricted to one organization's own patents."""
    ke_sets = [
        terms_by_patent[p.patent_id].ke_ids
        for p in period.patents
        if org_id in p.assignees
    ]
    return _cooccurrence_graph([s for s in ke_sets if s])


def build_period_networks(
    corpus: Corpus,
    periods: Sequence[PeriodCorpus],
    terms: Sequence[DocumentTerms],
    *,
    cumulative_collab: bool = False,
) -> list[PeriodNetworks]:
    """Construct all networks for every period."""
    org_ids = corpus.org_ids
    terms_by_patent = {t.patent_id: t for t in terms}
    nets: list[PeriodNetworks] = []
    running: UndirectedGraph | None = None
    for period in periods:
        collab = build_collab_network(period, org_ids)
        if cumulative_collab:
            if running is not None:
                for u, v, w in running.edges():
                    collab.add_edge(u, v, w)
            running = collab
        local = {
            oid: build_local_knowledge_network(oid, period, terms_by_patent)
            for oid in org_ids
        }
        nets.append(
            PeriodNetworks(
                period_index=period.period_index,
                org_ids=org_ids,
                collab=collab,
                global_k=build_global_knowledge_network(period, terms_by_patent),
                local_k=local,
            )
        )
    return nets


# ---------------------------------------------------------------------------
# Edge-list CSV dumps: one <period>_<kind>[_<org>].csv plus a _nodes.csv per
# network, under a networks/ directory.
# ---------------------------------------------------------------------------


def _write_graph_csv(
    directory: str, stem: str, graph: UndirectedGraph, labels: Sequence
) -> None:
    with open(os.path.join(directory, f"{stem}.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "weight"])
        writer.writerows(graph.edges())
    with open(os.path.join(directory, f"{stem}_nodes.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "label"])
        writer.writerows(enumerate(labels))


def write_period_networks(nets: Sequence[PeriodNetworks], directory) -> None:
    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    for net in nets:
        p = f"p{net.period_index}"
        _write_graph_csv(directory, f"{p}_collab", net.collab, net.org_ids)
        _write_graph_csv(
            directory, f"{p}_globalk", net.global_k.graph, net.global_k.labels
        )
        for oid, local in net.local_k.items():
            _write_graph_csv(directory, f"{p}_localk_{oid}", local.graph, local.labels)


def _read_graph_csv(directory: str, stem: str) -> tuple[UndirectedGraph, list[str]]:
    with open(os.path.join(directory, f"{stem}_nodes.csv"), newline="") as fh:
        rows = list(csv.DictReader(fh))
    labels = [r["label"] for r in rows]
    g = UndirectedGraph(len(labels))
    with open(os.path.join(directory, f"{stem}.csv"), newline="") as fh:
        for r in csv.DictReader(fh):
            g.add_edge(int(r["u"]), int(r["v"]), int(r["weight"]))
    return g, labels


def load_period_networks(directory) -> list[PeriodNetworks]:
    """Read back the dumps written by :func:`write_period_networks`."""
    directory = str(directory)
    indices = sorted(
        int(name[1 : -len("_collab.csv")])
        for name in os.listdir(directory)
        if name.startswith("p") and name.endswith("_collab.csv")
    )
    if not indices:
        raise PipelineError(f"no network dumps found in {directory}")
    nets = []
    for idx in indices:
        p = f"p{idx}"
        collab, org_ids = _read_graph_csv(directory, f"{p}_collab")
        gk_graph, gk_labels = _read_graph_csv(directory, f"{p}_globalk")
        local = {}
        prefix = f"{p}_localk_"
        for name in sorted(os.listdir(directory)):
            if name.startswith(prefix) and name.endswith("_nodes.csv"):
                oid = name[len(prefix) : -len("_nodes.csv")]
                lg, ll = _read_graph_csv(directory, f"{p}_localk_{oid}")
                local[oid] = LabeledGraph(lg, tuple(int(x) for x in ll))
        nets.append(
            PeriodNetworks(
                period_index=idx,
                org_ids=tuple(org_ids),
                collab=collab,
                global_k=LabeledGraph(gk_graph, tuple(int(x) for x in gk_labels)),
                local_k=local,
            )
        )
    return nets


def dump_graph_csv(graph: UndirectedGraph) -> str:
    """Edge list as CSV text (u,v,weight); used for ad-hoc exports."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["u", "v", "weight"])
    writer.writerows(graph.edges())
    return buf.getvalue()
