"""Knowledge-element extraction: candidate phrases, merging, TF-IDF, filtering.

The default extractor is a deterministic n-gram rule (n = 2, 3, 4) over
sentence-segmented, lowercased, punctuation-stripped text: a gram is kept
unless it starts or ends with a stopword or contains a purely numeric token.
Externally produced phrase lists (e.g. from an offline LLM run) can be
plugged in via :func:`external_extractor`; they pass through the same
normalization, merging, and TF-IDF filtering.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import Corpus, PatentRecord
from .errors import ConfigError, VocabularyError
from .textnorm import STOPWORDS, normalize_phrase, sentence_tokens

NGRAM_SIZES = (2, 3, 4)

# Paper-default corpus threshold: elements scoring below it are removed.
DEFAULT_TFIDF_THRESHOLD = 0.001


@dataclass(frozen=True)
class KnowledgeElement:
    ke_id: int
    canonical: str
    surface_forms: tuple[str, ...]  # original phrases, sorted
    tfidf: float
    doc_freq: int


@dataclass(frozen=True)
class DocumentTerms:
    patent_id: str
    counts: Mapping[int, int]  # ke_id -> occurrences in title+abstract

    @property
    def ke_ids(self) -> frozenset[int]:
        return frozenset(self.counts)


@dataclass(frozen=True)
class Vocabulary:
    elements: tuple[KnowledgeElement, ...]  # index == ke_id
    n_docs: int

    def __len__(self) -> int:
        return len(self.elements)

    def idf(self, ke_id: int) -> float:
        return math.log(self.n_docs / self.elements[ke_id].doc_freq)

    @property
    def by_canonical(self) -> dict[str, int]:
        return {e.canonical: e.ke_id for e in self.elements}


def extract_candidates(text: str) -> list[str]:
    """All 2/3/4-grams whose edges are non-stopwords and tokens non-numeric.

    Grams never span sentence boundaries.  Enumeration order is by gram size,
    then sentence, then position; duplicates are kept (they carry term
    frequency).
    """
    sentences = sentence_tokens(text)
    grams: list[str] = []
    for n in NGRAM_SIZES:
        for tokens in sentences:
            for i in range(len(tokens) - n + 1):
                window = tokens[i : i + n]
                if window[0] in STOPWORDS or window[-1] in STOPWORDS:
                    continue
                if any(t.isdigit() for t in window):
                    continue
                grams.append(" ".join(window))
    return grams


def normalize(phrase: str) -> str:
    """Canonical stemmed form of one phrase (idempotent, deterministic)."""
    return normalize_phrase(phrase)


def merge_similar(
    phrases: Iterable[str], *, order_variants: bool = True
) -> dict[str, frozenset[str]]:
    """Group canonical phrases; returns representative -> member phrases.

    Identical canonical forms always merge.  With ``order_variants`` the
    second pass also merges phrases whose token multisets are equal (word
    order variants).  The representative is the lexicographically smallest
    member of each group.
    """
    unique = sorted(set(phrases))
    groups: list[set[str]]
    if order_variants:
        by_multiset: dict[tuple[str, ...], set[str]] = {}
        for c in unique:
            by_multiset.setdefault(tuple(sorted(c.split())), set()).add(c)
        groups = list(by_multiset.values())
    else:
        groups = [{c} for c in unique]
    return {min(g): frozenset(g) for g in groups}


def compute_tfidf(
    doc_counts: Sequence[Mapping[str, int]], *, aggregate: str = "max"
) -> dict[str, float]:
    """Corpus-level TF-IDF score per element.

    Per document, tf(e, d) = count(e in d) / total gram occurrences in d and
    idf(e) = ln(N / df(e)).  The corpus score aggregates tf*idf over the
    documents containing the element: ``max`` (default) or ``mean``.
    """
    if not doc_counts:
        raise VocabularyError("TF-IDF needs at least one document")
    if aggregate not in ("max", "mean"):
        raise ConfigError(f"unknown TF-IDF aggregation '{aggregate}'")
    n_docs = len(doc_counts)
    df: Counter[str] = Counter()
    for counts in doc_counts:
        df.update(counts.keys())

    per_element: dict[str, list[float]] = {e: [] for e in df}
    for counts in doc_counts:
        total = sum(counts.values())
        for element, count in counts.items():
            tf = count / total
            per_element[element].append(tf * math.log(n_docs / df[element]))
    if aggregate == "max":
        return {e: max(vals) for e, vals in per_element.items()}
    return {e: sum(vals) / len(vals) for e, vals in per_element.items()}


def threshold_filter(
    scores: Mapping[str, float], threshold: float = DEFAULT_TFIDF_THRESHOLD
) -> list[str]:
    """Canonical forms scoring at least ``threshold``, in ke_id order.

    Dense ke_ids are assigned lexicographically over the retained canonical
    forms, so the returned list index is the ke_id.
    """
    if threshold < 0:
        raise ConfigError("TF-IDF threshold must be >= 0")
    retained = sorted(e for e, s in scores.items() if s >= threshold)
    if not retained:
        raise VocabularyError(
            f"no knowledge elements scored >= {threshold}; lower the threshold"
        )
    return retained


def external_extractor(
    phrases_by_patent: Mapping[str, Sequence[str]],
) -> Callable[[PatentRecord], list[str]]:
    """Extractor backed by an externally produced patent_id -> phrases map.

    Patents absent from the map yield no candidates.
    """

    def extract(patent: PatentRecord) -> list[str]:
        return list(phrases_by_patent.get(patent.patent_id, ()))

    return extract


def load_external_phrases(path) -> dict[str, list[str]]:
    """Read a JSON-lines file of {"patent_id": ..., "phrases": [...]}."""
    mapping: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate((ln for ln in fh if ln.strip()), start=1):
            rec = json.loads(line)
            if "patent_id" not in rec or "phrases" not in rec:
                raise VocabularyError(
                    f"phrase file row {i}: need 'patent_id' and 'phrases'"
                )
            mapping[str(rec["patent_id"])] = [str(p) for p in rec["phrases"]]
    return mapping


def build_vocabulary(
    corpus: Corpus,
    *,
    extractor: Callable[[PatentRecord], list[str]] | None = None,
    tfidf_threshold: float = DEFAULT_TFIDF_THRESHOLD,
    aggregate: str = "max",
    merge_order_variants: bool = True,
) -> tuple[Vocabulary, list[DocumentTerms]]:
    """Run extract -> normalize -> merge -> TF-IDF -> filter over a corpus.

    Returns the retained vocabulary and one DocumentTerms per patent (in
    corpus order, possibly empty).  Canonical phrases outside 2-4 tokens are
    discarded, which only matters for external extractors; the built-in rule
    cannot produce them.
    """
    if corpus.n_patents == 0:
        raise VocabularyError("cannot build a vocabulary from an empty corpus")
    extract = extractor or (lambda patent: extract_candidates(patent.text))

    doc_canonical: list[Counter[str]] = []
    surfaces: dict[str, set[str]] = {}
    for patent in corpus.patents:
        counts: Counter[str] = Counter()
        for phrase in extract(patent):
            canonical = normalize(phrase)
            if not 2 <= len(canonical.split()) <= 4:
                continue
            counts[canonical] += 1
            surfaces.setdefault(canonical, set()).add(phrase)
        doc_canonical.append(counts)

    groups = merge_similar(
        (c for counts in doc_canonical for c in counts),
        order_variants=merge_order_variants,
    )
    rep_of = {member: rep for rep, members in groups.items() for member in members}

    doc_reps: list[Counter[str]] = []
    for counts in doc_canonical:
        merged: Counter[str] = Counter()
        for canonical, count in counts.items():
            merged[rep_of[canonical]] += count
        doc_reps.append(merged)

    scores = compute_tfidf(doc_reps, aggregate=aggregate)
    retained = threshold_filter(scores, tfidf_threshold)
    ke_id_of = {rep: i for i, rep in enumerate(retained)}

    doc_freq = Counter(rep for counts in doc_reps for rep in counts)
    elements = tuple(
        KnowledgeElement(
            ke_id=i,
            canonical=rep,
            surface_forms=tuple(
                sorted(s for member in groups[rep] for s in surfaces[member])
            ),
            tfidf=scores[rep],
            doc_freq=doc_freq[rep],
        )
        for i, rep in enumerate(retained)
    )
    vocabulary = Vocabulary(elements=elements, n_docs=corpus.n_patents)

    terms = [
        DocumentTerms(
            patent_id=patent.patent_id,
            counts={
                ke_id_of[rep]: count
                for rep, count in doc_reps[idx].items()
                if rep in ke_id_of
            },
        )
        for idx, patent in enumerate(corpus.patents)
    ]
    return vocabulary, terms


# ---------------------------------------------------------------------------
# JSON-lines dumps
# ---------------------------------------------------------------------------


def dump_vocabulary(vocab: Vocabulary) -> str:
    lines = [json.dumps({"n_docs": vocab.n_docs}, sort_keys=True)]
    for e in vocab.elements:
        lines.append(
            json.dumps(
                {
                    "ke_id": e.ke_id,
                    "canonical": e.canonical,
                    "surface_forms": list(e.surface_forms),
                    "tfidf": e.tfidf,
                    "doc_freq": e.doc_freq,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


def load_vocabulary(text: str) -> Vocabulary:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise VocabularyError("empty vocabulary dump")
    header = json.loads(lines[0])
    elements = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        elements.append(
            KnowledgeElement(
                ke_id=int(rec["ke_id"]),
                canonical=rec["canonical"],
                surface_forms=tuple(rec["surface_forms"]),
                tfidf=float(rec["tfidf"]),
                doc_freq=int(rec["doc_freq"]),
            )
        )
    elements.sort(key=lambda e: e.ke_id)
    return Vocabulary(elements=tuple(elements), n_docs=int(header["n_docs"]))


def dump_document_terms(terms: Sequence[DocumentTerms]) -> str:
    lines = []
    for t in terms:
        lines.append(
            json.dumps(
                {
                    "patent_id": t.patent_id,
                    "counts": sorted([k, v] for k, v in t.counts.items()),
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def load_document_terms(text: str) -> list[DocumentTerms]:
    terms = []
    for ln in (ln for ln in text.splitlines() if ln.strip()):
        rec = json.loads(ln)
        terms.append(
            DocumentTerms(
                patent_id=rec["patent_id"],
                counts={int(k): int(v) for k, v in rec["counts"]},
            )
        )
    return terms
