"""Corpus ingestion: parsing, validation, assignee filtering, period partitioning.

Two input formats are supported.  CSV needs the header columns
``patent_id,title,abstract,year,assignees`` where ``assignees`` holds
semicolon-separated ``name|type`` pairs.  JSON-lines needs the same fields per
line, with ``assignees`` as a list of ``{"name": ..., "type": ...}`` objects.
The canonical dump written by :func:`dump_corpus` is JSON-lines and parses back
to an identical :class:`Corpus`.
"""

from __future__ import annotations

import enum
import io
import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .errors import ConfigError, CorpusError

REQUIRED_FIELDS = ("patent_id", "title", "abstract", "year", "assignees")

# Substrings (on the normalized, uppercased name) that mark an organization as
# academic when the optional heuristic classifier is enabled.
ACADEMIC_NAME_MARKERS = ("UNIV", "INST", "COLL")


class OrgType(str, enum.Enum):
    FIRM = "firm"
    ACADEMIC = "academic"


@dataclass(frozen=True)
class Organization:
    org_id: str
    name: str
    org_type: OrgType


@dataclass(frozen=True)
class PatentRecord:
    patent_id: str
    title: str
    abstract: str
    year: int
    assignees: tuple[str, ...]  # org ids, first-seen order, duplicates collapsed

    @property
    def text(self) -> str:
        """Title and abstract joined for phrase extraction."""
        if self.title.strip():
            return f"{self.title}. {self.abstract}"
        return self.abstract


@dataclass(frozen=True)
class Corpus:
    patents: tuple[PatentRecord, ...]
    organizations: Mapping[str, Organization]  # org_id -> Organization, stable order

    @property
    def n_patents(self) -> int:
        return len(self.patents)

    @property
    def org_ids(self) -> tuple[str, ...]:
        return tuple(self.organizations)


@dataclass(frozen=True)
class PeriodCorpus:
    period_index: int
    year_range: tuple[int, int]  # inclusive
    patents: tuple[PatentRecord, ...]


def normalize_assignee_name(name: str) -> str:
    """Trim, uppercase, and collapse internal whitespace."""
    return " ".join(name.split()).upper()


def _classify_by_name(name: str) -> OrgType:
    if any(marker in name for marker in ACADEMIC_NAME_MARKERS):
        return OrgType.ACADEMIC
    return OrgType.FIRM


def _parse_org_type(token: str, name: str, row: int, heuristic: bool) -> OrgType:
    token = token.strip().lower()
    if not token:
        if heuristic:
            return _classify_by_name(name)
        raise CorpusError(f"row {row}: missing organization type for '{name}'")
    try:
        return OrgType(token)
    except ValueError:
        raise CorpusError(
            f"row {row}: unknown organization type '{token}' for '{name}' "
            f"(expected 'firm' or 'academic')"
        ) from None


def _split_assignee_field(field: str, row: int) -> list[tuple[str, str]]:
    pairs = []
    for chunk in field.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, sep, type_token = chunk.partition("|")
        if not name.strip():
            raise CorpusError(f"row {row}: assignee entry with empty name")
        pairs.append((name, type_token if sep else ""))
    return pairs


def _decode(source) -> str:
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"corpus is not valid UTF-8: {exc}") from exc
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return _decode(data)
    return data


def _iter_csv_rows(text: str):
    import csv

    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CorpusError("empty CSV input")
    missing = [c for c in REQUIRED_FIELDS if c not in reader.fieldnames]
    if missing:
        raise CorpusError(f"CSV header missing columns: {', '.join(missing)}")
    for i, rec in enumerate(reader, start=1):
        if rec.get(None) is not None:
            raise CorpusError(f"row {i}: too many columns")
        yield i, {k: (rec.get(k) or "") for k in REQUIRED_FIELDS}, rec


def _iter_jsonl_rows(text: str):
    for i, line in enumerate(
        (ln for ln in text.splitlines() if ln.strip()), start=1
    ):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"row {i}: invalid JSON ({exc.msg})") from exc
        if not isinstance(rec, dict):
            raise CorpusError(f"row {i}: expected a JSON object")
        yield i, rec


def parse_corpus(
    source,
    format: str = "csv",
    *,
    classify_unknown_org_types: bool = False,
) -> Corpus:
    """Parse a corpus from CSV or JSON-lines content.

    ``source`` may be a str, bytes, or a file-like object.  Patent records with
    identical fields are deduplicated; a repeated ``patent_id`` with differing
    fields is an error.  Assignee names are trimmed and case-normalized before
    organization ids are assigned (first-appearance order).
    """
    text = _decode(source)
    if format == "csv":
        rows = ((i, rec) for i, rec, _ in _iter_csv_rows(text))
        assignee_parser = _split_assignee_field
    elif format in ("json-lines", "jsonl"):
        rows = _iter_jsonl_rows(text)

        def assignee_parser(field, row):
            if not isinstance(field, list):
                raise CorpusError(f"row {row}: 'assignees' must be a list")
            pairs = []
            for entry in field:
                if not isinstance(entry, dict) or "name" not in entry:
                    raise CorpusError(f"row {row}: assignee entries need a 'name'")
                pairs.append((str(entry["name"]), str(entry.get("type", ""))))
            return pairs

    else:
        raise ConfigError(f"unknown corpus format '{format}'")

    org_types: dict[str, OrgType] = {}  # normalized name -> type
    org_order: list[str] = []
    seen: dict[str, tuple] = {}  # patent_id -> canonical field tuple
    patents_raw: list[tuple[str, str, str, int, tuple[str, ...]]] = []

    for row, rec in rows:
        for field in ("patent_id", "abstract", "year", "assignees"):
            value = rec.get(field)
            if value is None or (isinstance(value, str) and not value.strip()):
                raise CorpusError(f"row {row}: missing {field}")
        patent_id = str(rec["patent_id"]).strip()
        title = str(rec.get("title") or "").strip()
        abstract = str(rec["abstract"]).strip()
        try:
            year = int(rec["year"])
        except (TypeError, ValueError):
            raise CorpusError(f"row {row}: year '{rec['year']}' is not an integer") from None

        pairs = assignee_parser(rec["assignees"], row)
        if not pairs:
            raise CorpusError(f"row {row}: patent '{patent_id}' has no assignees")
        names: list[str] = []
        for raw_name, type_token in pairs:
            name = normalize_assignee_name(raw_name)
            org_type = _parse_org_type(type_token, name, row, classify_unknown_org_types)
            known = org_types.get(name)
            if known is None:
                org_types[name] = org_type
                org_order.append(name)
            elif known is not org_type:
                raise CorpusError(
                    f"row {row}: organization '{name}' declared as "
                    f"'{org_type.value}' but previously '{known.value}'"
                )
            if name not in names:
                names.append(name)

        canonical = (patent_id, title, abstract, year, tuple(names))
        previous = seen.get(patent_id)
        if previous is None:
            seen[patent_id] = canonical
            patents_raw.append(canonical)
        elif previous != canonical:
            raise CorpusError(
                f"row {row}: duplicate patent_id '{patent_id}' with conflicting fields"
            )

    org_ids = {name: f"O{i + 1:04d}" for i, name in enumerate(org_order)}
    organizations = {
        org_ids[name]: Organization(org_ids[name], name, org_types[name])
        for name in org_order
    }
    patents = tuple(
        PatentRecord(pid, title, abstract, year, tuple(org_ids[n] for n in names))
        for pid, title, abstract, year, names in patents_raw
    )
    return Corpus(patents=patents, organizations=organizations)


def load_corpus(path, format: str | None = None, **kwargs) -> Corpus:
    """Read a corpus file, inferring the format from the suffix if not given."""
    import os

    if not os.path.exists(path):
        raise CorpusError(f"corpus file not found: {path}")
    if format is None:
        format = "json-lines" if str(path).endswith((".jsonl", ".ndjson")) else "csv"
    with open(path, "rb") as fh:
        return parse_corpus(fh, format, **kwargs)


def dump_corpus(corpus: Corpus) -> str:
    """Serialize to canonical JSON-lines (round-trips through parse_corpus)."""
    lines = []
    for p in corpus.patents:
        assignees = [
            {
                "org_id": oid,
                "name": corpus.organizations[oid].name,
                "type": corpus.organizations[oid].org_type.value,
            }
            for oid in p.assignees
        ]
        lines.append(
            json.dumps(
                {
                    "patent_id": p.patent_id,
                    "title": p.title,
                    "abstract": p.abstract,
                    "year": p.year,
                    "assignees": assignees,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def filter_assignees(corpus: Corpus, min_patents: int, min_collaborations: int) -> Corpus:
    """Keep organizations with enough granted patents and co-assigned patents.

    Both counts are taken over the unfiltered corpus in a single pass (no
    fixpoint iteration after removals).  A collaboration is a patent the
    organization shares with at least one other organization.  Patents whose
    assignee list becomes empty are dropped; surviving organizations keep
    their ids.
    """
    if min_patents < 1:
        raise ConfigError("min_patents must be >= 1")
    if min_collaborations < 0:
        raise ConfigError("min_collaborations must be >= 0")

    n_patents: dict[str, int] = {}
    n_collab: dict[str, int] = {}
    for p in corpus.patents:
        shared = len(p.assignees) >= 2
        for oid in p.assignees:
            n_patents[oid] = n_patents.get(oid, 0) + 1
            if shared:
                n_collab[oid] = n_collab.get(oid, 0) + 1

    survivors = {
        oid
        for oid in corpus.organizations
        if n_patents.get(oid, 0) >= min_patents
        and n_collab.get(oid, 0) >= min_collaborations
    }
    patents = []
    for p in corpus.patents:
        kept = tuple(oid for oid in p.assignees if oid in survivors)
        if kept:
            patents.append(replace(p, assignees=kept))
    organizations = {
        oid: org for oid, org in corpus.organizations.items() if oid in survivors
    }
    return Corpus(patents=tuple(patents), organizations=organizations)


def split_periods(
    corpus: Corpus, boundaries: Iterable[tuple[int, int]]
) -> list[PeriodCorpus]:
    """Partition patents into ordered, disjoint year ranges (inclusive).

    Every patent year must fall in exactly one range, and at least two
    periods are required (network dynamics need two observation waves).
    """
    ranges = [(int(a), int(b)) for a, b in boundaries]
    if len(ranges) < 2:
        raise CorpusError("at least 2 periods are required to model dynamics")
    for start, end in ranges:
        if start > end:
            raise CorpusError(f"invalid period range [{start}, {end}]")
    for (s0, e0), (s1, e1) in zip(ranges, ranges[1:]):
        if s1 <= e0:
            raise CorpusError(
                f"period ranges [{s0}, {e0}] and [{s1}, {e1}] overlap or are unordered"
            )

    buckets: list[list[PatentRecord]] = [[] for _ in ranges]
    for p in corpus.patents:
        for i, (start, end) in enumerate(ranges):
            if start <= p.year <= end:
                buckets[i].append(p)
                break
        else:
            raise CorpusError(
                f"patent '{p.patent_id}' year {p.year} falls outside all periods"
            )
    return [
        PeriodCorpus(period_index=i, year_range=ranges[i], patents=tuple(bucket))
        for i, bucket in enumerate(buckets)
    ]
