import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from collabdyn.corpus import (
    OrgType,
    dump_corpus,
    filter_assignees,
    parse_corpus,
    split_periods,
)
from collabdyn.errors import ConfigError, CorpusError
from conftest import SMALL_CSV


def test_parse_small_csv():
    corpus = parse_corpus(SMALL_CSV)
    assert corpus.n_patents == 3
    assert len(corpus.organizations) == 4
    p1 = corpus.patents[0]
    assert p1.patent_id == "P1"
    assert len(p1.assignees) == 2
    acme = corpus.organizations[p1.assignees[0]]
    assert acme.name == "ACME CORP"
    assert acme.org_type is OrgType.FIRM


def test_parse_normalizes_names_before_id_assignment():
    csv_text = (
        "patent_id,title,abstract,year,assignees\n"
        'P1,T,Some abstract.,2003,"  acme   corp |firm"\n'
        'P2,T,Other abstract.,2004,"ACME CORP|firm"\n'
    )
    corpus = parse_corpus(csv_text)
    assert len(corpus.organizations) == 1
    org = next(iter(corpus.organizations.values()))
    assert org.name == "ACME CORP"


def test_missing_abstract_names_row():
    bad = SMALL_CSV.replace(
        "A polymer resist coating process for fine patterns.", ""
    )
    with pytest.raises(CorpusError, match="row 3.*abstract"):
        parse_corpus(bad)


def test_unknown_org_type_token():
    bad = SMALL_CSV.replace("HILLTOP INSTITUTE|academic", "HILLTOP INSTITUTE|gov")
    with pytest.raises(CorpusError, match="unknown organization type 'gov'"):
        parse_corpus(bad)


def test_org_type_conflict_is_error():
    bad = SMALL_CSV.replace(
        "P2,Laser module,A laser source and beam shaping unit for exposure.,2004,"
        "ACME CORP|firm;PHOTON WORKS|firm",
        "P2,Laser module,A laser source and beam shaping unit for exposure.,2004,"
        "ACME CORP|academic;PHOTON WORKS|firm",
    )
    with pytest.raises(CorpusError, match="ACME CORP"):
        parse_corpus(bad)


def test_duplicate_identical_rows_deduplicate():
    text = SMALL_CSV + SMALL_CSV.splitlines()[1] + "\n"
    corpus = parse_corpus(text)
    assert corpus.n_patents == 3


def test_duplicate_conflicting_rows_error():
    extra = SMALL_CSV.splitlines()[1].replace("2003", "2005")
    with pytest.raises(CorpusError, match="conflicting"):
        parse_corpus(SMALL_CSV + extra + "\n")


def test_heuristic_classifier_behind_flag():
    text = (
        "patent_id,title,abstract,year,assignees\n"
        "P1,T,An abstract.,2003,NORTH UNIVERSITY;ACME CORP\n"
    )
    with pytest.raises(CorpusError, match="missing organization type"):
        parse_corpus(text)
    corpus = parse_corpus(text, classify_unknown_org_types=True)
    types = {o.name: o.org_type for o in corpus.organizations.values()}
    assert types["NORTH UNIVERSITY"] is OrgType.ACADEMIC
    assert types["ACME CORP"] is OrgType.FIRM


def test_json_lines_round_trip_is_identity():
    corpus = parse_corpus(SMALL_CSV)
    dumped = dump_corpus(corpus)
    again = parse_corpus(dumped, "json-lines")
    assert again == corpus
    assert dump_corpus(again) == dumped


def test_json_lines_reports_bad_rows():
    with pytest.raises(CorpusError, match="row 1"):
        parse_corpus("{not json}", "json-lines")


def _patents_csv(rows):
    body = "".join(
        f"P{i},T,An abstract body.,{year},\"{';'.join(n + '|firm' for n in names)}\"\n"
        for i, (year, names) in enumerate(rows, start=1)
    )
    return "patent_id,title,abstract,year,assignees\n" + body


def test_filter_drops_org_without_collaboration():
    rows = [(2003, ["SOLO"]) for _ in range(5)] + [(2004, ["OTHER", "MATE"])] * 2
    corpus = parse_corpus(_patents_csv(rows))
    filtered = filter_assignees(corpus, 2, 1)
    names = {o.name for o in filtered.organizations.values()}
    assert "SOLO" not in names  # 5 patents but zero collaborations
    assert {"OTHER", "MATE"} <= names


def test_filter_drops_org_below_patent_minimum():
    rows = [(2003, ["ONE", "TWO"])] + [(2004, ["TWO"])] * 2
    corpus = parse_corpus(_patents_csv(rows))
    filtered = filter_assignees(corpus, 2, 1)
    names = {o.name for o in filtered.organizations.values()}
    assert names == {"TWO"}  # ONE has a collaboration but only 1 patent


def test_filter_drops_emptied_patents_and_keeps_ids():
    rows = [(2003, ["A", "B"]), (2004, ["A", "B"]), (2005, ["C"])]
    corpus = parse_corpus(_patents_csv(rows))
    filtered = filter_assignees(corpus, 1, 1)
    assert filtered.n_patents == 2  # C's solo patent emptied out
    assert set(filtered.organizations) <= set(corpus.organizations)


def test_filter_matches_brute_force_on_synthetic_registry():
    rows = [
        (2003, ["A", "B"]), (2003, ["A", "C"]), (2004, ["A"]), (2004, ["B"]),
        (2005, ["C", "D", "E"]), (2005, ["E"]), (2006, ["F"]), (2006, ["F"]),
        (2007, ["G", "H"]), (2007, ["H", "I"]), (2008, ["I", "J"]), (2008, ["J"]),
    ]
    corpus = parse_corpus(_patents_csv(rows))
    for min_patents, min_collab in [(1, 0), (1, 1), (2, 1), (2, 2), (3, 1)]:
        filtered = filter_assignees(corpus, min_patents, min_collab)
        got = {o.name for o in filtered.organizations.values()}
        expected = oracles.surviving_orgs(
            [names for _, names in rows], min_patents, min_collab
        )
        assert got == expected, (min_patents, min_collab)


def test_filter_precondition_validation():
    corpus = parse_corpus(SMALL_CSV)
    with pytest.raises(ConfigError):
        filter_assignees(corpus, 0, 0)
    with pytest.raises(ConfigError):
        filter_assignees(corpus, 1, -1)


@settings(max_examples=60, deadline=None)
@given(
    thresholds=st.tuples(st.integers(1, 4), st.integers(0, 3)),
    bump=st.tuples(st.integers(0, 2), st.integers(0, 2)),
)
def test_filter_monotonicity(thresholds, bump):
    rows = [
        (2003, ["A", "B"]), (2003, ["A", "C"]), (2004, ["A"]), (2004, ["B", "C"]),
        (2005, ["D"]), (2005, ["D", "E"]), (2006, ["E"]), (2006, ["F"]),
    ]
    corpus = parse_corpus(_patents_csv(rows))
    low = filter_assignees(corpus, thresholds[0], thresholds[1])
    high = filter_assignees(corpus, thresholds[0] + bump[0], thresholds[1] + bump[1])
    assert set(high.organizations) <= set(low.organizations)


def test_split_periods_partition():
    rows = [(2003 + i % 20, ["A", "B"]) for i in range(30)]
    corpus = parse_corpus(_patents_csv(rows))
    periods = split_periods(
        corpus, [(2003, 2007), (2008, 2012), (2013, 2017), (2018, 2022)]
    )
    assert len(periods) == 4
    assert sum(len(p.patents) for p in periods) == corpus.n_patents
    seen = [p.patent_id for period in periods for p in period.patents]
    assert len(seen) == len(set(seen))
    for period in periods:
        lo, hi = period.year_range
        assert all(lo <= p.year <= hi for p in period.patents)


def test_split_periods_rejects_overlap():
    corpus = parse_corpus(SMALL_CSV)
    with pytest.raises(CorpusError, match="overlap"):
        split_periods(corpus, [(2003, 2010), (2010, 2015)])


def test_split_periods_rejects_single_period():
    corpus = parse_corpus(SMALL_CSV)
    with pytest.raises(CorpusError, match="at least 2"):
        split_periods(corpus, [(2003, 2022)])


def test_split_periods_rejects_uncovered_year():
    corpus = parse_corpus(SMALL_CSV)  # years 2003, 2004, 2006
    with pytest.raises(CorpusError, match="P3"):
        split_periods(corpus, [(2003, 2003), (2004, 2005)])


def test_canonical_dump_is_json_lines(fixture_corpus_raw):
    dumped = dump_corpus(fixture_corpus_raw)
    lines = [ln for ln in dumped.splitlines() if ln]
    assert len(lines) == fixture_corpus_raw.n_patents
    rec = json.loads(lines[0])
    assert set(rec) == {"patent_id", "title", "abstract", "year", "assignees"}
