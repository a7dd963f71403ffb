"""Command-line pipeline: ingest -> extract -> build -> stats -> estimate.

Each stage reads its inputs from the output directory of the previous stage
and writes stable file names, so `collabdyn run` is byte-identical to running
the five stage subcommands in sequence.  Stage failures exit with code 2 and
a stage-tagged message on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import corpus as corpus_mod
from . import keextract, netbuild, netstats, reporting
from .config import ENV_CONFIG_PATH, PipelineConfig, load_config
from .errors import PipelineError
from .estimate import MomentEstimator
from .saom import CovariateSet, EffectSpec, ModelSpec

STAGES = ("ingest", "extract", "build", "stats", "estimate")

CORPUS_DUMP = "corpus.jsonl"
VOCABULARY_DUMP = "vocabulary.jsonl"
TERMS_DUMP = "document_terms.jsonl"
NETWORKS_DIR = "networks"
COVARIATES_CSV = "covariates.csv"
REPORT_JSON = "estimation_report.json"
REPORT_TEXT = "report.txt"

# effect-list covariate names -> (covariate table column, centered?)
_MONADIC_SOURCES = {name: True for name in netstats.CONTINUOUS_COVARIATES}
_MONADIC_SOURCES["org_type"] = False  # binary, used raw
_DYADIC_SOURCES = ("cognitive_proximity", "organizational_proximity")


def _out(config: PipelineConfig, *parts: str) -> str:
    return os.path.join(config.output_dir, *parts)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def stage_ingest(config: PipelineConfig) -> str:
    """Parse, validate, and filter the corpus; write the canonical dump."""
    corpus = corpus_mod.load_corpus(
        config.corpus_path,
        config.corpus_format,
        classify_unknown_org_types=config.classify_unknown_org_types,
    )
    corpus = corpus_mod.filter_assignees(
        corpus, config.min_patents, config.min_collaborations
    )
    corpus_mod.split_periods(corpus, config.periods)  # fail early on coverage
    path = _out(config, CORPUS_DUMP)
    _write(path, corpus_mod.dump_corpus(corpus))
    print(
        f"[ingest] wrote {path} ({corpus.n_patents} patents, "
        f"{len(corpus.organizations)} organizations)",
        file=sys.stderr,
    )
    return path


def _load_canonical_corpus(config: PipelineConfig) -> corpus_mod.Corpus:
    path = _out(config, CORPUS_DUMP)
    if not os.path.exists(path):
        raise PipelineError(f"missing {path}; run the ingest stage first")
    return corpus_mod.parse_corpus(_read(path), "json-lines")


def stage_extract(config: PipelineConfig) -> tuple[str, str]:
    """Build the knowledge-element vocabulary and per-patent term sets."""
    corpus = _load_canonical_corpus(config)
    extractor = None
    if config.extractor == "external":
        phrases = keextract.load_external_phrases(config.phrases_path)
        extractor = keextract.external_extractor(phrases)
    vocab, terms = keextract.build_vocabulary(
        corpus,
        extractor=extractor,
        tfidf_threshold=config.tfidf_threshold,
        aggregate=config.score_aggregation,
        merge_order_variants=config.merge_word_order_variants,
    )
    vocab_path = _out(config, VOCABULARY_DUMP)
    terms_path = _out(config, TERMS_DUMP)
    _write(vocab_path, keextract.dump_vocabulary(vocab))
    _write(terms_path, keextract.dump_document_terms(terms))
    print(f"[extract] wrote {vocab_path} ({len(vocab)} knowledge elements)", file=sys.stderr)
    return vocab_path, terms_path


def _load_terms(config: PipelineConfig) -> list[keextract.DocumentTerms]:
    path = _out(config, TERMS_DUMP)
    if not os.path.exists(path):
        raise PipelineError(f"missing {path}; run the extract stage first")
    return keextract.load_document_terms(_read(path))


def stage_build(config: PipelineConfig) -> str:
    """Construct collaboration and knowledge networks for every period."""
    corpus = _load_canonical_corpus(config)
    terms = _load_terms(config)
    periods = corpus_mod.split_periods(corpus, config.periods)
    nets = netbuild.build_period_networks(
        corpus, periods, terms, cumulative_collab=config.cumulative_collab
    )
    directory = _out(config, NETWORKS_DIR)
    netbuild.write_period_networks(nets, directory)
    print(f"[build] wrote {directory} ({len(nets)} periods)", file=sys.stderr)
    return directory


def stage_stats(config: PipelineConfig) -> str:
    """Compute covariate tables and proximity matrices."""
    corpus = _load_canonical_corpus(config)
    terms = _load_terms(config)
    vocab = keextract.load_vocabulary(_read(_out(config, VOCABULARY_DUMP)))
    periods = corpus_mod.split_periods(corpus, config.periods)
    nets = netbuild.load_period_networks(_out(config, NETWORKS_DIR))
    table, prox = netstats.build_covariate_tables(
        corpus,
        periods,
        nets,
        terms,
        vocab,
        diversity_definition=config.diversity_definition,
        uniqueness_definition=config.uniqueness_definition,
        louvain_seed=config.louvain_seed,
        freeze_at_first_period=config.freeze_covariates_at_first_period,
    )
    cov_path = _out(config, COVARIATES_CSV)
    _write(cov_path, netstats.dump_covariates_csv(table))
    netstats.write_proximities(prox, config.output_dir)
    print(f"[stats] wrote {cov_path}", file=sys.stderr)
    return cov_path


def _effects_from_config(config: PipelineConfig) -> tuple[EffectSpec, ...]:
    effects = []
    for raw in config.effects:
        kind = raw.get("kind")
        if kind == "rate":
            raise PipelineError(
                "rate effects are implicit (one per transition); remove them "
                "from the effect list"
            )
        effects.append(EffectSpec(kind=kind, name=raw.get("name", "")))
    return tuple(effects)


def _covariate_set(
    config: PipelineConfig,
    table: netstats.CovariateTable,
    prox: netstats.ProximityMatrices,
    n_transitions: int,
) -> CovariateSet:
    """Wave-start covariate values per transition (centered where continuous)."""
    monadic = {}
    for name, use_centered in _MONADIC_SOURCES.items():
        source = table.centered[name] if use_centered else table.raw[name]
        monadic[name] = source[:n_transitions]
    dyadic = {
        "cognitive_proximity": prox.cognitive_centered[:n_transitions],
        "organizational_proximity": prox.organizational[:n_transitions],
    }
    return CovariateSet(monadic=monadic, dyadic=dyadic)


def stage_estimate(config: PipelineConfig) -> str:
    """Fit the actor-oriented model to the collaboration waves."""
    nets = netbuild.load_period_networks(_out(config, NETWORKS_DIR))
    cov_path = _out(config, COVARIATES_CSV)
    if not os.path.exists(cov_path):
        raise PipelineError(f"missing {cov_path}; run the stats stage first")
    table = netstats.load_covariates_csv(_read(cov_path))
    prox = netstats.load_proximities(config.output_dir)

    waves = [net.collab.adjacency_matrix() for net in nets]
    n_transitions = len(waves) - 1
    effects = _effects_from_config(config)
    model = ModelSpec(
        n_actors=len(nets[0].org_ids),
        effects=effects,
        rates=tuple([1.0] * n_transitions),  # placeholders; estimation re-initializes
        covariates=_covariate_set(config, table, prox, n_transitions),
    )
    settings = config.estimation_settings()
    result = MomentEstimator(waves, model, settings).run()

    json_path = _out(config, REPORT_JSON)
    _write(json_path, reporting.render_json(result, config_echo=config.to_dict()))
    _write(_out(config, REPORT_TEXT), reporting.render_text(result))
    status = "converged" if result.converged else "NOT converged"
    print(
        f"[estimate] wrote {json_path} (overall max convergence ratio "
        f"{result.overall_max_convergence_ratio:.4f}, {status})",
        file=sys.stderr,
    )
    return json_path


def run_pipeline(config: PipelineConfig) -> str:
    """All stages in order; returns the JSON report path."""
    stage_ingest(config)
    stage_extract(config)
    stage_build(config)
    stage_stats(config)
    return stage_estimate(config)


def cmd_report(args, config: PipelineConfig | None) -> int:
    path = args.input
    if path is None:
        if config is None:
            print("[report] need --input or --config", file=sys.stderr)
            return 2
        path = _out(config, REPORT_JSON)
    if not os.path.exists(path):
        print(f"[report] report not found: {path}", file=sys.stderr)
        return 2
    result, echo = reporting.result_from_json(_read(path))
    if args.format == "text":
        rendered = reporting.render_text(result)
    elif args.format == "csv":
        rendered = reporting.render_csv(result)
    else:
        rendered = reporting.render_json(result, config_echo=echo)
    if args.output:
        _write(args.output, rendered)
    else:
        sys.stdout.write(rendered)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collabdyn",
        description="Collaboration-network dynamics pipeline",
    )
    parser.add_argument(
        "--config",
        default=os.environ.get(ENV_CONFIG_PATH),
        help=f"config file path (default: ${ENV_CONFIG_PATH})",
    )
    parser.add_argument("--seed", type=int, help="override the estimation seed")
    parser.add_argument("--workers", type=int, help="override the worker count")
    parser.add_argument("--out", help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES + ("run",):
        sub.add_parser(stage, help=f"run the {stage} stage" if stage != "run" else "run the full pipeline")
    report = sub.add_parser("report", help="re-render an estimation report")
    report.add_argument("--format", choices=("text", "json", "csv"), default="text")
    report.add_argument("--input", help="report JSON path (default: <out>/estimation_report.json)")
    report.add_argument("--output", help="write here instead of stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["output_dir"] = args.out

    config = None
    if args.config:
        try:
            config = load_config(args.config, overrides)
        except PipelineError as exc:
            print(f"[config] {exc}", file=sys.stderr)
            return 2

    if args.command == "report":
        return cmd_report(args, config)
    if config is None:
        print(f"[config] no config given (flag --config or ${ENV_CONFIG_PATH})", file=sys.stderr)
        return 2

    stage_fns = {
        "ingest": stage_ingest,
        "extract": stage_extract,
        "build": stage_build,
        "stats": stage_stats,
        "estimate": stage_estimate,
        "run": run_pipeline,
    }
    stage = args.command
    try:
        stage_fns[stage](config)
    except PipelineError as exc:
        # tag the failing stage even inside the full run
        tag = stage if stage != "run" else _failing_stage(exc, config)
        print(f"[{tag}] {exc}", file=sys.stderr)
        return 2
    return 0


def _failing_stage(exc: PipelineError, config: PipelineConfig) -> str:
    """Best-effort stage attribution for failures inside the full run."""
    if not os.path.exists(_out(config, CORPUS_DUMP)):
        return "ingest"
    if not os.path.exists(_out(config, VOCABULARY_DUMP)):
        return "extract"
    if not os.path.exists(_out(config, NETWORKS_DIR)):
        return "build"
    if not os.path.exists(_out(config, COVARIATES_CSV)):
        return "stats"
    return "estimate"


if __name__ == "__main__":
    sys.exit(main())
