"""Render estimation results as text tables, CSV, or JSON."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Mapping

from .estimate import EffectRow, EstimationResult, EstimationSettings


def render_text(result: EstimationResult) -> str:
    """Two-column table (Variable, Estimate with stars, SE) plus footer.

    The footer carries the overall maximum convergence ratio (4 decimals) and
    the parameter-setting note.
    """
    label_width = max(24, max(len(r.label) for r in result.rows) + 2)
    header = f"{'Variable':<{label_width}}{'Estimate':>14}{'SE':>10}"
    rule = "-" * len(header)
    lines = [header, rule]
    for row in result.rows:
        estimate = f"{row.estimate:.4f}{row.stars}"
        se = "n/a" if math.isnan(row.standard_error) else f"{row.standard_error:.3f}"
        lines.append(f"{row.label:<{label_width}}{estimate:>14}{se:>10}")
    lines.append(rule)
    lines.append("*** p < 0.01, ** p < 0.05, * p < 0.1. SE means Standard Error.")
    lines.append(
        f"Overall maximum convergence ratio is {result.overall_max_convergence_ratio:.4f}"
    )
    s = result.settings
    lines.append(f"Parameter setting: seed = {s.seed}, n_3 = {s.n3}, n_sub = {s.n_sub}")
    return "\n".join(lines) + "\n"


def render_csv(result: EstimationResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["variable", "estimate", "standard_error", "stars", "t_convergence"])
    for row in result.rows:
        writer.writerow(
            [row.label, row.estimate, row.standard_error, row.stars, row.t_convergence]
        )
    writer.writerow([])
    writer.writerow(
        ["overall_max_convergence_ratio", result.overall_max_convergence_ratio]
    )
    return buf.getvalue()


def render_json(result: EstimationResult, config_echo: Mapping | None = None) -> str:
    """Full machine-readable report; byte-stable for identical inputs."""
    payload = result.to_dict()
    if config_echo is not None:
        payload["config"] = dict(config_echo)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def result_from_json(text: str) -> tuple[EstimationResult, dict | None]:
    """Rebuild a result (plus any config echo) from a JSON report."""
    payload = json.loads(text)
    settings = EstimationSettings(**payload["settings"])
    rows = tuple(
        EffectRow(
            label=r["label"],
            kind=r["kind"],
            name=r["name"],
            estimate=r["estimate"],
            standard_error=(
                float("nan") if r["standard_error"] is None else r["standard_error"]
            ),
            t_convergence=r["t_convergence"],
            stars=r["stars"],
            is_rate=r["is_rate"],
            period=r["period"],
        )
        for r in payload["rows"]
    )
    result = EstimationResult(
        rows=rows,
        overall_max_convergence_ratio=payload["overall_max_convergence_ratio"],
        converged=payload["converged"],
        targets=tuple(payload["targets"]),
        settings=settings,
        n_actors=payload["n_actors"],
        n_waves=payload["n_waves"],
        warnings=tuple(payload["warnings"]),
        phase2_trace=tuple(tuple(t) for t in payload["phase2_trace"]),
    )
    return result, payload.get("config")
