import json
import math

from collabdyn.estimate import EffectRow, EstimationResult, EstimationSettings
from collabdyn.reporting import render_csv, render_json, render_text, result_from_json


def _result(ratio=0.1068):
    rows = (
        EffectRow("Rate period 1", "rate", "", 3.0534, 0.404, 0.02, "", True, 0),
        EffectRow("Rate period 2", "rate", "", 2.8015, 0.438, -0.01, "", True, 1),
        EffectRow(
            "Degree (density effect)", "density", "", -5.8416, 0.158, 0.03, "***", False
        ),
        EffectRow(
            "Cognitive proximity",
            "dyadic_covariate",
            "cognitive_proximity",
            2.7091,
            0.553,
            -0.04,
            "***",
            False,
        ),
    )
    return EstimationResult(
        rows=rows,
        overall_max_convergence_ratio=ratio,
        converged=True,
        targets=(10.0, 12.0, 44.0, 1.5),
        settings=EstimationSettings(seed=8, n3=3000, n_sub=5),
        n_actors=30,
        n_waves=3,
    )


def test_text_report_structure():
    text = render_text(_result())
    lines = text.splitlines()
    assert lines[0].split() == ["Variable", "Estimate", "SE"]
    assert any(line.startswith("Rate period 1") and "3.0534" in line for line in lines)
    assert any("-5.8416***" in line and "0.158" in line for line in lines)
    assert "Overall maximum convergence ratio is 0.1068" in lines
    assert "Parameter setting: seed = 8, n_3 = 3000, n_sub = 5" in lines
    assert "*** p < 0.01, ** p < 0.05, * p < 0.1. SE means Standard Error." in lines


def test_footer_ratio_formatted_to_four_decimals():
    text = render_text(_result(ratio=0.123456))
    assert "Overall maximum convergence ratio is 0.1235" in text


def test_csv_report():
    out = render_csv(_result())
    assert out.splitlines()[0] == "variable,estimate,standard_error,stars,t_convergence"
    assert "Degree (density effect),-5.8416,0.158,***,0.03" in out


def test_json_round_trip_with_config_echo():
    result = _result()
    payload = render_json(result, config_echo={"output_dir": "out", "seed": 8})
    parsed = json.loads(payload)
    assert parsed["config"]["output_dir"] == "out"
    back, echo = result_from_json(payload)
    assert back == result
    assert echo == {"output_dir": "out", "seed": 8}


def test_json_is_byte_stable():
    result = _result()
    assert render_json(result) == render_json(result)


def test_nan_standard_errors_render():
    rows = (
        EffectRow("Degree (density effect)", "density", "", -1.0, math.nan, 0.0, "", False),
    )
    result = EstimationResult(
        rows=rows,
        overall_max_convergence_ratio=0.0,
        converged=True,
        targets=(1.0,),
        settings=EstimationSettings(),
        n_actors=4,
        n_waves=2,
    )
    text = render_text(result)
    assert "n/a" in text
    back, _ = result_from_json(render_json(result))
    assert math.isnan(back.rows[0].standard_error)
