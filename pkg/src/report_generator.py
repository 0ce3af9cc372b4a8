"""Report generation for evaluated curves, scalar results and verification runs.

Supports CSV and JSON (default) for curves and records, and an HTML summary
for verification reports.
"""

import html
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.mc import SampleBatch
from src.params import Curve, EvalConfig, ModelParams
from src.verify import VerifyReport

FORMATS = ("csv", "json")


def _num(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return "%.17g" % x


def annotation(params: ModelParams, config: EvalConfig, extra: Optional[Mapping[str, Any]] = None) -> str:
    """
    One-line `key=value` description of a run.

    Example:
        >>> annotation(ModelParams(2, 4, 1.5), EvalConfig())[:30]
        'n=2 m=4 alpha=2 mu=1.5 rel_tol'
    """
    items = dict(params.describe())
    items.update(config.as_dict())
    if extra:
        items.update(extra)
    items["config_hash"] = config.config_hash()
    return " ".join(f"{k}={v}" for k, v in items.items())


def curve_to_csv(curve: Curve, params: ModelParams, config: EvalConfig) -> str:
    """
    Curve as CSV: a `#` annotation line, the `x,value` header, one row per point.
    """
    lines = [f"# {annotation(params, config, curve.meta)}", "x,value"]
    lines.extend(f"{_num(x)},{_num(y)}" for x, y in zip(curve.grid, curve.values))
    return "\n".join(lines) + "\n"


def curve_to_dict(curve: Curve, params: ModelParams, config: EvalConfig) -> Dict[str, Any]:
    """Curve as one JSON-ready object with params, config, grid and values."""
    return {
        "params": params.describe(),
        "config": config.as_dict(),
        "config_hash": config.config_hash(),
        "meta": dict(curve.meta),
        "grid": list(curve.grid),
        "values": list(curve.values),
    }


def record_to_dict(
    quantity: str, value: Any, params: Optional[ModelParams], config: EvalConfig, inputs: Mapping[str, Any]
) -> Dict[str, Any]:
    """A single computed value with everything needed to reproduce it."""
    return {
        "quantity": quantity,
        "params": params.describe() if params is not None else None,
        "inputs": dict(inputs),
        "config": config.as_dict(),
        "config_hash": config.config_hash(),
        "value": value,
    }


def record_to_csv(record: Mapping[str, Any]) -> str:
    """Record as CSV: annotation line, `quantity,value` header and one row."""
    parts = [f"quantity={record['quantity']}"]
    if record.get("params"):
        parts.extend(f"{k}={v}" for k, v in record["params"].items())
    parts.extend(f"{k}={v}" for k, v in record["inputs"].items())
    parts.append(f"config_hash={record['config_hash']}")
    value = record["value"]
    text = _num(value) if isinstance(value, float) else str(value)
    return f"# {' '.join(parts)}\nquantity,value\n{record['quantity']},{text}\n"


def samples_to_csv(batch: SampleBatch, config: EvalConfig) -> str:
    """One row per draw: `draw,lambda_1,...,lambda_n`, annotated with the seed."""
    mc = batch.config
    extra = {"samples": mc.samples, "seed": mc.seed, "streams": mc.streams, "rotated_mean": mc.rotated_mean}
    header = ",".join(["draw"] + [f"lambda_{j}" for j in range(1, batch.params.n + 1)])
    lines = [f"# {annotation(batch.params, config, extra)}", header]
    for idx, row in enumerate(batch.eig_rows):
        lines.append(",".join([str(idx)] + [_num(float(x)) for x in row]))
    return "\n".join(lines) + "\n"


def to_json(payload: Mapping[str, Any], pretty: bool = True) -> str:
    return json.dumps(payload, indent=2 if pretty else None, ensure_ascii=False) + "\n"


def write_text(text: str, output_path: str) -> None:
    """
    Write text to a file, creating parent directories.

    Raises:
        IOError: If the file cannot be written
    """
    try:
        output_file = Path(output_path)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        output_file.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IOError(f"Failed to write report: {e}")


def generate_html_report(report: VerifyReport, output_path: str) -> None:
    """
    Generate an HTML verification report with pass/fail badges per check.

    Args:
        report: Result of verify.run_suite
        output_path: Path to save the HTML file
    """
    data = report.to_dict()
    status = "PASS" if data["passed"] else "FAIL"
    status_class = "status-pass" if data["passed"] else "status-fail"
    params_rows = "".join(
        f"<tr><td>{html.escape(str(k))}</td><td><code>{html.escape(str(v))}</code></td></tr>"
        for k, v in {**data["params"], **data["mc"], "config_hash": data["config_hash"]}.items()
    )

    page = f"""<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>Verification Report - {html.escape(data['suite'])}</title>
    <style>
        body {{ font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; margin: 20px; background: #f5f5f5; }}
        h1 {{ color: #333; }}
        .summary {{ background: white; padding: 20px; border-radius: 8px; margin-bottom: 20px; box-shadow: 0 2px 4px rgba(0,0,0,0.1); }}
        .check-card {{ background: white; padding: 20px; margin-bottom: 20px; border-radius: 8px; box-shadow: 0 2px 4px rgba(0,0,0,0.1); }}
        .status-pass {{ color: #28a745; font-weight: bold; }}
        .status-fail {{ color: #dc3545; font-weight: bold; }}
        .badge {{ padding: 5px 10px; border-radius: 4px; font-size: 12px; font-weight: bold; }}
        .badge-pass {{ background: #28a745; color: white; }}
        .badge-fail {{ background: #dc3545; color: white; }}
        table {{ width: 100%; border-collapse: collapse; margin: 15px 0; }}
        th, td {{ padding: 12px; text-align: left; border-bottom: 1px solid #ddd; }}
        th {{ background: #f8f9fa; font-weight: 600; }}
        code {{ background: #f4f4f4; padding: 2px 6px; border-radius: 3px; font-family: 'Courier New', monospace; }}
    </style>
</head>
<body>
    <h1>Verification Report</h1>

    <div class="summary">
        <h2>Suite {html.escape(data['suite'])} <span class="{status_class}">{status}</span></h2>
        <table>
            <tr><th>Setting</th><th>Value</th></tr>
            {params_rows}
        </table>
    </div>
"""
    for check in data["checks"]:
        page += _check_card_html(check)
    page += """
</body>
</html>
"""
    write_text(page, output_path)


def _check_card_html(check: Mapping[str, Any]) -> str:
    passed = check["passed"]
    rows = "".join(
        f"<tr><td>{html.escape(str(k))}</td><td>{_num(float(v))}</td></tr>" for k, v in check["details"].items()
    )
    return f"""
    <div class="check-card">
        <h3>{html.escape(check['name'])}
            <span class="badge badge-{'pass' if passed else 'fail'}">{'PASS' if passed else 'FAIL'}</span>
        </h3>
        <table>
            <tr><th>Property</th><th>Value</th></tr>
            <tr><td>Statistic</td><td><strong>{_num(check['statistic'])}</strong></td></tr>
            <tr><td>Threshold</td><td>{_num(check['threshold'])}</td></tr>
            {rows}
        </table>
    </div>
"""
