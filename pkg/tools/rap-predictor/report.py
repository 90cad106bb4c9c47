import html
import logging
from pathlib import Path
from typing import Dict, Optional

import pandas as pd
from constants import DEFAULT_COMPONENT_BITS, METHOD_DISPLAY_NAMES
from experiments import SWEEP_METHODS, SweepConfig, SweepResult
from selector import estimate_compression_factor

LOG = logging.getLogger(__name__)


def get_html_template(title: str = "RAP Predictor Report") -> str:
    return f"""
    <html>
    <head>
        <meta charset="UTF-8">
        <title>{html.escape(title)}</title>
        <style>
          body {{
              font-family: Arial, sans-serif;
              margin: 0;
              padding: 20px;
              background-color: #f4f4f4;
          }}
          .container {{
              max-width: 960px;
              margin: auto;
              background: white;
              padding: 20px;
              box-shadow: 0 0 10px rgba(0, 0, 0, 0.1);
              overflow-x: auto;
          }}
          h1 {{
              text-align: center;
              color: #333;
          }}
          h2 {{
              border-bottom: 2px solid #4CAF50;
              color: #4CAF50;
              padding-bottom: 5px;
          }}
          table {{
              border-collapse: collapse;
              margin: 20px 0;
              width: 100%;
          }}
          table, th, td {{
              border: 1px solid #ddd;
          }}
          th, td {{
              padding: 8px;
              text-align: center;
          }}
          th {{
              background-color: #4CAF50;
              color: white;
          }}
          td.best {{
              font-weight: bold;
          }}
        </style>
    </head>
    <body>
    <div class="container">
    """


def get_html_closing() -> str:
    return """
    </div>
    </body>
    </html>
    """


def dict_to_html_table(values: Dict) -> str:
    """Two-column key/value table."""
    rows = [
        f"<tr><th>{html.escape(str(key))}</th><td>{html.escape(str(value))}</td></tr>"
        for key, value in values.items()
    ]
    return f"<table>{''.join(rows)}</table>"


def compression_factor_frame(result: SweepResult, bits: int = DEFAULT_COMPONENT_BITS) -> pd.DataFrame:
    """
    Estimated compressed/original size per ratio and method.

    Sweep sequences are normalized to mean magnitude 1, so the mean residual
    magnitude is directly the amplitude ratio.
    """
    data = {"ratio": list(result.ratios)}
    for method in SWEEP_METHODS:
        data[method] = [
            estimate_compression_factor(value, bits) if value > 0 else 1.0 / bits
            for value in result.means[method]
        ]
    return pd.DataFrame(data)


def _frame_to_html(frame: pd.DataFrame, precision: int) -> str:
    header = "".join(
        f"<th>{html.escape(METHOD_DISPLAY_NAMES.get(col, col))}</th>" for col in frame.columns
    )
    rows = []
    for _, row in frame.iterrows():
        values = [row[m] for m in SWEEP_METHODS]
        best = min(values)
        cells = [f"<td>{row['ratio']:.2f}</td>"]
        for method in SWEEP_METHODS:
            css = " class='best'" if row[method] == best else ""
            cells.append(f"<td{css}>{row[method]:.{precision}f}</td>")
        rows.append(f"<tr>{''.join(cells)}</tr>")
    return f"<table><tr>{header}</tr>{''.join(rows)}</table>"


def build_sweep_report(
    result: SweepResult,
    cfg: Optional[SweepConfig] = None,
    bits: int = DEFAULT_COMPONENT_BITS,
) -> str:
    parts = [get_html_template(), "<h1>Residual Magnitude Sweep</h1>"]
    if cfg is not None:
        parts += ["<h2>Configuration</h2>", dict_to_html_table(cfg.to_dict())]
    parts += [
        "<h2>Mean residual magnitude</h2>",
        _frame_to_html(result.to_frame(), precision=4),
        f"<h2>Estimated compression factor ({bits} bits per component)</h2>",
        _frame_to_html(compression_factor_frame(result, bits), precision=3),
        get_html_closing(),
    ]
    return "".join(parts)


def write_sweep_report(path, result: SweepResult, cfg: Optional[SweepConfig] = None) -> None:
    try:
        Path(path).write_text(build_sweep_report(result, cfg), encoding="utf-8")
    except OSError as e:
        LOG.error(f"Failed to write HTML report: {e}")
        raise
    LOG.info("Wrote HTML report to %s", path)
