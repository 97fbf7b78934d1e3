"""Excel export for experiment summaries."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict

from ..harness.records import OUTCOMES

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    return "" if value is None else f"{100.0 * value:.2f}"


def export_summary_to_xlsx(
    summary: Dict,
    output_path: str | Path,
) -> Path:
    """
    Export a summary.json payload to an .xlsx file.

    One row per setting with mean, std and 95% CI (percent) per outcome, plus
    a second sheet with the pairwise p-values.
    """
    try:
        from openpyxl import Workbook
        from openpyxl.styles import Alignment, Font
    except Exception as e:  # pragma: no cover
        raise RuntimeError(
            "Missing dependency for Excel export. Install openpyxl:\n\n"
            "pip install openpyxl"
        ) from e

    out = Path(output_path).expanduser().resolve()
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() != ".xlsx":
        out = out.with_suffix(".xlsx")

    per_agent = summary.get("per_agent", {})

    wb = Workbook()
    ws = wb.active
    ws.title = "Outcomes"

    headers = ["Setting", "Group", "Agent", "Seeds"]
    for outcome in OUTCOMES:
        name = outcome.capitalize()
        headers += [f"{name} mean %", f"{name} std %", f"{name} CI low %", f"{name} CI high %"]
    ws.append(headers)

    header_font = Font(bold=True)
    for cell in ws[1]:
        cell.font = header_font
        cell.alignment = Alignment(wrap_text=True, vertical="top")

    for label, entry in per_agent.items():
        row = [label, entry.get("group", ""), entry.get("agent", ""), entry.get("n_seeds", 0)]
        for outcome in OUTCOMES:
            stats = entry[outcome]
            ci = stats.get("ci95") or (None, None)
            row += [_fmt(stats["mean"]), _fmt(stats.get("std")), _fmt(ci[0]), _fmt(ci[1])]
        ws.append(row)

    ws.column_dimensions["A"].width = 28
    ws.column_dimensions["B"].width = 16
    ws.freeze_panes = "B2"

    pvals = wb.create_sheet("P-values")
    pvals.append(["Pair"] + [f"{o.capitalize()} p" for o in OUTCOMES])
    for cell in pvals[1]:
        cell.font = header_font
    for pair, values in summary.get("pairwise_p_values", {}).items():
        pvals.append([pair] + ["" if values.get(o) is None else values[o] for o in OUTCOMES])
    pvals.column_dimensions["A"].width = 40

    wb.save(out)
    logger.debug(f"Excel summary written: {out} ({len(per_agent)} settings)")

    return out
