"""Deterministic report emitters: JSON, CSV and aligned text tables.

Output files never embed timestamps or other run-varying state; provenance
lives in each command's run report (resolved config + seed).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Mapping, Sequence, Union


def write_json(path: Union[str, Path], obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow(["" if x is None else x for x in row])


def format_cell(x: Any, ndigits: int = 4) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.{ndigits}f}"
    return str(x)


def aligned_table(
    header: Sequence[str], rows: Sequence[Sequence[Any]], ndigits: int = 4
) -> str:
    """Monospace table with columns padded to their widest cell."""
    cells = [[format_cell(x, ndigits) for x in row] for row in rows]
    widths = [len(h) for h in header]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(header))),
    ]
    for row in cells:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def write_text(path: Union[str, Path], text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def run_report(config_dict: Mapping[str, Any], **sections: Any) -> dict[str, Any]:
    """Skeleton for a command's run report: resolved config first, then the
    command-specific sections."""
    return {"config": dict(config_dict), **sections}
