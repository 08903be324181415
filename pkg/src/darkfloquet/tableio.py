"""Small helpers for deterministic delimited-text output.

Floats are rendered with ``repr``, i.e. the shortest digit string that
round-trips, so re-running a computation yields byte-identical files.
"""

from __future__ import annotations

import os
from typing import Iterable, Sequence


def fmt(x) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(header, rows))
