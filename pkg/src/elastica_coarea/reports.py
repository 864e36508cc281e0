"""Per-level energy reports shared by the energy-computing modules."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any

__all__ = ["LevelRow", "EnergyReport", "format_total"]


def format_total(value: float) -> str:
    """Totals are printed with 9 significant digits."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.9g}"


@dataclass(frozen=True)
class LevelRow:
    """Energy of one level (or one slab, arc, collar...).

    ``energy = alpha * length + beta * curvature_term``.
    """

    level: int
    t: float
    length: float
    curvature_term: float
    energy: float


@dataclass
class EnergyReport:
    """Per-level energies, a total, and diagnostic flags.

    Attributes
    ----------
    rows : list of LevelRow
    total : float
        Slab-width-weighted sum (or plain sum, depending on the producer).
    flags : dict
        Diagnostic flags (``bool`` values) and small scalar diagnostics.
    meta : dict
        Free-form, JSON-serialisable context (parameters, thresholds...).
    """

    rows: list = field(default_factory=list)
    total: float = 0.0
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    extra: Any = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "t", "length", "curvature_term", "energy"])
        for r in self.rows:
            w.writerow([r.level, repr(float(r.t)), repr(float(r.length)),
                        repr(float(r.curvature_term)), repr(float(r.energy))])
        w.writerow(["TOTAL", "", "", "", format_total(self.total)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EnergyReport":
        rows, total = [], 0.0
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != ["level", "t", "length", "curvature_term", "energy"]:
            from .errors import ValidationError
            raise ValidationError(f"EnergyReport CSV: unexpected header {header}")
        for rec in reader:
            if not rec:
                continue
            if rec[0] == "TOTAL":
                total = float(rec[4])
            else:
                rows.append(LevelRow(int(rec[0]), float(rec[1]), float(rec[2]),
                                     float(rec[3]), float(rec[4])))
        return cls(rows=rows, total=total)

    @property
    def energies(self) -> list:
        return [r.energy for r in self.rows]

    @property
    def thresholds(self) -> list:
        return [r.t for r in self.rows]
