"""Closed-form Toffoli cost predictions and the comparator-vs-arcsine
comparison table.

The arcsine circuit costs are imported constants: the lowest published
Toffoli counts for a reversible fixed-point arcsine at the three operand
widths where they are known. Everything else is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

# width -> Toffoli count of the cheapest known reversible arcsine circuit
ARCSINE_TOFFOLI = MappingProxyType({17: 4872, 23: 7784, 30: 11264})


@dataclass(frozen=True)
class CostModel:
    """Inputs for the leading-term cost formulas.

    norm_l1 and norm_l2 are norms of the quantized coefficient vector
    scaled by 2^-n, i.e. of the coefficients the pipeline actually
    prepares.
    """

    n: int
    d: int
    norm_l1: float
    norm_l2: float
    arcsine_toffoli_table: MappingProxyType = field(
        default=ARCSINE_TOFFOLI, repr=False)

    @classmethod
    def from_code(cls, code, d: int) -> "CostModel":
        """Build from a FixedPointCode (real or polar form)."""
        scale = 1.0 / (1 << code.n)
        mags = [m * scale for m in code.magnitudes()]
        return cls(n=code.n, d=d,
                   norm_l1=float(sum(mags)),
                   norm_l2=math.sqrt(sum(m * m for m in mags)))


def predicted_total_toffoli(model: CostModel, problem: str = "linear") -> float:
    """Leading-term Toffoli total for a comparator-based run.

    linear: (pi/2) n sqrt(d) / ||alpha||_2  -- one n-Toffoli comparison per
    preparation-map application, about (pi/2) / theta of them.
    root:   (pi/2) n sqrt(d / ||alpha||_1).

    Only the leading term is returned; the O(1) (linear) and O(n log 1/eps)
    (root, uniform-reset schedule) corrections are reported by callers from
    measured tallies, never folded in here.
    """
    if problem == "linear":
        if model.norm_l2 <= 0:
            raise ValueError("linear prediction needs a nonzero 2-norm")
        return (math.pi / 2) * model.n * math.sqrt(model.d) / model.norm_l2
    if problem == "root":
        if model.norm_l1 <= 0:
            raise ValueError("root prediction needs a nonzero 1-norm")
        return (math.pi / 2) * model.n * math.sqrt(model.d / model.norm_l1)
    raise ValueError(f"unknown problem {problem!r}")


def improvement_table() -> tuple[tuple[int, int, int], ...]:
    """Rows (n, arcsine_toffolis, factor) at the published widths.

    The first column doubles as the comparator cost per invocation (the
    comparison costs exactly n Toffolis), and factor = floor(arcsine / n):
    how many comparisons fit in one arcsine evaluation. Floor rounding
    reproduces all three published factors.
    """
    rows = []
    for n in sorted(ARCSINE_TOFFOLI):
        arcsine = ARCSINE_TOFFOLI[n]
        rows.append((n, arcsine, arcsine // n))
    return tuple(rows)
