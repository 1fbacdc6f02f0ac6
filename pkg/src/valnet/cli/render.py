"""Fixed-width text tables for marginal readouts."""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal

from ..calculi import MarginalReadout

PLACES = Decimal("0.001")


def fmt_value(x) -> str:
    """Three decimals, half-even; Booleans as true/false."""
    if isinstance(x, bool):
        return "true" if x else "false"
    # settle binary noise first so genuine ties round half-even
    d = Decimal(float(x)).quantize(Decimal("1e-12")).quantize(PLACES, rounding=ROUND_HALF_EVEN)
    if d.is_zero():
        d = abs(d)
    return str(d)


def render(readout: MarginalReadout, calculus: str | None = None) -> str:
    state = "normalized" if readout.normalized else "unnormalized"
    title = readout.variable.name + (f" [{calculus}, {state}]" if calculus else f" [{state}]")
    width = max([len("value")] + [len(label) for label, _ in readout.rows])
    cells = [[fmt_value(v) for v in row] for _, row in readout.rows]
    colw = [max([len(c)] + [len(r[i]) for r in cells] + [7]) for i, c in enumerate(readout.columns)]
    lines = [title, "  ".join(["value".ljust(width)] + [c.rjust(w) for c, w in zip(readout.columns, colw)])]
    for (label, _), row in zip(readout.rows, cells):
        lines.append("  ".join([label.ljust(width)] + [v.rjust(w) for v, w in zip(row, colw)]))
    if not readout.normalized:
        footer = []
        if readout.conflict is not None:
            footer.append(f"conflict {fmt_value(readout.conflict)}")
        if readout.total is not None:
            footer.append(f"total {fmt_value(readout.total)}")
        if footer:
            lines.append("  ".join(footer))
    if readout.degenerate:
        lines.append("warning: degenerate marginal (contradictory evidence)")
    return "\n".join(lines) + "\n"
