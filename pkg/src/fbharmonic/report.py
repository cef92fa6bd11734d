"""Residual reports shared by the curve, surface and submersion checks."""

from dataclasses import dataclass, field

import numpy as np

PASS = "PASS"
FAIL = "FAIL"
IMPOSSIBLE = "IMPOSSIBLE"
MINIMAL = "MINIMAL"


@dataclass
class ResidualReport:
    """Sup-norm residuals of a set of equations over a grid.

    ``residuals`` maps equation label to sup-norm; ``fields`` optionally
    keeps the pointwise residual arrays for export. ``status`` defaults to
    PASS/FAIL from the sup-norms; the nonexistence probes override it.
    """

    name: str
    residuals: dict
    tol: float
    grid: str = ""
    flags: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict, repr=False)
    status: str = ""

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        self.residuals = {k: float(v) for k, v in self.residuals.items()}
        if not self.status:
            self.status = PASS if self.verdict else FAIL

    @property
    def verdict(self):
        return all(v < self.tol for v in self.residuals.values())

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    def format(self):
        lines = [f"{self.name}  [{self.grid}]  tol={self.tol:.3g}"]
        for k, v in self.residuals.items():
            lines.append(f"  {k:<28s} {v:12.4e}")
        for k, v in self.extra.items():
            val = f"{v:12.4e}" if isinstance(v, (float, np.floating)) else f"{v!s:>12}"
            lines.append(f"  {k:<28s} {val}")
        for fl in self.flags:
            lines.append(f"  note: {fl}")
        lines.append(f"  verdict: {self.status}")
        return "\n".join(lines)


def sup(a, sl=slice(None)):
    a = np.asarray(a)
    return float(np.max(np.abs(a[sl]))) if a[sl].size else 0.0
