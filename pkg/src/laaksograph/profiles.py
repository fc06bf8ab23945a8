"""Doubling profiles: evaluation, admissibility, and the kernel-envelope transform.

A profile is either a pure power law r**a or a table of values anchored at
dyadic points r = 2**k with piecewise-linear interpolation in between and
geometric continuation (constant dyadic ratio) outside the anchored window.
The table flavor matches how the scale function of the constructions is
assembled from per-scale integer data, so anchored values are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

__all__ = [
    "DoublingProfile",
    "AdmissibilityReport",
    "check_admissible",
    "phi",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DoublingProfile:
    """Positive nondecreasing profile, evaluable at any r > 0.

    kind "power": value(r) = r**exponent.
    kind "table": values[i] anchors r = 2**(k_lo + i); linear between anchors,
    geometric beyond the window using the boundary dyadic ratio.
    """

    kind: str
    exponent: float = 0.0
    k_lo: int = 0
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "power":
            if not self.exponent > 0:
                raise ValueError("power-law exponent must be positive")
        elif self.kind == "table":
            if len(self.values) < 2:
                raise ValueError("table profile needs at least two anchors")
            if any(v <= 0 for v in self.values):
                raise ValueError("table anchors must be positive")
            for a, b in zip(self.values, self.values[1:]):
                if b < a:
                    raise ValueError("table anchors must be nondecreasing")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def power(cls, exponent: float) -> "DoublingProfile":
        return cls(kind="power", exponent=float(exponent))

    @classmethod
    def table(cls, k_lo: int, values) -> "DoublingProfile":
        return cls(kind="table", k_lo=int(k_lo), values=tuple(float(v) for v in values))

    # -- anchor access ------------------------------------------------------

    @property
    def k_hi(self) -> int:
        return self.k_lo + len(self.values) - 1

    def _ratio_lo(self) -> float:
        return self.values[1] / self.values[0]

    def _ratio_hi(self) -> float:
        return self.values[-1] / self.values[-2]

    def anchor(self, n: int) -> float:
        """Value at r = 2**n, extended geometrically outside the window."""
        if self.kind == "power":
            return math.pow(2.0, n * self.exponent)
        if n < self.k_lo:
            return self.values[0] / self._ratio_lo() ** (self.k_lo - n)
        if n > self.k_hi:
            return self.values[-1] * self._ratio_hi() ** (n - self.k_hi)
        return self.values[n - self.k_lo]

    # -- evaluation ---------------------------------------------------------

    def eval(self, r: float) -> float:
        """Evaluate at r > 0; exact at dyadic anchors."""
        if not r > 0:
            raise ValueError("profile arguments must be positive")
        if self.kind == "power":
            return math.pow(r, self.exponent)
        mant, exp = math.frexp(r)  # r = mant * 2**exp, mant in [0.5, 1)
        if mant == 0.5:
            return self.anchor(exp - 1)
        n = exp - 1
        lo, hi = self.anchor(n), self.anchor(n + 1)
        step = math.ldexp(1.0, n)
        return lo + (r - step) * (hi - lo) / step

    __call__ = eval

    def inverse(self, y: float) -> float:
        """Smallest r with eval(r) = y (profiles may have flat segments)."""
        if not y > 0:
            raise ValueError("inverse argument must be positive")
        if self.kind == "power":
            return math.pow(y, 1.0 / self.exponent)
        n = self.k_lo
        while self.anchor(n) > y:
            n -= 1
            if n < self.k_lo - 4096:
                raise ValueError("inverse argument below profile range")
        while self.anchor(n + 1) < y:
            n += 1
            if n > self.k_hi + 4096:
                raise ValueError("inverse argument above profile range")
        lo, hi = self.anchor(n), self.anchor(n + 1)
        step = math.ldexp(1.0, n)
        if y <= lo or hi == lo:
            return step
        return step + (y - lo) * step / (hi - lo)

    def doubling_constant(self, k_lo: int, k_hi: int) -> float:
        """max over k in [k_lo, k_hi-1] of eval(2^(k+1)) / eval(2^k)."""
        if not k_lo < k_hi:
            raise ValueError("need k_lo < k_hi")
        return max(self.anchor(k + 1) / self.anchor(k) for k in range(k_lo, k_hi))

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "exponent": self.exponent}
        return {"kind": "table", "k_lo": self.k_lo, "k_hi": self.k_hi, "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "DoublingProfile":
        if d["kind"] == "power":
            return cls.power(d["exponent"])
        return cls.table(d["k_lo"], d["values"])


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    best_constant: float
    witness: Optional[Tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "best_constant": self.best_constant,
            "witness": list(self.witness) if self.witness else None,
        }


def check_admissible(V: DoublingProfile, psi: DoublingProfile, C0: float,
                     k_lo: int, k_hi: int) -> AdmissibilityReport:
    """Test C0^-1 R^2/r^2 <= psi(R)/psi(r) <= C0 R V(R)/(r V(r)) on dyadic pairs.

    best_constant is the smallest C for which both inequalities hold on the
    grid r = 2^i <= R = 2^j, i, j in [k_lo, k_hi]; inadmissibility is a
    result, not an error.
    """
    if not k_lo < k_hi:
        raise ValueError("need k_lo < k_hi")
    best = 1.0
    worst_pair = None
    psi_vals = [psi.anchor(k) for k in range(k_lo, k_hi + 1)]
    rv_vals = [math.ldexp(1.0, k) * V.anchor(k) for k in range(k_lo, k_hi + 1)]
    for i in range(len(psi_vals)):
        for j in range(i, len(psi_vals)):
            ratio = psi_vals[j] / psi_vals[i]
            sq = math.ldexp(1.0, 2 * (j - i))  # (R/r)^2
            need = max(sq / ratio, ratio * rv_vals[i] / rv_vals[j])
            if need > best:
                best = need
                worst_pair = (math.ldexp(1.0, k_lo + i), math.ldexp(1.0, k_lo + j))
    ok = best <= C0 * (1.0 + 1e-12)
    return AdmissibilityReport(admissible=ok, best_constant=best,
                               witness=None if ok else worst_pair)


def _phi_objective(psi: DoublingProfile, s: float, r: float) -> float:
    return s / r - 1.0 / psi.eval(r)


@lru_cache(maxsize=1 << 18)
def phi(psi: DoublingProfile, s: float, r_min: float = 0.0) -> float:
    """Envelope transform sup_{r > r_min} (s/r - 1/psi(r)), clamped at 0.

    The supremum is located on a dyadic grid and sharpened by a golden-section
    pass on the bracketing interval; for r_min = 1 this is the discrete
    variant sup over r >= 1.
    """
    if s < 0:
        raise ValueError("phi argument must be nonnegative")
    if s == 0.0:
        return 0.0
    if psi.kind == "table":
        ks = range(psi.k_lo - 48, psi.k_hi + 49)
    else:
        ks = range(-64, 65)
    k_floor = None
    if r_min > 0:
        k_floor = math.ceil(math.log2(r_min))
        ks = [k for k in ks if k >= k_floor]
        if not ks:
            ks = [k_floor]
    best_k = None
    best_val = -math.inf
    for k in ks:
        val = _phi_objective(psi, s, math.ldexp(1.0, k))
        if val > best_val:
            best_val, best_k = val, k
    # refinement pass: fine geometric scan two octaves around the best dyadic
    # point (the table objective has kinks at the anchors, so a single
    # bracket is not unimodal), then a golden-section polish of the winner
    lo = math.ldexp(1.0, best_k - 2)
    hi = math.ldexp(1.0, best_k + 2)
    if r_min > 0:
        lo = max(lo, r_min)
    if hi <= lo:
        return max(0.0, _phi_objective(psi, s, lo))
    npts = 128
    lr_lo, lr_hi = math.log(lo), math.log(hi)
    grid = [math.exp(lr_lo + (lr_hi - lr_lo) * i / npts) for i in range(npts + 1)]
    fvals = [_phi_objective(psi, s, r) for r in grid]
    j = max(range(npts + 1), key=fvals.__getitem__)
    a = grid[max(0, j - 1)]
    b = grid[min(npts, j + 1)]
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = _phi_objective(psi, s, x1)
    f2 = _phi_objective(psi, s, x2)
    for _ in range(60):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = _phi_objective(psi, s, x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = _phi_objective(psi, s, x2)
    return max(0.0, best_val, fvals[j], f1, f2)
