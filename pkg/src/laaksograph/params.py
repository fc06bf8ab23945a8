"""Per-scale integer parameter functions and fitting them from target profiles.

The branching function b controls the tree (escape-time profile
psi_b(r) = r * V_b(r)); the gluing function g controls how many tree copies
are identified at each wormhole level (extra volume factor V_g).  Graph mode
pins b(k) = 2 and g(k) = 1 for k <= 0, which turns the construction into an
ordinary infinite graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

from .profiles import DoublingProfile, check_admissible

__all__ = [
    "BranchingFunction",
    "GluingFunction",
    "FitResult",
    "NotAdmissibleError",
    "TargetOutOfRangeError",
    "v_from_counts",
    "psi_b",
    "volume_law",
    "fit_params",
    "validate",
]


class NotAdmissibleError(ValueError):
    """Target profile pair fails the admissibility grid check."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"profile pair not admissible: best constant {report.best_constant:.6g}, "
            f"witness {report.witness}")


class TargetOutOfRangeError(ValueError):
    """Greedy tracking error exceeded its stated bound (B_max/G_max too small)."""


@dataclass(frozen=True)
class _ScaleFunction:
    """Integer-valued function of the scale index k, constant off the window."""

    k_lo: int
    k_hi: int
    values: Tuple[int, ...]
    below: int
    above: int
    graph_mode: bool = True

    def __post_init__(self):
        if len(self.values) != self.k_hi - self.k_lo + 1:
            raise ValueError("values length must match window")

    def __call__(self, k: int) -> int:
        if self.graph_mode and k <= 0:
            return self._graph_floor()
        if k < self.k_lo:
            return self.below
        if k > self.k_hi:
            return self.above
        return self.values[k - self.k_lo]

    def _graph_floor(self) -> int:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "k_lo": self.k_lo,
            "k_hi": self.k_hi,
            "values": list(self.values),
            "below": self.below,
            "above": self.above,
            "graph_mode": self.graph_mode,
        }


class BranchingFunction(_ScaleFunction):
    """Branching degrees b(k) >= 2; graph mode forces b(k) = 2 for k <= 0."""

    def __init__(self, values, k_lo: int = 1, below: int = 2, above=None,
                 graph_mode: bool = True):
        values = tuple(int(v) for v in values)
        if above is None:
            above = values[-1] if values else 2
        super().__init__(k_lo=int(k_lo), k_hi=int(k_lo) + len(values) - 1,
                         values=values, below=int(below), above=int(above),
                         graph_mode=graph_mode)

    def _graph_floor(self) -> int:
        return 2

    @classmethod
    def constant(cls, value: int, k_hi: int = 64) -> "BranchingFunction":
        return cls(values=(int(value),) * k_hi, k_lo=1)

    @classmethod
    def from_dict(cls, d: dict) -> "BranchingFunction":
        return cls(values=d["values"], k_lo=d["k_lo"], below=d.get("below", 2),
                   above=d.get("above"), graph_mode=d.get("graph_mode", True))


class GluingFunction(_ScaleFunction):
    """Gluing multiplicities g(k) >= 1; graph mode forces g(k) = 1 for k <= 0."""

    def __init__(self, values, k_lo: int = 1, below: int = 1, above=None,
                 graph_mode: bool = True):
        values = tuple(int(v) for v in values)
        if above is None:
            above = values[-1] if values else 1
        super().__init__(k_lo=int(k_lo), k_hi=int(k_lo) + len(values) - 1,
                         values=values, below=int(below), above=int(above),
                         graph_mode=graph_mode)

    def _graph_floor(self) -> int:
        return 1

    @classmethod
    def constant(cls, value: int, k_hi: int = 64) -> "GluingFunction":
        return cls(values=(int(value),) * k_hi, k_lo=1)

    @classmethod
    def from_dict(cls, d: dict) -> "GluingFunction":
        return cls(values=d["values"], k_lo=d["k_lo"], below=d.get("below", 1),
                   above=d.get("above"), graph_mode=d.get("graph_mode", True))


def validate(b: BranchingFunction, g: GluingFunction, graph_mode: bool = True) -> List[str]:
    """Return the list of invariant violations (empty iff valid)."""
    violations = []
    for k in range(b.k_lo, b.k_hi + 1):
        if b.values[k - b.k_lo] < 2:
            violations.append(f"branching range violation at k={k}: b(k)={b.values[k - b.k_lo]} < 2")
    if b.below < 2:
        violations.append(f"branching range violation below window: {b.below} < 2")
    if b.above < 2:
        violations.append(f"branching range violation above window: {b.above} < 2")
    for k in range(g.k_lo, g.k_hi + 1):
        if g.values[k - g.k_lo] < 1:
            violations.append(f"gluing range violation at k={k}: g(k)={g.values[k - g.k_lo]} < 1")
    if g.below < 1:
        violations.append(f"gluing range violation below window: {g.below} < 1")
    if g.above < 1:
        violations.append(f"gluing range violation above window: {g.above} < 1")
    if graph_mode:
        for k in range(min(b.k_lo, 0), 1):
            if b(k) != 2:
                violations.append(f"graph-mode violation at k={k}: b(k)={b(k)} != 2")
        for k in range(min(g.k_lo, 0), 1):
            if g(k) != 1:
                violations.append(f"graph-mode violation at k={k}: g(k)={g(k)} != 1")
    return violations


def _count_anchor(f, n: int) -> float:
    """Ball-measure anchor at r = 2**n for a parameter function f.

    (prod_{n<=k<=0} f(k))^{-1} for n <= 0, 1 at n = 1, prod_{k=1}^{n-1} f(k)
    for n >= 2; integer products, one final division.
    """
    if n <= 0:
        prod = 1
        for k in range(n, 1):
            prod *= f(k)
        return 1.0 / prod
    prod = 1
    for k in range(1, n):
        prod *= f(k)
    return float(prod)


def v_from_counts(f, n_lo=None, n_hi=None) -> DoublingProfile:
    """Dyadic-table volume profile V_f of a branching or gluing function."""
    if n_lo is None:
        n_lo = min(f.k_lo, 0) - 2
    if n_hi is None:
        n_hi = f.k_hi + 2
    return DoublingProfile.table(n_lo, [_count_anchor(f, n) for n in range(n_lo, n_hi + 1)])


def psi_b(b: BranchingFunction, n_lo=None, n_hi=None) -> DoublingProfile:
    """Escape-time profile with anchors psi_b(2^n) = 2^n * V_b(2^n)."""
    if n_lo is None:
        n_lo = min(b.k_lo, 0) - 2
    if n_hi is None:
        n_hi = b.k_hi + 2
    return DoublingProfile.table(
        n_lo, [math.ldexp(_count_anchor(b, n), n) for n in range(n_lo, n_hi + 1)])


def volume_law(g: GluingFunction, b: BranchingFunction, n_lo=None, n_hi=None) -> DoublingProfile:
    """Graph volume profile V_g * V_b as a dyadic table."""
    if n_lo is None:
        n_lo = min(b.k_lo, g.k_lo, 0) - 2
    if n_hi is None:
        n_hi = max(b.k_hi, g.k_hi) + 2
    return DoublingProfile.table(
        n_lo, [_count_anchor(g, n) * _count_anchor(b, n) for n in range(n_lo, n_hi + 1)])


@dataclass(frozen=True)
class FitResult:
    b: BranchingFunction
    g: GluingFunction
    psi_log_error: float
    vol_log_error: float
    psi_offset: float
    vol_offset: float

    def to_dict(self) -> dict:
        return {
            "b": self.b.to_dict(),
            "g": self.g.to_dict(),
            "psi_log_error": self.psi_log_error,
            "vol_log_error": self.vol_log_error,
            "psi_offset": self.psi_offset,
            "vol_offset": self.vol_offset,
        }


def fit_params(V: DoublingProfile, psi: DoublingProfile, k_max: int,
               B_max: int = 8, G_max: int = 8, C0: float = 4.0) -> FitResult:
    """Greedy multiplicative tracking of (V, psi) by integer (b, g).

    For n = 1..k_max pick b(n) in [2, B_max] minimizing the accumulated
    |log psi_b(2^{n+1}) - log psi(2^{n+1})| (growth measured from the r = 2
    anchor on both sides, since the construction only promises comparability
    up to a constant), then pick g(n) in [1, G_max] the same way against
    V_g*V_b versus V.  Ties break toward the smaller integer.  The reported
    errors are the achieved max deviations; the normalization offsets at
    r = 2 are reported separately.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    report = check_admissible(V, psi, C0, 0, k_max)
    if not report.admissible:
        raise NotAdmissibleError(report)

    psi_base = math.log(psi.anchor(1))
    cum = 0.0  # log(psi_b(2^n) / 2) after choices so far
    b_vals: List[int] = []
    psi_err = 0.0
    for n in range(1, k_max + 1):
        target = math.log(psi.anchor(n + 1)) - psi_base
        best_bb, best_err = None, None
        for bb in range(2, B_max + 1):
            err = abs(cum + math.log(2.0 * bb) - target)
            if best_err is None or err < best_err - 1e-15:
                best_bb, best_err = bb, err
        b_vals.append(best_bb)
        cum += math.log(2.0 * best_bb)
        psi_err = max(psi_err, abs(cum - target))

    vol_base = math.log(V.anchor(1))
    cum_v = 0.0  # log(V_g V_b(2^n)) after choices (both factors are 1 at n=1)
    g_vals: List[int] = []
    vol_err = 0.0
    for n in range(1, k_max + 1):
        target = math.log(V.anchor(n + 1)) - vol_base
        step_b = math.log(b_vals[n - 1])
        best_gg, best_err = None, None
        for gg in range(1, G_max + 1):
            err = abs(cum_v + step_b + math.log(gg) - target)
            if best_err is None or err < best_err - 1e-15:
                best_gg, best_err = gg, err
        g_vals.append(best_gg)
        cum_v += step_b + math.log(best_gg)
        vol_err = max(vol_err, abs(cum_v - target))

    psi_bound = math.log(2.0 * B_max) + math.log(psi.doubling_constant(0, k_max + 1))
    vol_bound = math.log(float(G_max)) + math.log(V.doubling_constant(0, k_max + 1)) \
        + math.log(2.0 * B_max)
    if psi_err > psi_bound:
        raise TargetOutOfRangeError(
            f"psi tracking error {psi_err:.4g} exceeds bound {psi_bound:.4g}; raise B_max")
    if vol_err > vol_bound:
        raise TargetOutOfRangeError(
            f"volume tracking error {vol_err:.4g} exceeds bound {vol_bound:.4g}; raise G_max")

    b = BranchingFunction(b_vals, k_lo=1)
    g = GluingFunction(g_vals, k_lo=1)
    return FitResult(b=b, g=g, psi_log_error=psi_err, vol_log_error=vol_err,
                     psi_offset=psi_base - math.log(2.0), vol_offset=vol_base)
