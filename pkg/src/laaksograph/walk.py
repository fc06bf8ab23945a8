"""Simple-random-walk observables on a Laakso-type graph.

Heat kernels are computed by exact sparse propagation of the step
distribution (Monte Carlo cannot resolve the small probabilities the lower
bounds involve); exit times both exactly (conjugate gradients plus iterative
refinement with exactly evaluated residuals, which lands bit-exactly on
integer-valued solutions) and by Monte Carlo with counter-based per-chunk
random streams so that results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix, diags
from scipy.sparse.linalg import cg

from .laakso import BallSystem, LaaksoGraph, Vertex, build_ball_system

__all__ = [
    "RandomStream",
    "HeatKernelRecord",
    "ExitTimeRecord",
    "NoConvergenceError",
    "step_distribution",
    "heat_kernel",
    "propagate",
    "exact_mean_exit_time",
    "simulate_exit_time",
    "green_partial",
    "green_series",
    "GreenSeries",
]

MC_CHUNK = 256  # trials per random stream; fixed so results are worker-independent


class NoConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RandomStream:
    """Counter-based splittable stream: (seed, stream_index) pins the sequence."""

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.seed & (2**64 - 1),
                                                          self.stream_index & (2**64 - 1)]))

    def shifted(self, offset: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_index + offset)


@dataclass(frozen=True)
class HeatKernelRecord:
    n: int
    x: Vertex
    y: Vertex
    p_n: float
    p_n_plus_1: float


@dataclass(frozen=True)
class ExitTimeRecord:
    center: Vertex
    radius: int
    mean: float
    half_width: float
    trials: int


def step_distribution(graph: LaaksoGraph, dist: Dict[Vertex, float]) -> Dict[Vertex, float]:
    """One step of the simple random walk: d'(y) = sum_{x ~ y} d(x)/deg(x)."""
    out: Dict[Vertex, float] = {}
    for x, mass in dist.items():
        nbrs = graph.neighbors(x)
        share = mass / len(nbrs)
        for y in nbrs:
            out[y] = out.get(y, 0.0) + share
    return out


def propagate(system: BallSystem, n_max: int,
              snapshot_ns: Optional[Iterable[int]] = None,
              track_mass: bool = False):
    """Vectors P_n(center, .) for n = 0..n_max on the ball system.

    Returns (snapshots, mass): snapshots maps each requested n (default all)
    to the pair (v_n, v_{n+1}); mass is the per-step retained total when
    track_mass is set (drops below 1 only if the system radius truncates the
    support).
    """
    wanted = set(snapshot_ns) if snapshot_ns is not None else set(range(n_max + 1))
    v = np.zeros(system.n)
    v[0] = 1.0
    snapshots: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    mass: List[float] = []
    pending: Dict[int, np.ndarray] = {}
    for n in range(n_max + 2):
        if n - 1 in pending:
            snapshots[n - 1] = (pending.pop(n - 1), v.copy())
        if n in wanted and n <= n_max:
            pending[n] = v.copy()
        if track_mass:
            mass.append(float(v.sum()))
        if n > n_max:
            break
        v = (v / system.deg) * system.adj  # row vector times adjacency
    return snapshots, mass


def heat_kernel(graph: LaaksoGraph, x: Vertex, n_max: int,
                targets: Sequence[Vertex]) -> List[HeatKernelRecord]:
    """Exact p_n(x, y) = P_n(x, y)/deg(y) for n <= n_max and requested y."""
    system = build_ball_system(graph, x, n_max + 1)
    cols = [system.index.get(y) for y in targets]
    vals = np.zeros((n_max + 2, len(targets)))
    v = np.zeros(system.n)
    v[0] = 1.0
    for n in range(n_max + 2):
        for t, j in enumerate(cols):
            if j is not None:
                vals[n, t] = v[j] / system.deg[j]
        if n <= n_max:
            v = (v / system.deg) * system.adj
    records = []
    for t, y in enumerate(targets):
        for n in range(n_max + 1):
            records.append(HeatKernelRecord(n=n, x=x, y=y, p_n=float(vals[n, t]),
                                            p_n_plus_1=float(vals[n + 1, t])))
    return records


def _exit_residual(adj_int: csr_matrix, deg_int: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Residual deg + A h - D h computed with the integer part split off.

    Degrees and the rounded part of h are exact in float64, so the integer
    bracket incurs no rounding; only the small fractional remainder carries
    float error.  This makes one step of iterative refinement land exactly on
    integer-valued solutions.
    """
    hi = np.round(h)
    e = h - hi
    exact_part = deg_int + adj_int @ hi - deg_int * hi
    return exact_part + (adj_int @ e - deg_int * e)


def exact_mean_exit_time(graph: LaaksoGraph, center: Vertex, radius: int) -> ExitTimeRecord:
    """Mean exit time from the open ball B(center, radius), exactly.

    Solves h = 1 + (mean of h over neighbors) on {d < radius} with h = 0
    outside: conjugate gradients on the diagonally dominant system plus
    iterative refinement with an exactly evaluated residual, down to a
    fixed-point residual below 1e-10.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    system = build_ball_system(graph, center, radius)
    interior = system.dist < radius
    n_int = int(interior.sum())
    adj_int = system.adj[interior][:, interior]
    deg_int = system.deg[interior]
    lap = diags(deg_int) - adj_int
    maxiter = 40 * n_int + 1000
    h, info = cg(lap, deg_int, rtol=1e-12, atol=0.0, maxiter=maxiter)
    if info != 0:
        raise NoConvergenceError(f"cg failed to converge (info={info})")
    for _ in range(4):
        resid = _exit_residual(adj_int, deg_int, h)
        if not np.any(resid):
            break
        delta, info = cg(lap, resid, rtol=1e-8, atol=0.0, maxiter=maxiter)
        if info != 0:
            break
        h = h + delta
    res = float(np.max(np.abs(_exit_residual(adj_int, deg_int, h) / deg_int)))
    scale = max(1.0, float(np.max(h)))
    if res > 1e-10 * scale:
        raise NoConvergenceError(f"fixed-point residual {res:.3e} after refinement")
    return ExitTimeRecord(center=center, radius=radius, mean=float(h[0]),
                          half_width=0.0, trials=0)


def _run_chunk(system: BallSystem, radius: int, count: int, stream: RandomStream,
               max_steps: int) -> Tuple[float, float, int]:
    """Simulate `count` walkers on one stream; returns (sum, sumsq, count)."""
    gen = stream.generator()
    indptr = system.adj.indptr
    indices = system.adj.indices
    deg = system.deg.astype(np.int64)
    pos = np.zeros(count, dtype=np.int64)
    steps = np.zeros(count, dtype=np.int64)
    exit_steps = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    dist = system.dist
    for _ in range(max_steps):
        if active.size == 0:
            break
        u = gen.random(active.size)
        p = pos[active]
        choice = indptr[p] + (u * deg[p]).astype(np.int64)
        newpos = indices[choice]
        pos[active] = newpos
        steps[active] += 1
        exited = dist[newpos] >= radius
        if exited.any():
            done = active[exited]
            exit_steps[done] = steps[done]
            active = active[~exited]
    if active.size:
        raise NoConvergenceError("walkers did not exit within the step cap")
    vals = exit_steps.astype(np.float64)
    return (math.fsum(vals), math.fsum(vals * vals), count)


def simulate_exit_time(graph: LaaksoGraph, center: Vertex, radius: int, trials: int,
                       stream: RandomStream, workers: int = 1) -> ExitTimeRecord:
    """Monte Carlo mean exit time with a 95% CI.

    Trials are split into fixed-size chunks, one random stream per chunk, and
    chunk results are combined in index order: identical (seed, stream) gives
    bit-identical output for any worker count.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    system = build_ball_system(graph, center, radius)
    max_steps = max(100_000, 1000 * radius * radius)
    chunks = []
    start = 0
    idx = 0
    while start < trials:
        count = min(MC_CHUNK, trials - start)
        chunks.append((count, stream.shifted(idx)))
        start += count
        idx += 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda args: _run_chunk(system, radius, args[0], args[1], max_steps), chunks))
    else:
        results = [_run_chunk(system, radius, c, s, max_steps) for c, s in chunks]
    total = math.fsum(r[0] for r in results)
    total_sq = math.fsum(r[1] for r in results)
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    half = 1.96 * math.sqrt(var / trials)
    return ExitTimeRecord(center=center, radius=radius, mean=mean,
                          half_width=half, trials=trials)


@dataclass(frozen=True)
class GreenSeries:
    x: Vertex
    y: Vertex
    n_values: Tuple[int, ...]
    partial_sums: Tuple[float, ...]
    support_radius: int
    absorbed_mass: float
    shell_green_max: float


def green_series(graph: LaaksoGraph, x: Vertex, y: Vertex, n_values: Sequence[int],
                 support_radius: Optional[int] = None) -> GreenSeries:
    """Partial sums sum_{n<=N} p_n(x, y) at the requested checkpoints.

    With support_radius below max(n_values) the propagation is absorbing at
    the truncation shell; absorbed_mass and the largest near-shell Green value
    are reported so the truncation error (absorbed_mass * shell Green bound)
    can be certified against the increments being judged.
    """
    n_values = sorted(n_values)
    n_max = n_values[-1]
    radius = support_radius if support_radius is not None else n_max
    system = build_ball_system(graph, x, radius)
    j = system.index.get(y)
    if j is None:
        raise ValueError("target outside the truncated support")
    deg_y = system.deg[j]
    green = np.zeros(system.n)
    v = np.zeros(system.n)
    v[0] = 1.0
    sums = []
    checkpoints = iter(n_values)
    next_cp = next(checkpoints)
    for n in range(n_max + 1):
        green += v / system.deg
        while next_cp is not None and n == next_cp:
            sums.append(float(green[j]))
            next_cp = next(checkpoints, None)
        if n < n_max:
            v = (v / system.deg) * system.adj
    absorbed = 1.0 - float(v.sum())
    shell = system.dist >= max(1, radius - 4)
    shell_green = float(np.max(green[shell])) if shell.any() else 0.0
    return GreenSeries(x=x, y=y, n_values=tuple(n_values), partial_sums=tuple(sums),
                       support_radius=radius, absorbed_mass=max(0.0, absorbed),
                       shell_green_max=shell_green)


def green_partial(graph: LaaksoGraph, x: Vertex, y: Vertex, n_max: int,
                  support_radius: Optional[int] = None) -> float:
    """sum_{n=0}^{n_max} p_n(x, y); monotone in n_max."""
    return green_series(graph, x, y, [n_max], support_radius).partial_sums[0]
