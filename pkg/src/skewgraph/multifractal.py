"""Joint Birkhoff-average level counting, entropy surfaces and the variational dimension."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidParameters
from .symbolic import DEFAULT_WORD_BUDGET, OneSidedPotential, ShiftSpace, birkhoff_sums, word_array
from .thermo import solve_linear_root

DEFAULT_N_LADDER = (10, 12, 14, 16)
DEFAULT_CELLS = 64
# Averages are grouped after rounding to this many decimals before counting.
_GROUP_DECIMALS = 12
# Distances within this of theta are ties and fail the strict "< theta" test, as they would in exact
# arithmetic.  Dyadic grids and theta ladders put lattice averages exactly on cell boundaries.
TIE_SLACK = 1e-12


def _within(dist, theta: float):
    return dist < theta - TIE_SLACK


@dataclass(frozen=True)
class LevelTarget:
    a1: float
    a2: float
    theta: float
    n: int

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def _averages(shift: ShiftSpace, psi1: OneSidedPotential, psi2: OneSidedPotential, n: int, budget: int):
    words = word_array(shift, n, budget)
    return birkhoff_sums(psi1, words, shift) / n, birkhoff_sums(psi2, words, shift) / n


def count_level_cylinders(shift: ShiftSpace, psi1: OneSidedPotential, psi2: OneSidedPotential,
                          target: LevelTarget, budget: int = DEFAULT_WORD_BUDGET) -> int:
    """Number of length-n words with both averages strictly within ``theta`` of the target."""
    avg1, avg2 = _averages(shift, psi1, psi2, target.n, budget)
    hit = _within(np.abs(avg1 - target.a1), target.theta) & _within(np.abs(avg2 - target.a2), target.theta)
    return int(np.count_nonzero(hit))


def _grouped_averages(shift, psi1, psi2, n, budget):
    """Distinct (average1, average2) pairs with multiplicities."""
    avg1, avg2 = _averages(shift, psi1, psi2, n, budget)
    keys = np.column_stack([np.round(avg1, _GROUP_DECIMALS), np.round(avg2, _GROUP_DECIMALS)])
    uniq, first, mult = np.unique(keys, axis=0, return_index=True, return_counts=True)
    # Keep an actual (unrounded) representative so strict comparisons stay faithful.
    return avg1[first], avg2[first], mult.astype(np.int64)


def _axis_grid(lo: float, hi: float, cells: int) -> Tuple[np.ndarray, float]:
    if hi - lo <= 1e-15 * max(1.0, abs(lo)):
        return np.array([lo]), 0.0
    edges = np.linspace(lo, hi, cells + 1)
    return 0.5 * (edges[:-1] + edges[1:]), (hi - lo) / cells


def default_grid(psi1: OneSidedPotential, psi2: OneSidedPotential, cells: int = DEFAULT_CELLS):
    """Cell centres covering the box hull of the potential values, and the finest pitch."""
    g1, p1 = _axis_grid(psi1.inf, psi1.sup, cells)
    g2, p2 = _axis_grid(psi2.inf, psi2.sup, cells)
    a1, a2 = np.meshgrid(g1, g2, indexing="ij")
    pitches = [p for p in (p1, p2) if p > 0]
    return np.column_stack([a1.ravel(), a2.ravel()]), (min(pitches) if pitches else 0.0)


def default_theta_ladder(psi1: OneSidedPotential, psi2: OneSidedPotential, pitch: float) -> Tuple[float, ...]:
    """Halving ladder from half the value spread down to half the grid pitch."""
    spread = max(psi1.sup - psi1.inf, psi2.sup - psi2.inf)
    if spread <= 0 or pitch <= 0:
        return (1e-3,)
    ladder = [0.5 * spread]
    while ladder[-1] / 2 > 0.5 * pitch:
        ladder.append(ladder[-1] / 2)
    ladder.append(0.5 * pitch)
    return tuple(ladder)


@dataclass
class EntropySurface:
    grid: np.ndarray                 # (cells, 2) targets (a1, a2)
    theta_ladder: Tuple[float, ...]  # decreasing
    n_ladder: Tuple[int, ...]
    counts: np.ndarray               # (cells, thetas, ns) int64
    H: np.ndarray                    # per-cell estimate, nan where empty
    H_upper: np.ndarray              # value at the coarsest theta (sandwich top)
    empty: np.ndarray                # bool: M = 0 for every theta at n_max
    centroids: Optional[np.ndarray] = None  # (cells, thetas, ns, 2) mean attained average per theta
    distortion: Dict[int, float] = field(default_factory=dict)
    alphabet_size: int = 2

    def h_at(self, theta_index: int, n_index: int) -> np.ndarray:
        m = self.counts[:, theta_index, n_index].astype(float)
        n = self.n_ladder[n_index]
        with np.errstate(divide="ignore"):
            return np.where(m > 0, np.log(np.maximum(m, 1.0)) / n, np.nan)

    @property
    def sandwich_width(self) -> float:
        finite = ~self.empty
        if not np.any(finite):
            return float("nan")
        return float(np.nanmax(self.H_upper[finite] - self.H[finite]))

    def to_csv(self, header_lines: Sequence[str] = ()) -> str:
        out = io.StringIO()
        for line in header_lines:
            out.write(f"# {line}\n")
        out.write("a1,a2,theta,n,M,H_estimate\n")
        for c, (a1, a2) in enumerate(self.grid):
            for ti, theta in enumerate(self.theta_ladder):
                for ni, n in enumerate(self.n_ladder):
                    m = int(self.counts[c, ti, ni])
                    h = f"{math.log(m) / n:.12g}" if m else ""
                    out.write(f"{a1:.12g},{a2:.12g},{theta:.12g},{n},{m},{h}\n")
        return out.getvalue()


def distortion_constant(shift: ShiftSpace, psi: OneSidedPotential, n: int,
                        budget: int = DEFAULT_WORD_BUDGET) -> float:
    """Largest spread of ``S_n psi`` over sequences sharing a length-n cylinder."""
    k = psi.depth
    if k <= 1:
        return 0.0
    words = word_array(shift, n + k - 1, budget).astype(np.int64)
    N = shift.alphabet_size
    flat = np.asarray(psi.values).ravel()
    code = np.zeros((len(words), n), dtype=np.int64)
    for j in range(k):
        code = code * N + words[:, j:j + n]
    sums = flat[code].sum(axis=1)
    prefix = np.zeros(len(words), dtype=np.int64)
    for j in range(n):
        prefix = prefix * N + words[:, j]
    order = np.argsort(prefix, kind="stable")
    starts = np.flatnonzero(np.r_[True, np.diff(prefix[order]) != 0])
    mx = np.maximum.reduceat(sums[order], starts)
    mn = np.minimum.reduceat(sums[order], starts)
    return float(np.max(mx - mn))


def entropy_surface(shift: ShiftSpace, psi1: OneSidedPotential, psi2: OneSidedPotential,
                    grid: Optional[np.ndarray] = None, theta_ladder: Optional[Sequence[float]] = None,
                    n_ladder: Sequence[int] = DEFAULT_N_LADDER, cells: int = DEFAULT_CELLS,
                    budget: int = DEFAULT_WORD_BUDGET) -> EntropySurface:
    """Counts ``M(psi, a, theta, n)`` on a grid of targets and their entropy estimates.

    ``H`` is ``(1/n_max) log M`` at the smallest ``theta`` with a nonzero
    count; ``H_upper`` is the same quantity at the coarsest ``theta``.
    """
    default, pitch = default_grid(psi1, psi2, cells)
    grid = default if grid is None else np.asarray(grid, dtype=float).reshape(-1, 2)
    thetas = tuple(sorted(theta_ladder if theta_ladder is not None else default_theta_ladder(psi1, psi2, pitch),
                          reverse=True))
    ns = tuple(int(n) for n in n_ladder)
    if not len(grid) or not thetas or not ns:
        raise ValueError("grid, theta_ladder and n_ladder must be non-empty")
    counts = np.zeros((len(grid), len(thetas), len(ns)), dtype=np.int64)
    centroids = np.full((len(grid), len(thetas), len(ns), 2), np.nan)
    for ni, n in enumerate(ns):
        u1, u2, mult = _grouped_averages(shift, psi1, psi2, n, budget)
        step = max(1, 2 ** 22 // max(1, len(u1)))
        for start in range(0, len(grid), step):
            block = grid[start:start + step]
            d1 = np.abs(u1[None, :] - block[:, 0:1])
            d2 = np.abs(u2[None, :] - block[:, 1:2])
            dist = np.maximum(d1, d2)
            for ti, theta in enumerate(thetas):
                weights = _within(dist, theta) * mult
                total = weights.sum(axis=1)
                counts[start:start + step, ti, ni] = total
                with np.errstate(invalid="ignore", divide="ignore"):
                    centroids[start:start + step, ti, ni, 0] = (weights @ u1) / total
                    centroids[start:start + step, ti, ni, 1] = (weights @ u2) / total
    last = counts[:, :, -1]
    n_max = ns[-1]
    H = np.full(len(grid), np.nan)
    H_upper = np.full(len(grid), np.nan)
    for c in range(len(grid)):
        nonzero = np.flatnonzero(last[c] > 0)
        if len(nonzero):
            H[c] = math.log(last[c, nonzero[-1]]) / n_max
            H_upper[c] = math.log(last[c, nonzero[0]]) / n_max
    dist = {n: max(distortion_constant(shift, psi1, n, budget), distortion_constant(shift, psi2, n, budget))
            for n in ns[-1:]}
    return EntropySurface(grid, thetas, ns, counts, H, H_upper, np.isnan(H), centroids, dist, shift.alphabet_size)


# ---------------------------------------------------------------------------
# Variational dimension


@dataclass(frozen=True)
class LadderStep:
    n: int
    t_raw: float       # max over cells of (H_n + a2) / -a1 at the finest theta
    t_refined: float   # after the quadratic vertex correction
    gap: float         # t_pressure_root - t_refined


@dataclass(frozen=True)
class VariationalResult:
    t_variational: float
    t_pressure_root: float
    gap: float
    steps: Tuple[LadderStep, ...] = ()
    model: str = ""

    @property
    def gaps_decreasing(self) -> bool:
        gaps = [abs(s.gap) for s in self.steps]
        return all(b < a for a, b in zip(gaps, gaps[1:]))


def _vertex_refine(points: np.ndarray, values: np.ndarray) -> float:
    """Maximum of a quadratic through the best point and its nearest neighbours.

    ``points`` are the targets of nonempty cells.  When they lie on a line the
    fit is one-dimensional in the principal direction; otherwise a full
    two-dimensional quadratic is fitted to the nearest nine cells.
    """
    # Neighbouring cells can share one attained average; keep each point once.
    _, keep = np.unique(np.round(points, _GROUP_DECIMALS), axis=0, return_index=True)
    points, values = points[keep], values[keep]
    best = int(np.argmax(values))
    top = float(values[best])
    if len(values) < 3:
        return top
    centred = points - points.mean(axis=0)
    _, sv, vt = np.linalg.svd(centred, full_matrices=False)
    flat = len(sv) < 2 or sv[1] <= 1e-9 * max(sv[0], 1e-300)
    if flat:
        u = centred @ vt[0]
        order = np.argsort(u)
        pos = int(np.flatnonzero(order == best)[0])
        pos = min(max(pos, 1), len(order) - 2)
        sel = order[pos - 1:pos + 2]
        c2, c1, c0 = np.polyfit(u[sel], values[sel], 2)
        if c2 >= 0:
            return top
        vertex = -c1 / (2 * c2)
        vertex = min(max(vertex, u[sel].min()), u[sel].max())
        return max(top, float(np.polyval((c2, c1, c0), vertex)))
    scale = np.abs(centred).max(axis=0)
    scale[scale == 0] = 1.0
    z = (points - points[best]) / scale
    near = np.argsort(np.sum(z ** 2, axis=1))[:9]
    if len(near) < 6:
        return top
    x, y = z[near, 0], z[near, 1]
    design = np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y])
    coef = np.linalg.lstsq(design, values[near], rcond=None)[0]
    hess = np.array([[2 * coef[3], coef[4]], [coef[4], 2 * coef[5]]])
    if np.any(np.linalg.eigvalsh(hess) >= 0):
        return top
    v = np.linalg.solve(hess, -coef[1:3])
    lo, hi = z[near].min(axis=0), z[near].max(axis=0)
    v = np.minimum(np.maximum(v, lo), hi)
    fitted = coef @ np.array([1, v[0], v[1], v[0] ** 2, v[0] * v[1], v[1] ** 2])
    return max(top, float(fitted))


def _extrapolate(ns: np.ndarray, ts: np.ndarray) -> Tuple[float, str]:
    if len(ns) >= 3:
        design = np.column_stack([np.ones(len(ns)), np.log(ns) / ns, 1.0 / ns])
        model = "t + (alpha log n + beta) / n"
    elif len(ns) == 2:
        design = np.column_stack([np.ones(len(ns)), 1.0 / ns])
        model = "t + beta / n"
    else:
        return float(ts[0]), "single n"
    if np.ptp(ts) == 0:
        return float(ts[0]), model
    coef = np.linalg.lstsq(design, ts, rcond=None)[0]
    return float(coef[0]), model


def variational_dimension(shift: ShiftSpace, psi1: OneSidedPotential, psi2: OneSidedPotential,
                          surface: EntropySurface) -> VariationalResult:
    """Sup over targets of ``(H + a2) / -a1``, compared with the root of ``P(t psi1 + psi2) = 0``.

    For each ``n`` the maximum over cells of ``(H_n + a2) / -a1`` is taken at
    the finest ``theta`` with a nonempty cell and sharpened by a quadratic vertex fit; the values
    are then extrapolated in ``n`` with ``t + (alpha log n + beta) / n``,
    which is the finite-size form of word counts (Stirling).
    """
    if psi1.sup >= 0 or psi2.sup >= 0:
        raise InvalidParameters("both potentials must be strictly negative")
    root = solve_linear_root(shift, psi1, psi2).d
    a1, a2 = surface.grid[:, 0], surface.grid[:, 1]
    steps = []
    for ni, n in enumerate(surface.n_ladder):
        filled = np.flatnonzero(surface.counts[:, :, ni].any(axis=0))
        if not len(filled):
            continue
        ti = int(filled[-1])
        h = surface.h_at(ti, ni)
        ok = ~np.isnan(h)
        raw = float(np.max((h[ok] + a2[ok]) / -a1[ok]))
        # Refine at the averages actually attained inside each cell.
        where = surface.centroids[ok, ti, ni] if surface.centroids is not None else surface.grid[ok]
        vals = (h[ok] + where[:, 1]) / -where[:, 0]
        refined = _vertex_refine(where, vals)
        steps.append(LadderStep(n, raw, refined, root - refined))
    if not steps:
        raise InvalidParameters("entropy surface has no nonempty cell")
    ns = np.array([s.n for s in steps], dtype=float)
    ts = np.array([s.t_refined for s in steps])
    t_var, model = _extrapolate(ns, ts)
    return VariationalResult(t_var, root, abs(t_var - root), tuple(steps), model)
