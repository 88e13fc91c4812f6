"""Box counting, Markov rectangle sizes and Moran covers."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, LipschitzHeightZero, UndersampledScale
from .graph import SampledGraph, classify_regularity, default_window, fit_log_slope
from .symbolic import DEFAULT_WORD_BUDGET, OneSidedPotential, ShiftSpace, Word, birkhoff_sum

# Point mode: an occupied cell should hold this many points on average.
MIN_POINTS_PER_CELL = 10.0
# Graph mode: samples needed per column for the interpolant to resolve it.
MIN_SAMPLES_PER_COLUMN = 4


@dataclass(frozen=True)
class BoxCountTable:
    scales: Tuple[int, ...]
    counts: Tuple[int, ...]
    slope: float
    intercept: float
    stderr: float
    window: Tuple[int, int]
    excluded: Tuple[int, ...] = ()
    mode: str = "points"

    @property
    def deltas(self) -> Tuple[float, ...]:
        return tuple(2.0 ** -j for j in self.scales)

    @property
    def fitted_scales(self) -> Tuple[int, ...]:
        lo, hi = self.window
        return tuple(j for j in self.scales if lo <= j <= hi and j not in self.excluded)

    def summary(self) -> str:
        lo, hi = self.window
        text = f"slope={self.slope:.6f},stderr={self.stderr:.6f},window={lo}:{hi}"
        if self.excluded:
            text += ",excluded=" + ":".join(str(j) for j in self.excluded)
        return text

    def to_csv(self, header_lines: Sequence[str] = ()) -> str:
        out = io.StringIO()
        for line in header_lines:
            out.write(f"# {line}\n")
        out.write("j,delta,count\n")
        for j, n in zip(self.scales, self.counts):
            out.write(f"{j},{2.0 ** -j:.17g},{n}\n")
        return out.getvalue()


def _cell_keys(points: np.ndarray, origin: np.ndarray, j: int, offset: float) -> np.ndarray:
    cells = np.floor((points - origin) * (1 << j) + offset).astype(np.int64)
    if cells.shape[1] == 1:
        return cells[:, 0]
    cells -= cells.min(axis=0)
    span = cells.max(axis=0) + 1
    if float(np.prod(span.astype(float))) < 2.0 ** 62:
        key = np.zeros(len(cells), dtype=np.int64)
        for d in range(cells.shape[1]):
            key = key * span[d] + cells[:, d]
        return key
    return np.unique(cells, axis=0, return_inverse=True)[1]


def count_points(points: np.ndarray, j: int, origin=None, offset: float = 0.0) -> int:
    """Number of cells of side ``2^-j`` (anchored at ``origin``) meeting the point set."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    origin = pts.min(axis=0) if origin is None else np.asarray(origin, dtype=float)
    # Sort-and-dedupe of the quantised indices.
    return int(len(np.unique(_cell_keys(pts, origin, j, offset))))


def count_graph(graph: SampledGraph, j: int, origin=None, offset: float = 0.0) -> int:
    """Cells of side ``2^-j`` meeting the linear interpolant of a continuous sampled graph."""
    x0, y0 = (float(graph.param.min()), float(graph.value.min())) if origin is None else origin
    scale = float(1 << j)
    col = np.floor((graph.param - x0) * scale + offset).astype(np.int64)
    row = np.floor((graph.value - y0) * scale + offset).astype(np.int64)
    lo_seg = np.minimum(row[:-1], row[1:])
    hi_seg = np.maximum(row[:-1], row[1:])
    # Each segment's row range belongs to the columns of both endpoints.
    cols = np.concatenate([col[:-1], col[1:], col[-1:]])
    lo = np.concatenate([lo_seg, lo_seg, row[-1:]])
    hi = np.concatenate([hi_seg, hi_seg, row[-1:]])
    c0 = cols.min()
    ncol = int(cols.max() - c0 + 1)
    col_lo = np.full(ncol, np.iinfo(np.int64).max)
    col_hi = np.full(ncol, np.iinfo(np.int64).min)
    np.minimum.at(col_lo, cols - c0, lo)
    np.maximum.at(col_hi, cols - c0, hi)
    used = col_hi >= col_lo
    return int(np.sum(col_hi[used] - col_lo[used] + 1))


def box_dimension_estimate(data, ladder: Tuple[int, int] = (1, 10), window: Optional[Tuple[int, int]] = None,
                           origin=None, offset: float = 0.0, robust: bool = False) -> BoxCountTable:
    """Box-counting slope of ``log N(2^-j)`` against ``j log 2``.

    ``data`` is an ``(n, k)`` array of points or a :class:`SampledGraph`.  A
    continuous sampled graph is counted through its linear interpolant
    column by column; anything else is counted as a point set.  Scales whose
    sampling is too thin are excluded from the fit and listed.
    """
    j_min, j_max = ladder
    if j_max < j_min:
        raise ValueError("ladder must satisfy j_min <= j_max")
    scales = tuple(range(j_min, j_max + 1))
    lo, hi = window if window is not None else default_window(j_min, j_max)
    if not (j_min <= lo <= hi <= j_max):
        raise ValueError(f"window {lo}:{hi} must lie inside the ladder {j_min}:{j_max}")
    excluded = []
    if isinstance(data, SampledGraph) and data.continuous:
        mode = "graph"
        counts = [count_graph(data, j, origin, offset) for j in scales]
        for j in scales:
            if len(data) / float(1 << j) < MIN_SAMPLES_PER_COLUMN:
                excluded.append(j)
    else:
        mode = "points"
        if isinstance(data, SampledGraph):
            pts = np.column_stack([data.param, data.value])
        else:
            pts = np.asarray(data, dtype=float)
            pts = pts[:, None] if pts.ndim == 1 else pts
        counts = [count_points(pts, j, origin, offset) for j in scales]
        for j, n in zip(scales, counts):
            if len(pts) < MIN_POINTS_PER_CELL * n and n > 1:
                excluded.append(j)
    use = [j for j in scales if lo <= j <= hi and j not in excluded]
    if len(use) < 2:
        raise UndersampledScale(f"fewer than two usable scales in window {lo}:{hi}; undersampled: {excluded}",
                                excluded)
    xs = np.array(use, dtype=float) * math.log(2.0)
    ys = np.log([counts[scales.index(j)] for j in use])
    slope, intercept, stderr = fit_log_slope(xs, ys, robust=robust)
    return BoxCountTable(scales, tuple(counts), slope, intercept, stderr, (lo, hi), tuple(excluded), mode)


# ---------------------------------------------------------------------------
# Markov rectangles


@dataclass(frozen=True)
class RectangleSize:
    width: float
    height: float
    word: Word


def markov_rectangle_size(system, word: Sequence[int], base_width: float = 1.0, fiber_height: float = 1.0,
                          lipschitz: Optional[bool] = None) -> RectangleSize:
    """Width ``base_width exp(S_n phi^u)`` and height ``fiber_height exp(S_n phi^cu)``.

    A Lipschitz graph has zero-height unstable rectangles; this is reported
    with a :class:`LipschitzHeightZero` warning.  ``lipschitz=None`` runs the
    regularity classifier.
    """
    word = tuple(int(s) for s in word)
    shift = system.base_shift
    if not shift.is_admissible(word):
        raise ValueError(f"word {word} is not admissible")
    pots = system.geometric_potentials()
    n = len(word)
    width = base_width * math.exp(birkhoff_sum(pots.phi_u, word, n, shift)) if n else base_width
    if lipschitz is None:
        lipschitz = classify_regularity(system).verdict == "lipschitz"
    if lipschitz:
        warnings.warn("graph is Lipschitz on unstable leaves: rectangle height is 0", LipschitzHeightZero)
        return RectangleSize(width, 0.0, word)
    height = fiber_height * math.exp(birkhoff_sum(pots.phi_cu, word, n, shift)) if n else fiber_height
    return RectangleSize(width, height, word)


# ---------------------------------------------------------------------------
# Moran covers


@dataclass(frozen=True)
class MoranCover:
    r: float
    cells: Tuple[Word, ...]
    n_bounds: Tuple[int, int]

    def __len__(self):
        return len(self.cells)


def moran_cover(shift: ShiftSpace, psi1: OneSidedPotential, r: float,
                budget: int = DEFAULT_WORD_BUDGET) -> MoranCover:
    """Cylinders ``[w]`` with ``n = |w|`` least such that ``S_n psi1 < log r``.

    Each word is evaluated at its periodic completion.  For potentials of
    depth at most one this is exactly the value on the whole cylinder.
    """
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    if psi1.sup >= 0:
        raise ValueError("psi1 must be strictly negative")
    log_r = math.log(r)
    cells: List[Word] = []
    frontier = [(a,) for a in range(shift.alphabet_size)]
    while frontier:
        nxt = []
        for w in frontier:
            if birkhoff_sum(psi1, w, len(w), shift) < log_r:
                cells.append(w)
                if len(cells) > budget:
                    raise BudgetExceeded(f"Moran cover exceeds {budget} cells")
            else:
                nxt.extend(w + (b,) for b in range(shift.alphabet_size) if shift.allowed(w[-1], b))
        if len(nxt) > budget:
            raise BudgetExceeded(f"Moran recursion frontier exceeds {budget} words")
        frontier = nxt
    cells.sort()
    lengths = [len(w) for w in cells]
    return MoranCover(r, tuple(cells), (min(lengths), max(lengths)))
