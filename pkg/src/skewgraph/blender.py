"""Fibered-blender checks for affine step systems.

The two inverse fiber maps of the affine horseshoe are ``x -> x / lambda``
and ``x -> (x + t) / lambda``; they map the fiber range ``[0, t / (lambda - 1)]``
into itself.  All interval arithmetic here is done with exact fractions of
the (binary) float parameters.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from scipy.optimize import brentq

from .errors import NotBlenderRegime
from .symbolic import ShiftSpace
from .systems import AffineHorseshoe

Interval = Tuple[Fraction, Fraction]

BLENDER_CANDIDATE = "blender_candidate"
BOUNDARY = "boundary"
CANTOR_PROJECTION = "cantor_projection"


def _regime(lam: Fraction) -> str:
    if lam < 2:
        return BLENDER_CANDIDATE
    if lam == 2:
        return BOUNDARY
    return CANTOR_PROJECTION


def _full_range(lam: Fraction, t: Fraction) -> Interval:
    top = t / (lam - 1)
    return (min(Fraction(0), top), max(Fraction(0), top))


@dataclass(frozen=True)
class OverlapReport:
    interval: Optional[Interval]
    full_fiber_range: Interval
    regime: str

    @property
    def length(self) -> Fraction:
        return Fraction(0) if self.interval is None else self.interval[1] - self.interval[0]

    @property
    def nondegenerate(self) -> bool:
        return self.interval is not None and self.length > 0


def overlap_interval(lam: float, t: float) -> OverlapReport:
    """Overlap ``[t/lambda, t/(lambda(lambda-1))]`` of the two first-level fiber images."""
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    L, T = Fraction(lam), Fraction(t)
    regime = _regime(L)
    full = _full_range(L, T)
    if T == 0 or L > 2:
        return OverlapReport(None, full, regime)
    a, b = T / L, T / (L * (L - 1))
    return OverlapReport((min(a, b), max(a, b)), full, regime)


def _merge(intervals: List[Interval]) -> List[Interval]:
    intervals.sort()
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


@dataclass(frozen=True)
class ProjectionCheck:
    lam: float
    t: float
    depth: int
    verdict: str                  # "connected", "disconnected" or "degenerate"
    connected: bool
    gap_fraction: float           # 1 - (union length) / (full range length) at the final depth
    components: int
    first_disconnected_depth: Optional[int] = None


def fiber_projection_check(system: AffineHorseshoe, depth: int = 12) -> ProjectionCheck:
    """Union of the depth-m images of the fiber range under the inverse fiber maps."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    L, T = Fraction(system.lam), Fraction(system.t)
    full = _full_range(L, T)
    if T == 0:
        return ProjectionCheck(system.lam, system.t, depth, "degenerate", False, 0.0, 1)
    union = [full]
    first_break = None
    for level in range(1, depth + 1):
        union = _merge([((lo + shift) / L, (hi + shift) / L) for lo, hi in union for shift in (0, T)])
        if first_break is None and len(union) > 1:
            first_break = level
    total = sum(hi - lo for lo, hi in union)
    gap = float(1 - total / (full[1] - full[0]))
    connected = first_break is None
    return ProjectionCheck(system.lam, system.t, depth, "connected" if connected else "disconnected",
                           connected, gap, len(union), first_break)


@dataclass(frozen=True)
class GermCheck:
    word: Tuple[int, ...]
    initial_height: Fraction
    height_after_m: Fraction
    delta_threshold: Fraction
    passed: bool


def germ_height_check(system: AffineHorseshoe, word: Sequence[int], delta: Optional[float] = None) -> GermCheck:
    """Strip over the u-box of ``word`` whose image is the overlap interval, pushed forward ``m`` steps.

    The strip is the pull-back of the overlap interval along ``word``; every
    forward step multiplies its height by ``lambda`` and the result is
    clamped to the fiber range.  ``delta`` defaults to the overlap length.
    """
    report = overlap_interval(system.lam, system.t)
    if not system.blender_regime or not report.nondegenerate:
        raise NotBlenderRegime(f"germ check needs 1 < lambda < 2 and t != 0 (lambda={system.lam}, t={system.t})")
    word = tuple(int(s) for s in word)
    if not word or any(s not in (0, 1) for s in word):
        raise ValueError("word must be a non-empty binary word")
    L, T = Fraction(system.lam), Fraction(system.t)
    full = report.full_fiber_range
    lo, hi = report.interval
    for s in reversed(word):
        lo, hi = (lo + s * T) / L, (hi + s * T) / L
    initial = hi - lo
    for s in word:
        lo, hi = L * lo - s * T, L * hi - s * T
        lo, hi = max(lo, full[0]), min(hi, full[1])
    threshold = report.length if delta is None else Fraction(delta)
    height = hi - lo
    return GermCheck(word, initial, height, threshold, height >= threshold)


# ---------------------------------------------------------------------------
# D1 / D2


@dataclass(frozen=True)
class BoundComparison:
    D1: float
    D2: float
    binding: str   # "D1", "D2" or "equal"


def bound_regime(gamma: float, dim_base_unstable: float, rel_tol: float = 1e-12) -> BoundComparison:
    """Compare the Hoelder-graph bounds ``dim / gamma`` and ``dim + 1 - gamma``."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if dim_base_unstable < 0:
        raise ValueError("dimension must be non-negative")
    d1 = dim_base_unstable / gamma
    d2 = dim_base_unstable + 1.0 - gamma
    if abs(d1 - d2) <= rel_tol * max(1.0, abs(d1), abs(d2)):
        binding = "equal"
    else:
        binding = "D1" if d1 < d2 else "D2"
    return BoundComparison(d1, d2, binding)


def crossing_gamma(dim_base_unstable: float) -> float:
    """The ``gamma`` in ``(0, 1)`` where both bounds agree (requires ``dim < 1``)."""
    d = dim_base_unstable
    if not 0 < d < 1:
        raise ValueError("crossing exists only for 0 < dim < 1")
    f = lambda g: d / g - (d + 1.0 - g)  # noqa: E731
    return float(brentq(f, d / 2.0, (1.0 + d) / 2.0, xtol=1e-15))


# ---------------------------------------------------------------------------
# Sweeps and the three-symbol fixture


@dataclass(frozen=True)
class SweepRow:
    lam: float
    t: float
    depth: int
    connected: bool
    gap_fraction: float
    regime: str
    germ_passed: Optional[bool]


def blender_sweep(lams: Sequence[float], ts: Sequence[float], depth: int = 12, germ_word_length: int = 4,
                  mu: float = 0.25, kappa: float = 4.0) -> List[SweepRow]:
    rows = []
    for lam in lams:
        for t in ts:
            system = AffineHorseshoe(mu, lam, kappa, t)
            check = fiber_projection_check(system, depth)
            regime = overlap_interval(lam, t).regime
            germ = None
            if system.blender_regime:
                word = tuple(i % 2 for i in range(germ_word_length))
                germ = germ_height_check(system, word).passed
            rows.append(SweepRow(lam, t, depth, check.connected, check.gap_fraction, regime, germ))
    return rows


def sweep_csv(rows: Sequence[SweepRow], header_lines: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for line in header_lines:
        out.write(f"# {line}\n")
    out.write("lambda,t,depth,connected,gap_fraction\n")
    for r in rows:
        out.write(f"{r.lam:.12g},{r.t:.12g},{r.depth},{str(r.connected).lower()},{r.gap_fraction:.12g}\n")
    return out.getvalue()


# Transition matrix of the three-symbol example, read row-wise.
THREE_SYMBOL_MATRIX = ((1, 1, 0), (0, 1, 1), (1, 1, 1))


@dataclass(frozen=True)
class AffineIntervalMap:
    fixed_point: Fraction
    slope: Fraction

    def __call__(self, x):
        return self.fixed_point + self.slope * (x - self.fixed_point)

    def image(self, interval: Interval) -> Interval:
        a, b = self(interval[0]), self(interval[1])
        return (min(a, b), max(a, b))


@dataclass(frozen=True)
class ThreeSymbolBlender:
    """Three expanding interval maps over a mixing subshift.

    Intervals satisfy ``x0 < x2 < y0 < y1 < y2 < x1`` with ``I0 = [x0, y0]``,
    ``I1 = [y1, x1]``, ``I2 = [x2, y2]``; each ``T_i`` fixes ``x_i``.  The
    transitions forbid ``0 -> 1`` and ``2 -> 0``, which is the transpose of
    :data:`THREE_SYMBOL_MATRIX` (the column-wise reading).
    """

    intervals: Dict[int, Interval]
    maps: Dict[int, AffineIntervalMap]
    shift: ShiftSpace

    def substrip_covers(self) -> Dict[Tuple[int, int], bool]:
        """For every allowed ``i -> j``: does ``T_i(I_i)`` contain ``I_j``?"""
        out = {}
        for i in range(3):
            lo, hi = self.maps[i].image(self.intervals[i])
            for j in range(3):
                if self.shift.allowed(i, j):
                    a, b = self.intervals[j]
                    out[(i, j)] = lo <= a and b <= hi
        return out

    def empty_substrips(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((i, j) for i in range(3) for j in range(3) if not self.shift.allowed(i, j))


def three_symbol_blender() -> ThreeSymbolBlender:
    x0, x2, y0, y1, y2, x1 = (Fraction(v) for v in (0, 1, 2, 3, 4, 5))
    intervals = {0: (x0, y0), 1: (y1, x1), 2: (x2, y2)}
    # Slopes chosen so that T0(I0) = [x0, y2], T1(I1) = [x0, x1], T2(I2) = [x2, x1].
    maps = {0: AffineIntervalMap(x0, (y2 - x0) / (y0 - x0)),
            1: AffineIntervalMap(x1, (x1 - x0) / (x1 - y1)),
            2: AffineIntervalMap(x2, (x1 - x2) / (y2 - x2))}
    transpose = tuple(zip(*THREE_SYMBOL_MATRIX))
    return ThreeSymbolBlender(intervals, maps, ShiftSpace.from_matrix(transpose))
