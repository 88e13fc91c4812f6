"""Invariant graph evaluation, strong-unstable comparison curves and regularity estimates."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientResolution
from .symbolic import word_array
from .systems import (CAT_UNSTABLE, GOLDEN, AffineAnosov, AffineHorseshoe, BakerWeierstrass, CirclePoint,
                      CodePoint, Ray, SkewSystem, TorusPoint, lucas)

DEFAULT_DEPTH = 64
# Past this many steps a float torus orbit carries no information.
FLOAT_ORBIT_DEPTH = 45
LIPSCHITZ_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GraphPoint:
    base: object
    value: float
    error_bound: float


def _sup_offset(system: SkewSystem) -> float:
    if isinstance(system, AffineHorseshoe):
        return abs(system.t) / system.lam
    if isinstance(system, AffineAnosov):
        return system.forcing.sup_bound
    return 1.0


def truncation_bound(system: SkewSystem, depth: int, x0: float = 0.0) -> float:
    """Bound on ``|Phi_n - Phi|``: ``lambda^-n (|x0| + sup|Phi|)``."""
    lam = system.constants.lambda_w
    sup_graph = _sup_offset(system) * lam / (lam - 1.0)
    rounding = 4.0 * depth * np.finfo(float).eps * sup_graph
    return lam ** (-depth) * (abs(x0) + sup_graph) + rounding


def _float_orbit_bound(system: AffineAnosov, pt: TorusPoint, depth: int) -> float:
    """Extra error when the anchor is a float: orbit errors grow like kappa^k."""
    lam = system.lam
    lip = system.forcing.lipschitz_bound
    sup = system.forcing.sup_bound
    err = 0.0
    for k in range(1, depth + 1):
        orbit_err = 4.0 * np.finfo(float).eps * system.kappa ** k
        err += lam ** (-(k - 1)) * min(2.0 * sup, lip * orbit_err)
    return err


def evaluate_graph(system: SkewSystem, xi, depth: int = DEFAULT_DEPTH, x0: float = 0.0) -> GraphPoint:
    """``Phi_n(xi) = T_xi^{-1} o ... o T_{tau^{n-1} xi}^{-1}(x0)``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    bound_extra = 0.0
    if isinstance(system, AffineAnosov) and not xi.exact:
        depth = min(depth, FLOAT_ORBIT_DEPTH)
        bound_extra = _float_orbit_bound(system, xi, depth)
    offsets = system.fiber_offsets(xi, depth)
    lam = system.constants.lambda_w
    powers = lam ** -np.arange(depth, dtype=float)
    value = math.fsum((offsets * powers).tolist()) + lam ** (-depth) * x0
    return GraphPoint(xi, value, truncation_bound(system, depth, x0) + bound_extra)


def graph_value(system: SkewSystem, xi, depth: int = DEFAULT_DEPTH):
    """Best available value of ``Phi(xi)``: exact for horseshoe codes, truncated otherwise."""
    if isinstance(system, AffineHorseshoe):
        return system.graph_exact(xi)
    return evaluate_graph(system, xi, depth).value


# ---------------------------------------------------------------------------
# Sampled slices


@dataclass
class SampledGraph:
    """Graph values along an unstable segment, stored column-wise."""

    param: np.ndarray
    base_1: np.ndarray
    base_2: np.ndarray
    value: np.ndarray
    error_bound: np.ndarray
    system: Optional[SkewSystem] = None
    description: str = ""
    # Continuous graphs are box-counted through their linear interpolant.
    continuous: bool = True

    def __post_init__(self):
        if np.any(np.diff(self.param) <= 0):
            raise ValueError("parametrization must be strictly increasing")

    def __len__(self):
        return len(self.param)

    @property
    def points(self) -> Iterator[GraphPoint]:
        for i in range(len(self)):
            yield GraphPoint((float(self.base_1[i]), float(self.base_2[i])), float(self.value[i]),
                             float(self.error_bound[i]))

    def to_csv(self, handle=None, header_lines: Sequence[str] = ()) -> Optional[str]:
        own = handle is None
        handle = io.StringIO() if own else handle
        for line in header_lines:
            handle.write(f"# {line}\n")
        handle.write("param,base_1,base_2,value,error_bound\n")
        rows = np.column_stack([self.param, self.base_1, self.base_2, self.value, self.error_bound])
        np.savetxt(handle, rows, delimiter=",", fmt="%.17g")
        return handle.getvalue() if own else None

    @classmethod
    def from_csv(cls, text: str) -> "SampledGraph":
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.reader(lines)
        header = next(reader)
        if header != ["param", "base_1", "base_2", "value", "error_bound"]:
            raise ValueError(f"unexpected header {header}")
        data = np.array([[float(v) for v in row] for row in reader])
        return cls(*(data[:, i].copy() for i in range(5)))


def _dyadic_mod1(multiplier: int, numerators: np.ndarray, bits: int) -> np.ndarray:
    """``(multiplier * numerators / 2**bits) mod 1`` computed in integers."""
    mask = (1 << bits) - 1
    mult = int(multiplier) & mask
    return ((numerators * mult) & mask).astype(float) / float(1 << bits)


def _anosov_leaf_values(system: AffineAnosov, anchor: TorusPoint, idx: np.ndarray, bits: int,
                        depth: int, x0: float = 0.0) -> np.ndarray:
    """``Phi_depth`` at ``anchor + (idx / 2**bits) w`` for a rational anchor."""
    if not anchor.exact or anchor.offset != 0.0:
        raise ValueError("leaf anchors must be rational with zero offset")
    s = idx.astype(float) / float(1 << bits)
    total = np.zeros(len(idx))
    # Deepest terms first so small contributions are added first.
    for k in range(depth, 0, -1):
        a1, a2 = system.tau_power(anchor, k).anchor
        # s * kappa^k * w mod 1 via Lucas numbers; the float parts are tiny.
        d1 = _dyadic_mod1(lucas(2 * k), idx, bits) - s * GOLDEN ** (-2 * k)
        d2 = -_dyadic_mod1(lucas(2 * k + 1), idx, bits) - s * GOLDEN ** (-(2 * k + 1))
        x1 = (float(a1) + d1) % 1.0
        x2 = (float(a2) + d2) % 1.0
        total += system.lam ** (-(k - 1)) * system.forcing(x1, x2)
    return total + system.lam ** (-depth) * x0


def _baker_leaf_values(system: BakerWeierstrass, anchor: CirclePoint, idx: np.ndarray, bits: int,
                       depth: int, x0: float = 0.0) -> np.ndarray:
    """``Phi_depth`` at first coordinate ``anchor + idx / 2**bits``."""
    start = Fraction(anchor.coordinate)
    total = np.zeros(len(idx))
    for k in range(depth - 1, -1, -1):
        base = float((system.b ** k * start) % 1)
        total += system.lam ** (-k) * np.cos(2 * np.pi * (base + _dyadic_mod1(system.b ** k, idx, bits)))
    return total + system.lam ** (-depth) * x0


def _anosov_slice(system: AffineAnosov, anchor: TorusPoint, bits: int, depth: int, x0: float):
    idx = np.arange(1 << bits, dtype=np.int64)
    s = idx.astype(float) / float(1 << bits)
    total = _anosov_leaf_values(system, anchor, idx, bits, depth, x0)
    a1, a2 = (float(c) for c in anchor.anchor)
    base_1 = (a1 + s * CAT_UNSTABLE[0]) % 1.0
    base_2 = (a2 + s * CAT_UNSTABLE[1]) % 1.0
    err = np.full(len(idx), truncation_bound(system, depth, x0))
    return SampledGraph(s, base_1, base_2, total, err, system,
                        "offset s along w=(1,-golden) from the anchor")


def _horseshoe_slice(system: AffineHorseshoe, anchor: CodePoint, bits: int):
    words = word_array(system.base_shift, bits, budget=1 << 26).astype(float)
    k = np.arange(bits, dtype=float)
    xi_u = words @ ((system.kappa - 1.0) * system.kappa ** -(k + 1))
    value = words @ (system.t * system.lam ** -(k + 1))
    xi_s = np.full(len(words), float(system.stable_coordinate(anchor)))
    err = np.full(len(words), 2.0 * bits * np.finfo(float).eps * max(1.0, system.fiber_diameter))
    return SampledGraph(xi_u, xi_u.copy(), xi_s, value, err, system,
                        f"unstable coordinate of all depth-{bits} codes with tail 0", continuous=False)


def _baker_slice(system: BakerWeierstrass, anchor: CirclePoint, bits: int, depth: int, x0: float):
    if Fraction(anchor.coordinate) != 0:
        raise ValueError("the baker slice is the whole circle; use anchor coordinate 0")
    idx = np.arange(1 << bits, dtype=np.int64)
    s = idx.astype(float) / float(1 << bits)
    total = _baker_leaf_values(system, anchor, idx, bits, depth, x0)
    err = np.full(len(idx), truncation_bound(system, depth, x0))
    return SampledGraph(s, s.copy(), np.full(len(idx), float(anchor.second)), total, err, system,
                        "first circle coordinate")


def default_anchor(system: SkewSystem):
    if isinstance(system, AffineAnosov):
        return TorusPoint()
    if isinstance(system, AffineHorseshoe):
        return CodePoint.constant(0)
    return CirclePoint()


def sample_unstable_slice(system: SkewSystem, anchor=None, bits: int = 12, depth: int = DEFAULT_DEPTH,
                          x0: float = 0.0) -> SampledGraph:
    """Sample ``Phi`` at ``2**bits`` points of the unstable segment through ``anchor``.

    * cat map: ``anchor + s w`` for dyadic ``s`` in ``[0, 1)``;
    * horseshoe: the points of the unstable Cantor slice addressed by all
      depth-``bits`` future codes (value is exact, ``depth`` is unused);
    * baker: the dyadic points of the first circle coordinate.
    """
    if bits < 1 or bits > 26:
        raise ValueError("bits must be in 1..26")
    anchor = default_anchor(system) if anchor is None else anchor
    if isinstance(system, AffineAnosov):
        return _anosov_slice(system, anchor, bits, depth, x0)
    if isinstance(system, AffineHorseshoe):
        return _horseshoe_slice(system, anchor, bits)
    return _baker_slice(system, anchor, bits, depth, x0)


# ---------------------------------------------------------------------------
# Strong unstable comparison curve


def _exact_fiber_map(system: AffineHorseshoe, pt: CodePoint, x: Fraction) -> Fraction:
    return Fraction(system.lam) * x - Fraction(system.t) * pt.future[0]


def _check_same_leaf(system: SkewSystem, xi, eta):
    if isinstance(system, AffineHorseshoe) and xi.past != eta.past:
        raise ValueError("xi and eta must share their past (same local unstable leaf)")
    if isinstance(system, AffineAnosov) and (xi.anchor != eta.anchor or xi.power != eta.power):
        raise ValueError("eta must be given as an offset along the unstable direction of xi")
    if isinstance(system, BakerWeierstrass) and Fraction(xi.second) != Fraction(eta.second):
        raise ValueError("xi and eta must share their second coordinate")


def gamma_u_approx(system: SkewSystem, xi, eta, n: int, depth: int = DEFAULT_DEPTH):
    """``T^n_{tau^-n eta}(Phi(tau^-n xi))``; exact (a Fraction) for the horseshoe."""
    if n < 0:
        raise ValueError("n must be >= 0")
    _check_same_leaf(system, xi, eta)
    return _push_forward(system, _back_graph_value(system, xi, n, depth), eta, n)


def _back_graph_value(system: SkewSystem, xi, n: int, depth: int):
    """``Phi(tau^-n xi)``."""
    for _ in range(n):
        xi = system.tau_inv(xi)
    if isinstance(system, AffineHorseshoe):
        return system.graph_exact(xi)
    return evaluate_graph(system, xi, depth).value


def _push_forward(system: SkewSystem, x, eta, n: int):
    """``T^n_{tau^-n eta}(x)``."""
    pt = eta
    for _ in range(n):
        pt = system.tau_inv(pt)
    exact = isinstance(system, AffineHorseshoe)
    for _ in range(n):
        x = _exact_fiber_map(system, pt, x) if exact else system.fiber_map(pt, x)
        pt = system.tau(pt)
    return x


def _horseshoe_leaf_samples(system: AffineHorseshoe, xi: CodePoint, delta: float, samples: int) -> List[CodePoint]:
    """Points of the unstable slice of ``xi`` within ``delta``: depth-m codes with both fixed-point tails."""
    m = max(1, int(math.ceil(math.log2(max(2, samples // 2)))))
    # Stay inside the delta-neighbourhood by fixing a prefix of xi when delta < 1.
    q = 0
    while q < 64 and system.kappa ** (-q) > delta:
        q += 1
    prefix = xi.future.take(q)
    centre = system.unstable_coordinate(xi)
    out = []
    for word in word_array(system.base_shift, m).tolist():
        for tail in ((0,), (1,)):
            eta = CodePoint(Ray(prefix + tuple(word), tail), xi.past)
            if abs(float(system.unstable_coordinate(eta) - centre)) <= delta:
                out.append(eta)
    return out


def delta_u_estimate(system: SkewSystem, xi, delta: float, samples: int = 256, n: Optional[int] = None,
                     depth: int = DEFAULT_DEPTH) -> float:
    """``max |Phi(eta) - gamma^{u,n}_xi(eta)|`` over sampled ``eta`` within ``delta`` on the unstable leaf."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if isinstance(system, AffineHorseshoe):
        n = 40 if n is None else n
        etas = _horseshoe_leaf_samples(system, xi, delta, samples)
        start = _back_graph_value(system, xi, n, depth)
        return float(max(abs(system.graph_exact(eta) - _push_forward(system, start, eta, n)) for eta in etas))
    # Float cocycles amplify rounding by lambda^n; the comparison curve has
    # converged to double precision well before n = 24.
    n = 20 if n is None else n
    bits = 30
    reach = delta / math.hypot(*CAT_UNSTABLE) if isinstance(system, AffineAnosov) else delta
    idx = np.unique(np.round(np.linspace(-reach, reach, samples) * (1 << bits)).astype(np.int64))
    phi = _leaf_values(system, xi, idx, bits, depth)
    gamma = _leaf_gamma(system, xi, idx, bits, n, depth)
    return float(np.max(np.abs(phi - gamma)))


def _leaf_values(system, xi, idx, bits, depth):
    if isinstance(system, AffineAnosov):
        if xi.offset != 0.0:
            raise ValueError("leaf probes must have zero offset")
        return _anosov_leaf_values(system, xi, idx, bits, depth)
    return _baker_leaf_values(system, xi, idx, bits, depth)


def _leaf_gamma(system, xi, idx, bits, n, depth):
    """Vectorised ``gamma^{u,n}_xi`` at ``eta = xi + (idx / 2**bits)`` along the unstable direction.

    ``tau^-n eta`` is ``tau^-n xi`` displaced by ``s kappa^-n`` (cat map) or
    ``s b^-n`` (baker); the forward fiber maps are then applied in floats.
    """
    s = idx.astype(float) / float(1 << bits)
    x = np.full(len(idx), float(_back_graph_value(system, xi, n, depth)))
    lam = system.constants.lambda_w
    if isinstance(system, AffineAnosov):
        for j in range(n):
            # T_zeta(x) = lam (x - p(tau zeta)) with tau zeta = tau^{j+1-n} eta.
            a1, a2 = system.tau_power(xi, j + 1 - n).anchor
            scale = s * system.kappa ** (j + 1 - n)
            x1 = (float(a1) + scale * CAT_UNSTABLE[0]) % 1.0
            x2 = (float(a2) + scale * CAT_UNSTABLE[1]) % 1.0
            x = lam * (x - system.forcing(x1, x2))
        return x
    back = xi
    for _ in range(n):
        back = system.tau_inv(back)
    start = Fraction(back.coordinate)
    for j in range(n):
        # zeta = tau^{j-n} eta has first coordinate b^j (start + s b^-n) mod 1.
        first = float((system.b ** j * start) % 1) + s * float(system.b) ** (j - n)
        x = lam * (x - np.cos(2 * np.pi * first))
    return x


# ---------------------------------------------------------------------------
# Hoelder exponent and regularity


@dataclass(frozen=True)
class ScaleFit:
    slope: float
    intercept: float
    stderr: float
    window: Tuple[int, int]
    scales: Tuple[int, ...]
    values: Tuple[float, ...]


def fit_log_slope(xs, ys, robust: bool = False) -> Tuple[float, float, float]:
    """Slope, intercept and slope standard error of ``ys`` against ``xs``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2:
        raise InsufficientResolution("need at least two scales to fit a slope")
    if robust:
        from scipy.stats import theilslopes
        slope, intercept, lo, hi = theilslopes(ys, xs)
        return float(slope), float(intercept), float((hi - lo) / 4.0)
    (slope, intercept), cov = np.polyfit(xs, ys, 1, cov=True) if len(xs) > 2 else (np.polyfit(xs, ys, 1), None)
    stderr = float(math.sqrt(max(cov[0, 0], 0.0))) if cov is not None else 0.0
    return float(slope), float(intercept), stderr


def default_window(j_min: int, j_max: int, drop: int = 2) -> Tuple[int, int]:
    lo, hi = j_min + drop, j_max - drop
    if hi - lo < 1:
        return j_min, j_max
    return lo, hi


def oscillations(graph: SampledGraph, scales: Sequence[int], domain: Tuple[float, float] = (0.0, 1.0)) -> np.ndarray:
    """Maximal oscillation of the values over dyadic windows of size ``2^-j`` of the domain."""
    lo, hi = domain
    u = (graph.param - lo) / (hi - lo)
    out = []
    for j in scales:
        cells = np.minimum((u * (1 << j)).astype(np.int64), (1 << j) - 1)
        # param is sorted, so cells are contiguous runs.
        starts = np.flatnonzero(np.r_[True, cells[1:] != cells[:-1]])
        mx = np.maximum.reduceat(graph.value, starts)
        mn = np.minimum.reduceat(graph.value, starts)
        out.append(float(np.max(mx - mn)))
    return np.array(out)


def holder_exponent_estimate(graph: SampledGraph, ladder: Optional[Tuple[int, int]] = None,
                             window: Optional[Tuple[int, int]] = None,
                             domain: Tuple[float, float] = (0.0, 1.0)) -> ScaleFit:
    """Slope of log(max oscillation over windows of size 2^-j) against log 2^-j.

    The default ladder is ``j = 1 .. log2(points) - 2`` and the fit drops
    two scales at each end.  The slope is clamped to ``(0, 1]``; a graph
    with no oscillation reports 1.
    """
    count = len(graph)
    top = int(math.floor(math.log2(count))) - 2
    j_min, j_max = ladder if ladder is not None else (1, top)
    if count < 2 ** (j_max + 2):
        raise InsufficientResolution(f"{count} points cannot resolve scale 2^-{j_max}; need {2 ** (j_max + 2)}")
    lo, hi = window if window is not None else default_window(j_min, j_max)
    if not (j_min <= lo < hi <= j_max):
        raise ValueError(f"window {lo}:{hi} must lie inside the ladder {j_min}:{j_max}")
    scales = tuple(range(lo, hi + 1))
    osc = oscillations(graph, scales, domain)
    floor = 1e-12 * max(1.0, float(np.max(np.abs(graph.value))))
    if np.all(osc <= floor):
        return ScaleFit(1.0, 0.0, 0.0, (lo, hi), scales, tuple(osc.tolist()))
    osc = np.maximum(osc, floor)
    xs = -np.array(scales, dtype=float) * math.log(2.0)
    slope, intercept, stderr = fit_log_slope(xs, np.log(osc))
    slope = min(1.0, max(slope, np.finfo(float).tiny))
    return ScaleFit(slope, intercept, stderr, (lo, hi), scales, tuple(osc.tolist()))


@dataclass(frozen=True)
class RegularityReport:
    delta_u_estimate: float
    holder_exponent: float
    critical_exponent: float
    verdict: str
    tolerance: float
    probe_values: Tuple[float, ...] = field(default=())

    def lines(self):
        yield f"verdict={self.verdict}"
        yield f"delta_u_estimate={self.delta_u_estimate:.6e}"
        yield f"lipschitz_tolerance={self.tolerance:.3e}"
        yield f"holder_exponent={self.holder_exponent:.6f}"
        yield f"critical_exponent={self.critical_exponent:.6f}"


def regularity_probes(system: SkewSystem, seed: int = 0, count: int = 8) -> list:
    """Fixed points plus ``count`` seeded random base points."""
    rng = np.random.default_rng(seed)
    if isinstance(system, AffineHorseshoe):
        probes = [CodePoint.constant(0), CodePoint.constant(1)]
        for _ in range(count):
            fut = tuple(int(v) for v in rng.integers(0, 2, 8))
            past = tuple(int(v) for v in rng.integers(0, 2, 8))
            probes.append(CodePoint(Ray(fut, (int(rng.integers(0, 2)),)), Ray(past, (int(rng.integers(0, 2)),))))
        return probes
    if isinstance(system, AffineAnosov):
        probes = [TorusPoint()]
        for _ in range(count):
            a = rng.integers(0, 1 << 16, 2)
            probes.append(TorusPoint((Fraction(int(a[0]), 1 << 16), Fraction(int(a[1]), 1 << 16))))
        return probes
    probes = [CirclePoint()]
    for _ in range(count):
        probes.append(CirclePoint(Fraction(int(rng.integers(0, 1 << 16)), 1 << 16)))
    return probes


def classify_regularity(system: SkewSystem, seed: int = 0, samples: int = 256, bits: int = 14,
                        tolerance: float = LIPSCHITZ_TOLERANCE) -> RegularityReport:
    """Lipschitz versus critically Hoelder verdict from the comparison-curve obstruction."""
    delta = 1.0 if isinstance(system, AffineHorseshoe) else 0.5
    values = tuple(delta_u_estimate(system, probe, delta, samples) for probe in regularity_probes(system, seed))
    estimate = max(values)
    scaled_tol = tolerance * (system.fiber_diameter or 1.0)
    verdict = "lipschitz" if estimate <= scaled_tol else "critical_holder"
    holder = holder_exponent_estimate(sample_unstable_slice(system, bits=bits)).slope
    return RegularityReport(estimate, holder, system.constants.critical_exponent, verdict, scaled_tol, values)
