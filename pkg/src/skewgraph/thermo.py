"""Topological pressure of locally constant potentials and pressure-equation roots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import BracketFailure, BudgetExceeded, DepthTooLarge, NotMonotone
from .symbolic import DEFAULT_WORD_BUDGET, OneSidedPotential, ShiftSpace, birkhoff_sums, word_array

DEFAULT_MAX_DEPTH = 4
DEFAULT_MAX_STATES = 4096
ROOT_TOLERANCE = 1e-12
INITIAL_BRACKET = (0.0, 4.0)
OUTER_BRACKET = (-8.0, 16.0)


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    method: str  # "exact_spectral" or "cylinder_extrapolated"
    n_ladder: Tuple[int, ...] = ()
    residuals: Tuple[float, ...] = ()
    error_bound: float = 0.0
    r_squared: Optional[float] = None
    poor_fit: bool = False


@dataclass(frozen=True)
class DimensionRoot:
    d: float
    pressure_at_root: float
    bracket: Tuple[float, float]
    iterations: int
    method: str = "exact_spectral"


def _log_spectral_radius(log_weights: np.ndarray) -> float:
    """log of the spectral radius of ``exp(log_weights)`` (−inf entries are zeros)."""
    finite = np.isfinite(log_weights)
    shift = float(log_weights[finite].max())
    mat = np.where(finite, np.exp(log_weights - shift), 0.0)
    rho = float(np.max(np.abs(np.linalg.eigvals(mat))))
    return math.log(rho) + shift


def pressure_exact(shift: ShiftSpace, psi: OneSidedPotential, max_depth: int = DEFAULT_MAX_DEPTH,
                   max_states: int = DEFAULT_MAX_STATES) -> PressureEstimate:
    """Pressure as the log spectral radius of the weighted transfer matrix.

    States are admissible words of length ``max(depth, 1)``; the edge
    ``u -> v`` (with ``v`` the left shift of ``u`` extended by one symbol)
    carries weight ``exp(psi(u))``.
    """
    if psi.alphabet_size is not None and psi.alphabet_size != shift.alphabet_size:
        raise ValueError("potential and shift have different alphabets")
    k = psi.depth
    if k == 0:
        return PressureEstimate(shift.entropy() + float(psi.values), "exact_spectral",
                                error_bound=_eig_tolerance(shift.alphabet_size))
    if shift.entropy_override is not None:
        raise ValueError("entropy_override only supports constant potentials")
    if k > max_depth:
        raise DepthTooLarge(f"potential depth {k} exceeds max_depth {max_depth}")
    n_states = shift.count_words(k)
    if n_states > max_states:
        raise DepthTooLarge(f"transfer matrix would have {n_states} states (limit {max_states})")
    states = word_array(shift, k)
    N = shift.alphabet_size
    index = {tuple(w): i for i, w in enumerate(states.tolist())}
    logw = np.full((n_states, n_states), -np.inf)
    vals = np.asarray(psi.values)
    for i, w in enumerate(states.tolist()):
        weight = float(vals[tuple(w)])
        for b in range(N):
            if shift.allowed(w[-1], b):
                logw[i, index[tuple(w[1:]) + (b,)]] = weight
    return PressureEstimate(_log_spectral_radius(logw), "exact_spectral",
                            error_bound=_eig_tolerance(n_states))


def _eig_tolerance(size: int) -> float:
    return 10.0 * size * np.finfo(float).eps


def cylinder_pressure(shift: ShiftSpace, psi: OneSidedPotential, n: int,
                      budget: int = DEFAULT_WORD_BUDGET) -> float:
    """``(1/n) log sum_w exp(S_n psi)`` over length-n cylinders (periodic representatives)."""
    if shift.entropy_override is not None:
        if psi.depth:
            raise ValueError("entropy_override only supports constant potentials")
        return shift.entropy() + float(psi.values)
    words = word_array(shift, n, budget)
    sums = birkhoff_sums(psi, words, shift)
    return float(logsumexp(sums)) / n


def pressure_cylinder(shift: ShiftSpace, psi: OneSidedPotential, n_ladder: Sequence[int],
                      budget: int = DEFAULT_WORD_BUDGET) -> PressureEstimate:
    """Cylinder pressures ``P_n`` on a ladder, extrapolated with ``P_n = P + c/n``."""
    ladder = tuple(int(n) for n in n_ladder)
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < 1:
        raise ValueError("n_ladder must be a non-empty increasing list of positive integers")
    if shift.count_words(ladder[-1]) > budget:
        raise BudgetExceeded(f"{shift.count_words(ladder[-1])} words at n={ladder[-1]} exceed budget {budget}")
    values = np.array([cylinder_pressure(shift, psi, n, budget) for n in ladder])
    if len(ladder) == 1:
        return PressureEstimate(float(values[0]), "cylinder_extrapolated", ladder, tuple(values.tolist()),
                                error_bound=float("nan"), poor_fit=True)
    inv = 1.0 / np.array(ladder, dtype=float)
    slope, intercept = np.polyfit(inv, values, 1)
    fitted = intercept + slope * inv
    ss_tot = float(np.sum((values - values.mean()) ** 2))
    ss_res = float(np.sum((values - fitted) ** 2))
    # A constant sequence is a perfect fit.
    r2 = 1.0 if ss_tot <= 1e-28 else 1.0 - ss_res / ss_tot
    return PressureEstimate(float(intercept), "cylinder_extrapolated", ladder, tuple(values.tolist()),
                            error_bound=abs(float(values[-1]) - float(intercept)),
                            r_squared=r2, poor_fit=r2 < 0.99)


def pressure(shift: ShiftSpace, psi: OneSidedPotential, n_ladder: Sequence[int] = tuple(range(8, 17)),
             max_depth: int = DEFAULT_MAX_DEPTH) -> PressureEstimate:
    """Exact pressure when the depth allows, cylinder extrapolation otherwise."""
    try:
        return pressure_exact(shift, psi, max_depth=max_depth)
    except DepthTooLarge:
        return pressure_cylinder(shift, psi, n_ladder)


def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> Tuple[float, float, int]:
    f_lo = f(lo)
    it = 0
    while hi - lo > tol and it < 200:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        it += 1
        if f_mid == 0.0:
            return mid, 0.0, it
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return root, f(root), it


def _solve_decreasing(f: Callable[[float], float], tol: float, method: str) -> DimensionRoot:
    lo, hi = INITIAL_BRACKET
    f_lo, f_hi = f(lo), f(hi)
    while f_lo < 0 and lo > OUTER_BRACKET[0]:
        lo = max(OUTER_BRACKET[0], lo - 2.0 * (hi - lo))
        f_lo = f(lo)
    while f_hi > 0 and hi < OUTER_BRACKET[1]:
        hi = min(OUTER_BRACKET[1], hi + 2.0 * (hi - lo))
        f_hi = f(hi)
    if not (f_lo >= 0 >= f_hi):
        raise BracketFailure(f"no sign change of the pressure on [{lo}, {hi}]")
    if f_lo == 0:
        return DimensionRoot(lo, 0.0, (lo, hi), 0, method)
    if f_hi == 0:
        return DimensionRoot(hi, 0.0, (lo, hi), 0, method)
    root, value, it = _bisect(f, lo, hi, tol)
    return DimensionRoot(root, value, (lo, hi), it, method)


def _evaluator(shift: ShiftSpace, n_ladder, max_depth):
    def evaluate(psi: OneSidedPotential) -> Tuple[float, str]:
        est = pressure(shift, psi, n_ladder=n_ladder, max_depth=max_depth)
        return est.value, est.method
    return evaluate


def solve_pressure_root(shift: ShiftSpace, phi_cu: OneSidedPotential, phi_u: OneSidedPotential,
                        tol: float = ROOT_TOLERANCE, n_ladder: Sequence[int] = tuple(range(8, 17)),
                        max_depth: int = DEFAULT_MAX_DEPTH) -> DimensionRoot:
    """Unique ``d`` with ``P(phi_cu + (d - 1) phi_u) = 0``."""
    if phi_u.sup >= 0:
        raise NotMonotone("phi_u must be strictly negative")
    evaluate = _evaluator(shift, n_ladder, max_depth)
    methods = set()

    def f(d):
        value, method = evaluate(phi_cu + (d - 1.0) * phi_u)
        methods.add(method)
        return value

    root = _solve_decreasing(f, tol, "")
    return DimensionRoot(root.d, root.pressure_at_root, root.bracket, root.iterations, "+".join(sorted(methods)))


def solve_bowen(shift: ShiftSpace, phi: OneSidedPotential, tol: float = ROOT_TOLERANCE,
                n_ladder: Sequence[int] = tuple(range(8, 17)),
                max_depth: int = DEFAULT_MAX_DEPTH) -> DimensionRoot:
    """Unique ``d`` with ``P(d * phi) = 0``."""
    if phi.sup >= 0:
        raise NotMonotone("phi must be strictly negative")
    evaluate = _evaluator(shift, n_ladder, max_depth)
    methods = set()

    def f(d):
        value, method = evaluate(d * phi)
        methods.add(method)
        return value

    root = _solve_decreasing(f, tol, "")
    return DimensionRoot(root.d, root.pressure_at_root, root.bracket, root.iterations, "+".join(sorted(methods)))


def solve_linear_root(shift: ShiftSpace, psi1: OneSidedPotential, psi2: OneSidedPotential,
                      tol: float = ROOT_TOLERANCE, **kwargs) -> DimensionRoot:
    """Unique ``t`` with ``P(t psi1 + psi2) = 0`` (``psi1`` strictly negative)."""
    if psi1.sup >= 0:
        raise NotMonotone("psi1 must be strictly negative")
    # P(t psi1 + psi2) = P(psi2 + psi1 + (t - 1) psi1): reuse the general solver.
    return solve_pressure_root(shift, psi2 + psi1, psi1, tol=tol, **kwargs)
