"""Concrete skew products ``T(xi, x) = (tau(xi), T_xi(x))`` and their configs.

All systems are stored in the expanding convention: the fiber maps
``T_xi`` expand by ``lambda`` and the invariant graph is the repeller
obtained by folding the contracting inverse maps

    Phi(xi) = T_xi^{-1}(Phi(tau xi)).

Every fiber inverse here is affine with slope ``1/lambda``, so a system only
has to provide the offsets ``c(xi)`` in ``T_xi^{-1}(y) = y / lambda + c(xi)``.

Base points
-----------
* :class:`TorusPoint` -- ``anchor + offset * kappa**power * w`` on the 2-torus,
  where ``w`` is the unstable direction of ``tau``.  Rational anchors are
  iterated exactly and the displacement is reduced mod 1 without rounding.
* :class:`CodePoint` -- two-sided eventually periodic code for the horseshoe.
* :class:`CirclePoint` -- first coordinate of the baker map (the graph does
  not depend on the second one).
"""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, InvalidParameters
from .symbolic import OneSidedPotential, ShiftSpace

try:  # Python < 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib
import tomli_w

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
CAT_KAPPA = GOLDEN ** 2  # (3 + sqrt 5) / 2
CAT_MATRIX = ((2, 1), (1, 1))
# Expanding base map tau = A^{-1}; its unstable direction is A's stable eigenvector.
CAT_INVERSE = ((1, -1), (-1, 2))
CAT_UNSTABLE = (1.0, -GOLDEN)

Number = Union[int, float, Fraction]


# ---------------------------------------------------------------------------
# Constants


@dataclass(frozen=True)
class HyperbolicityConstants:
    mu_s: float
    mu_w: float
    lambda_w: float
    lambda_s: float
    kappa_w: float
    kappa_s: float

    def __post_init__(self):
        chain = [0.0, self.mu_s, self.mu_w, 1.0, self.lambda_w, self.lambda_s, self.kappa_w, self.kappa_s]
        names = ["0", "mu_s", "mu_w", "1", "lambda_w", "lambda_s", "kappa_w", "kappa_s"]
        strict = {(0, 1), (2, 3), (3, 4), (5, 6)}
        for i in range(len(chain) - 1):
            a, b = chain[i], chain[i + 1]
            ok = a < b if (i, i + 1) in strict else a <= b
            if not ok:
                op = "<" if (i, i + 1) in strict else "<="
                raise InvalidParameters(f"constants violate {names[i]} {op} {names[i + 1]} ({a} vs {b})")

    @classmethod
    def affine(cls, mu: float, lam: float, kappa: float) -> "HyperbolicityConstants":
        return cls(mu, mu, lam, lam, kappa, kappa)

    @property
    def critical_exponent(self) -> float:
        return math.log(self.lambda_s) / math.log(self.kappa_w)


@dataclass(frozen=True)
class GeometricPotentials:
    phi_s: OneSidedPotential
    phi_u: OneSidedPotential
    phi_cu: OneSidedPotential


# ---------------------------------------------------------------------------
# Fourier forcing


_BASIS = {"s": np.sin, "c": np.cos}


@dataclass(frozen=True)
class FourierTerm:
    """``amplitude * f(2 pi m xi_1) * g(2 pi n xi_2)`` with ``basis = f g`` in {s, c}^2."""

    amplitude: float
    basis: str
    m: int
    n: int

    def __post_init__(self):
        if len(self.basis) != 2 or any(ch not in _BASIS for ch in self.basis):
            raise InvalidParameters(f"basis tag must be two letters from 's','c', got {self.basis!r}")
        if int(self.m) != self.m or int(self.n) != self.n:
            raise InvalidParameters("Fourier frequencies must be integers")


@dataclass(frozen=True)
class FourierForcing:
    terms: Tuple[FourierTerm, ...]

    @classmethod
    def from_list(cls, rows) -> "FourierForcing":
        terms = []
        for row in rows:
            if len(row) != 4:
                raise InvalidParameters(f"forcing term must be [amplitude, basis, m, n], got {row!r}")
            a, basis, m, n = row
            terms.append(FourierTerm(float(a), str(basis), int(m), int(n)))
        return cls(tuple(terms))

    def to_list(self):
        return [[t.amplitude, t.basis, t.m, t.n] for t in self.terms]

    def __call__(self, x1, x2):
        """Evaluate at base coordinates (values mod 1 are enough)."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        for term in self.terms:
            f, g = _BASIS[term.basis[0]], _BASIS[term.basis[1]]
            out = out + term.amplitude * f(2 * np.pi * term.m * x1) * g(2 * np.pi * term.n * x2)
        return out

    @property
    def sup_bound(self) -> float:
        return float(sum(abs(t.amplitude) for t in self.terms))

    @property
    def lipschitz_bound(self) -> float:
        return float(sum(abs(t.amplitude) * 2 * np.pi * math.hypot(t.m, t.n) for t in self.terms))


DEFAULT_FORCING = FourierForcing.from_list([[1.0, "ss", 1, 1], [1.0, "cc", 0, 2]])
ZERO_FORCING = FourierForcing(())


# ---------------------------------------------------------------------------
# Base points


@functools.lru_cache(maxsize=512)
def _cat_power(k: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Integer matrix of ``tau^k`` (``k < 0`` gives powers of the cat matrix)."""
    base = CAT_INVERSE if k >= 0 else CAT_MATRIX
    mat = ((1, 0), (0, 1))
    for _ in range(abs(k)):
        mat = tuple(tuple(sum(mat[i][r] * base[r][j] for r in range(2)) for j in range(2)) for i in range(2))
    return mat


@functools.lru_cache(maxsize=512)
def lucas(n: int) -> int:
    """Lucas number ``L_n`` (``L_0 = 2``, ``L_1 = 1``), so ``golden**n + (-1/golden)**n = L_n``."""
    a, b = 2, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def _frac_times(x: float, integer: int) -> Fraction:
    """Exact fractional part of ``x * integer`` for a float ``x``."""
    num, den = float(x).as_integer_ratio()
    return Fraction((num * integer) % den, den)


def unstable_displacement_mod1(offset: float, power: int) -> Tuple[Fraction, Fraction, float, float]:
    """Displacement ``offset * kappa**power * w`` mod 1, split into an exact and a tiny float part.

    Uses ``kappa**k = L_{2k} - golden**(-2k)`` and
    ``golden * kappa**k = L_{2k+1} + golden**(-(2k+1))`` so that no large
    float is ever formed.  Returns ``(e1, e2, f1, f2)`` with the displacement
    equal to ``(e1 + f1, e2 + f2)`` mod 1.
    """
    if power <= 0:
        scale = offset * CAT_KAPPA ** power
        return Fraction(0), Fraction(0), scale * CAT_UNSTABLE[0], scale * CAT_UNSTABLE[1]
    e1 = _frac_times(offset, lucas(2 * power))
    e2 = -_frac_times(offset, lucas(2 * power + 1))
    f1 = -offset * GOLDEN ** (-2 * power)
    f2 = -offset * GOLDEN ** (-(2 * power + 1))
    return e1, e2, f1, f2


@dataclass(frozen=True)
class TorusPoint:
    """The torus point ``anchor + offset * kappa**power * w`` with ``w = (1, -golden)``.

    Rational anchors are iterated exactly; the unstable displacement is kept
    symbolically so that iterating along the slice never loses precision.
    """

    anchor: Tuple[Number, Number] = (Fraction(0), Fraction(0))
    offset: float = 0.0
    power: int = 0

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.anchor)

    def coordinates(self) -> Tuple[float, float]:
        e1, e2, f1, f2 = unstable_displacement_mod1(self.offset, self.power)
        a1, a2 = self.anchor
        if self.exact:
            return (float((a1 + e1) % 1) + f1) % 1.0, (float((a2 + e2) % 1) + f2) % 1.0
        return (float(a1) + float(e1) + f1) % 1.0, (float(a2) + float(e2) + f2) % 1.0

    @property
    def leaf_offset(self) -> float:
        """Displacement along ``w`` from the anchor, as a float."""
        return self.offset * CAT_KAPPA ** self.power


@dataclass(frozen=True)
class Ray:
    """Eventually periodic one-sided sequence ``prefix cycle cycle ...``."""

    prefix: Tuple[int, ...] = ()
    cycle: Tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be non-empty")
        object.__setattr__(self, "prefix", tuple(int(s) for s in self.prefix))
        object.__setattr__(self, "cycle", tuple(int(s) for s in self.cycle))

    def __getitem__(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def take(self, n: int) -> Tuple[int, ...]:
        return tuple(self[i] for i in range(n))

    def pop(self) -> Tuple[int, "Ray"]:
        """First symbol and the remaining ray."""
        if self.prefix:
            return self.prefix[0], Ray(self.prefix[1:], self.cycle)
        return self.cycle[0], Ray((), self.cycle[1:] + self.cycle[:1])

    def push(self, symbol: int) -> "Ray":
        return Ray((int(symbol),) + self.prefix, self.cycle)


@dataclass(frozen=True)
class CodePoint:
    """Two-sided horseshoe code: ``past`` lists ``i_{-1}, i_{-2}, ...``; ``future`` lists ``i_0, i_1, ...``."""

    future: Ray = Ray()
    past: Ray = Ray()

    @classmethod
    def constant(cls, symbol: int) -> "CodePoint":
        return cls(Ray((), (symbol,)), Ray((), (symbol,)))

    @classmethod
    def from_future(cls, prefix: Sequence[int], cycle: Sequence[int] = (0,), past: Optional[Ray] = None) -> "CodePoint":
        return cls(Ray(tuple(prefix), tuple(cycle)), past if past is not None else Ray())


@dataclass(frozen=True)
class CirclePoint:
    coordinate: Number = Fraction(0)
    second: Number = Fraction(0)


# ---------------------------------------------------------------------------
# Systems


def _ray_value(ray: Ray, digit_weight, ratio: Fraction) -> Fraction:
    """``sum_k digit_weight(i_k) * ratio**(k+1)`` for an eventually periodic ray (exact)."""
    head = Fraction(0)
    scale = Fraction(1)
    for s in ray.prefix:
        scale *= ratio
        head += digit_weight(s) * scale
    cyc = Fraction(0)
    cscale = Fraction(1)
    for s in ray.cycle:
        cscale *= ratio
        cyc += digit_weight(s) * cscale
    return head + scale * cyc / (1 - cscale)


@dataclass(frozen=True)
class AffineHorseshoe:
    """Affine horseshoe with fiber maps ``x -> lambda x`` and ``x -> lambda x - t``.

    The unstable base coordinate lives on ``[0, 1]``: branch 0 maps
    ``[0, 1/kappa]`` onto ``[0, 1]`` and branch 1 maps ``[1 - 1/kappa, 1]``
    onto ``[0, 1]``, so the fixed points are ``0`` and ``1``.
    """

    mu: float = 0.25
    lam: float = 1.5
    kappa: float = 4.0
    t: float = 0.5
    kind: str = field(default="affine_horseshoe", init=False)

    def __post_init__(self):
        if not 0 < self.mu < 0.5:
            raise InvalidParameters(f"need 0 < mu < 1/2, got mu={self.mu}")
        if not 1 < self.lam < self.kappa:
            raise InvalidParameters(f"need 1 < lambda < kappa, got lambda={self.lam}, kappa={self.kappa}")
        if not self.kappa > 2:
            raise InvalidParameters(f"need kappa > 2, got kappa={self.kappa}")
        if not math.isfinite(self.t):
            raise InvalidParameters("t must be finite")

    @property
    def constants(self) -> HyperbolicityConstants:
        return HyperbolicityConstants.affine(self.mu, self.lam, self.kappa)

    @property
    def base_shift(self) -> ShiftSpace:
        return ShiftSpace.full(2)

    @property
    def blender_regime(self) -> bool:
        return self.t != 0 and 1 < self.lam < 2

    @property
    def fiber_range(self) -> Tuple[float, float]:
        top = self.t / (self.lam - 1)
        return (min(0.0, top), max(0.0, top))

    @property
    def fiber_diameter(self) -> float:
        lo, hi = self.fiber_range
        return hi - lo

    # dynamics
    def tau(self, pt: CodePoint) -> CodePoint:
        s, fut = pt.future.pop()
        return CodePoint(fut, pt.past.push(s))

    def tau_inv(self, pt: CodePoint) -> CodePoint:
        s, past = pt.past.pop()
        return CodePoint(pt.future.push(s), past)

    def fiber_map(self, pt: CodePoint, x):
        return self.lam * x - self.t * pt.future[0]

    def fiber_inverse(self, pt: CodePoint, y):
        return (y + self.t * pt.future[0]) / self.lam

    def fiber_offsets(self, pt: CodePoint, n: int) -> np.ndarray:
        return self.t * np.array(pt.future.take(n), dtype=float) / self.lam

    # closed forms (exact in the binary values of the float parameters)
    def unstable_coordinate(self, pt: CodePoint) -> Fraction:
        k = Fraction(self.kappa)
        return _ray_value(pt.future, lambda s: s * (k - 1), 1 / k)

    def stable_coordinate(self, pt: CodePoint) -> Fraction:
        mu = Fraction(self.mu)
        return _ray_value(pt.past, lambda s: s * (1 - mu) / mu, mu)

    def graph_exact(self, pt: CodePoint) -> Fraction:
        lam = Fraction(self.lam)
        t = Fraction(self.t)
        return _ray_value(pt.future, lambda s: s * t, 1 / lam)

    def geometric_potentials(self) -> GeometricPotentials:
        return GeometricPotentials(OneSidedPotential.constant(math.log(self.mu)),
                                   OneSidedPotential.constant(-math.log(self.kappa)),
                                   OneSidedPotential.constant(-math.log(self.lam)))

    def to_config(self) -> dict:
        return {"kind": self.kind, "mu": self.mu, "lambda": self.lam, "kappa": self.kappa, "t": self.t}


@dataclass(frozen=True)
class AffineAnosov:
    """Cat-map base with affine fibers: ``T_xi^{-1}(y) = y / lambda + p(tau xi)``, ``tau = A^{-1}``.

    This is the inverse of the contracting map ``(xi, x) -> (A xi, p(xi) + x / lambda)``.
    """

    lam: float = 1.5
    forcing: FourierForcing = DEFAULT_FORCING
    kind: str = field(default="affine_anosov", init=False)

    def __post_init__(self):
        if not 1 < self.lam < CAT_KAPPA:
            raise InvalidParameters(f"need 1 < lambda < kappa = {CAT_KAPPA:.6f}, got lambda={self.lam}")

    @property
    def kappa(self) -> float:
        return CAT_KAPPA

    @property
    def constants(self) -> HyperbolicityConstants:
        return HyperbolicityConstants.affine(1.0 / CAT_KAPPA, self.lam, CAT_KAPPA)

    @property
    def base_matrix(self) -> np.ndarray:
        return np.array(CAT_MATRIX, dtype=np.int64)

    @property
    def base_shift(self) -> ShiftSpace:
        # Symbolic stand-in: only the entropy enters for constant potentials.
        return ShiftSpace.full(2, entropy_override=math.log(CAT_KAPPA))

    @property
    def fiber_diameter(self) -> float:
        return 2.0 * self.forcing.sup_bound * self.lam / (self.lam - 1.0)

    def tau(self, pt: TorusPoint) -> TorusPoint:
        return self.tau_power(pt, 1)

    def tau_inv(self, pt: TorusPoint) -> TorusPoint:
        return self.tau_power(pt, -1)

    def tau_power(self, pt: TorusPoint, k: int) -> TorusPoint:
        """``tau^k`` (negative ``k`` means forward iterates of the cat matrix)."""
        (m00, m01), (m10, m11) = _cat_power(k)
        a1, a2 = pt.anchor
        b1 = m00 * a1 + m01 * a2
        b2 = m10 * a1 + m11 * a2
        if pt.exact:
            b1, b2 = Fraction(b1) % 1, Fraction(b2) % 1
        else:
            b1, b2 = float(b1) % 1.0, float(b2) % 1.0
        return TorusPoint((b1, b2), pt.offset, pt.power + k)

    def forcing_at(self, pt: TorusPoint) -> float:
        x1, x2 = pt.coordinates()
        return float(self.forcing(x1, x2))

    def fiber_map(self, pt: TorusPoint, x):
        return self.lam * (x - self.forcing_at(self.tau(pt)))

    def fiber_inverse(self, pt: TorusPoint, y):
        return y / self.lam + self.forcing_at(self.tau(pt))

    def fiber_offsets(self, pt: TorusPoint, n: int) -> np.ndarray:
        return np.array([self.forcing_at(self.tau_power(pt, k + 1)) for k in range(n)])

    def geometric_potentials(self) -> GeometricPotentials:
        return GeometricPotentials(OneSidedPotential.constant(-math.log(CAT_KAPPA)),
                                   OneSidedPotential.constant(-math.log(CAT_KAPPA)),
                                   OneSidedPotential.constant(-math.log(self.lam)))

    def to_config(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "p": self.forcing.to_list()}


@dataclass(frozen=True)
class BakerWeierstrass:
    """Baker base ``tau(xi) = (b xi_1 mod 1, (xi_2 + floor(b xi_1)) / b)``, fiber ``x -> lambda (x - cos 2 pi xi_1)``."""

    lam: float = 1.5
    b: int = 3
    kind: str = field(default="baker_weierstrass", init=False)

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise InvalidParameters(f"b must be an integer >= 2, got {self.b}")
        object.__setattr__(self, "b", int(self.b))
        if not self.lam > 1:
            raise InvalidParameters(f"need lambda > 1, got {self.lam}")
        if not self.lam < self.b:
            raise InvalidParameters(f"need lambda < b, got lambda={self.lam}, b={self.b}")

    @property
    def kappa(self) -> float:
        return float(self.b)

    @property
    def constants(self) -> HyperbolicityConstants:
        return HyperbolicityConstants.affine(1.0 / self.b, self.lam, float(self.b))

    @property
    def base_shift(self) -> ShiftSpace:
        return ShiftSpace.full(self.b)

    @property
    def fiber_diameter(self) -> float:
        return 2.0 * self.lam / (self.lam - 1.0)

    def tau(self, pt: CirclePoint) -> CirclePoint:
        x1, x2 = pt.coordinate, pt.second
        digit = math.floor(self.b * x1)
        return CirclePoint((self.b * x1) % 1, (x2 + digit) / self.b)

    def tau_inv(self, pt: CirclePoint) -> CirclePoint:
        y1, y2 = pt.coordinate, pt.second
        digit = math.floor(self.b * y2)
        return CirclePoint((y1 + digit) / self.b, (self.b * y2) % 1)

    def fiber_map(self, pt: CirclePoint, x):
        return self.lam * (x - math.cos(2 * math.pi * float(pt.coordinate)))

    def fiber_inverse(self, pt: CirclePoint, y):
        return y / self.lam + math.cos(2 * math.pi * float(pt.coordinate))

    def fiber_offsets(self, pt: CirclePoint, n: int) -> np.ndarray:
        x = pt.coordinate
        out = np.empty(n)
        for k in range(n):
            out[k] = math.cos(2 * math.pi * float(x))
            x = (self.b * x) % 1
        return out

    def geometric_potentials(self) -> GeometricPotentials:
        return GeometricPotentials(OneSidedPotential.constant(-math.log(self.b)),
                                   OneSidedPotential.constant(-math.log(self.b)),
                                   OneSidedPotential.constant(-math.log(self.lam)))

    def to_config(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "b": self.b}


SkewSystem = Union[AffineAnosov, AffineHorseshoe, BakerWeierstrass]
KINDS = ("affine_anosov", "affine_horseshoe", "baker_weierstrass")


def geometric_potentials(system: SkewSystem) -> GeometricPotentials:
    return system.geometric_potentials()


# ---------------------------------------------------------------------------
# Hypotheses


@dataclass(frozen=True)
class HypothesisReport:
    standing_ok: bool
    pinching_ok: bool
    inequalities: Tuple[Tuple[str, float, float, float], ...]  # (label, lhs, rhs, margin rhs - lhs)

    def lines(self):
        yield f"standing_ok={str(self.standing_ok).lower()}"
        yield f"pinching_ok={str(self.pinching_ok).lower()}"
        for label, lhs, rhs, margin in self.inequalities:
            yield f"{label}: {lhs:.6f} vs {rhs:.6f} margin={margin:.6f}"


def validate_hypotheses(system: SkewSystem) -> HypothesisReport:
    """Evaluate the standing chain of constants and the pinching inequality."""
    c = system.constants
    chain = [("0 < mu_s", 0.0, c.mu_s), ("mu_s <= mu_w", c.mu_s, c.mu_w), ("mu_w < 1", c.mu_w, 1.0),
             ("1 < lambda_w", 1.0, c.lambda_w), ("lambda_w <= lambda_s", c.lambda_w, c.lambda_s),
             ("lambda_s < kappa_w", c.lambda_s, c.kappa_w), ("kappa_w <= kappa_s", c.kappa_w, c.kappa_s)]
    rows = [(label, lhs, rhs, rhs - lhs) for label, lhs, rhs in chain]
    standing_ok = all(m > 0 if "<=" not in label else m >= 0 for label, _, _, m in rows)
    pinch_lhs = c.kappa_s * c.mu_w
    # Tolerate rounding in kappa * kappa^{-1} = 1.
    pinching_ok = pinch_lhs <= c.lambda_w * (1 + 1e-12)
    rows.append(("kappa_s * mu_w <= lambda_w", pinch_lhs, c.lambda_w, c.lambda_w - pinch_lhs))
    return HypothesisReport(standing_ok, pinching_ok, tuple(rows))


# ---------------------------------------------------------------------------
# Config parsing


def build_system(table: dict) -> SkewSystem:
    """Construct a system from a ``[system]`` table (already parsed)."""
    if "kind" not in table:
        raise ConfigError("system.kind is required")
    kind = table["kind"]
    allowed = {
        "affine_anosov": {"kind", "lambda", "p"},
        "affine_horseshoe": {"kind", "mu", "lambda", "kappa", "t"},
        "baker_weierstrass": {"kind", "lambda", "b"},
    }
    if kind not in allowed:
        raise ConfigError(f"system.kind must be one of {', '.join(KINDS)}, got {kind!r}")
    unknown = set(table) - allowed[kind]
    if unknown:
        raise ConfigError(f"unknown field(s) for {kind}: {', '.join(sorted(unknown))}")

    def num(name, default):
        value = table.get(name, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"system.{name} must be a number, got {value!r}")
        return float(value)

    if kind == "affine_anosov":
        rows = table.get("p", DEFAULT_FORCING.to_list())
        if not isinstance(rows, list):
            raise ConfigError("system.p must be a list of [amplitude, basis, m, n] terms")
        try:
            forcing = FourierForcing.from_list(rows)
        except (InvalidParameters, TypeError, ValueError) as exc:
            raise ConfigError(f"system.p: {exc}") from exc
        return AffineAnosov(num("lambda", 1.5), forcing)
    if kind == "affine_horseshoe":
        return AffineHorseshoe(num("mu", 0.25), num("lambda", 1.5), num("kappa", 4.0), num("t", 0.5))
    b = table.get("b", 3)
    if isinstance(b, bool) or not isinstance(b, int):
        raise ConfigError(f"system.b must be an integer, got {b!r}")
    return BakerWeierstrass(num("lambda", 1.5), b)


def system_to_config(system: SkewSystem) -> dict:
    return system.to_config()


def _field_line(text: str, name: str) -> Optional[int]:
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip().startswith(f"{name} ") or line.strip().startswith(f"{name}="):
            return i
    return None


def parse_config(text: str) -> dict:
    """Parse config text into a dict with a validated ``system`` table."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    if "system" not in data or not isinstance(data["system"], dict):
        raise ConfigError("config needs a [system] table")
    try:
        build_system(data["system"])
    except (ConfigError, InvalidParameters) as exc:
        msg = str(exc)
        for name in ("lambda", "mu", "kappa", "t", "b", "p", "kind"):
            if f"system.{name}" in msg or f"{name}=" in msg or f" {name} " in msg:
                line = _field_line(text, name)
                if line is not None:
                    msg = f"line {line}: {msg}"
                break
        raise ConfigError(msg) from exc
    return data


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(data: dict) -> str:
    return tomli_w.dumps(data)


def system_from_text(text: str) -> SkewSystem:
    return build_system(parse_config(text)["system"])


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
