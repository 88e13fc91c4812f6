"""Dimension predictions from the pressure equations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from .graph import classify_regularity
from .systems import AffineAnosov, BakerWeierstrass, SkewSystem
from .thermo import solve_bowen, solve_pressure_root


@dataclass(frozen=True)
class Prediction:
    d_s: float           # dimension of the stable slice of the base
    d: float             # dimension of the graph over an unstable slice
    dim: float           # predicted box dimension of the graph
    branch: str
    notes: Tuple[str, ...] = field(default=())
    derived: bool = False

    def lines(self):
        yield f"branch={self.branch}"
        yield f"d_s={self.d_s:.6f}"
        yield f"d={self.d:.6f}"
        yield f"dim={self.dim:.6f}"
        if self.derived:
            yield "derived=true"
        for note in self.notes:
            yield f"note={note}"


def predict_dimension(system: SkewSystem, lipschitz: Optional[bool] = None) -> Prediction:
    """Box dimension of the invariant graph from ``P(phi_cu + (d-1) phi_u) = 0``.

    ``lipschitz=None`` decides the horseshoe branch with the regularity
    classifier.
    """
    pots = system.geometric_potentials()
    shift = system.base_shift
    if isinstance(system, AffineAnosov):
        d = solve_pressure_root(shift, pots.phi_cu, pots.phi_u).d
        return Prediction(1.0, d, 1.0 + d, "anosov_base", ("dim = 1 + d",))
    if isinstance(system, BakerWeierstrass):
        d = solve_pressure_root(shift, pots.phi_cu, pots.phi_u).d
        return Prediction(1.0, d, 1.0 + d, "baker_base",
                          ("derived: same pressure formula with kappa = b", "slice dimension = d"), derived=True)
    d_s = solve_bowen(shift, pots.phi_s).d
    if lipschitz is None:
        lipschitz = classify_regularity(system, samples=64, bits=10).verdict == "lipschitz"
    if lipschitz:
        d_u = solve_bowen(shift, pots.phi_u).d
        return Prediction(d_s, 1.0, d_s + 1.0, "lipschitz",
                          ("dim = d_s + 1 (one-dimensional attractor formula)",
                           f"direct product of the base Cantor sets gives d_s + d_u = {d_s + d_u:.6f}"))
    d = solve_pressure_root(shift, pots.phi_cu, pots.phi_u).d
    return Prediction(d_s, d, d_s + d, "cantor_base", ("dim = d_s + d",))
