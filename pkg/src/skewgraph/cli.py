"""Command-line front end.

Every subcommand prints ``key=value`` lines to stdout and writes its CSV
files (each with a ``# skewgraph <version> config_hash=... seed=...``
header) into ``--out``.  Exit codes: 2 config error, 3 budget error,
1 invariant violation, 130 interrupted.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import math
import signal
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .blender import blender_sweep, bound_regime, overlap_interval, sweep_csv
from .errors import (BudgetExceeded, ConfigError, DepthTooLarge, InsufficientResolution, InvalidParameters,
                     SkewGraphError, UndersampledScale)
from .geometry import box_dimension_estimate, moran_cover
from .graph import DEFAULT_DEPTH, classify_regularity, sample_unstable_slice
from .multifractal import DEFAULT_CELLS, DEFAULT_N_LADDER, entropy_surface, variational_dimension
from .prediction import predict_dimension
from .symbolic import DEFAULT_WORD_BUDGET, OneSidedPotential, ShiftSpace, birkhoff_sum
from .systems import (AffineHorseshoe, build_system, config_hash, parse_config, serialize_config,
                      validate_hypotheses)
from .thermo import cylinder_pressure, pressure_cylinder, pressure_exact, solve_linear_root, solve_pressure_root

COMMANDS = ("graph", "boxdim", "predict", "pressure", "multifractal", "moran", "blender", "regularity", "report")
TABLES = {"system", "run", "potentials", "pressure", "multifractal", "moran", "blender"}
RUN_FIELDS = {"seed", "resolution", "depth", "ladder", "window", "max_words", "max_points", "max_depth"}
DEFAULT_LADDER = (4, 14)
GRAPH_BITS = 12
PRESSURE_LADDER_WORDS = 1 << 18


@dataclass(frozen=True)
class Budgets:
    max_words: int = DEFAULT_WORD_BUDGET
    max_points: int = 1 << 22
    max_depth: int = 4

    def __post_init__(self):
        for name in ("max_words", "max_points", "max_depth"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"run.{name} must be positive")


@dataclass
class RunConfig:
    system: object
    command: str
    config_hash: str
    seed: int = 0
    bits: Optional[int] = None
    depth: Optional[int] = None
    ladder: Tuple[int, int] = DEFAULT_LADDER
    window: Optional[Tuple[int, int]] = None
    out_dir: Path = Path(".")
    timestamp: bool = True
    budgets: Budgets = field(default_factory=Budgets)
    tables: Dict[str, dict] = field(default_factory=dict)

    @property
    def header_lines(self) -> List[str]:
        lines = [f"skewgraph {__version__} config_hash={self.config_hash} seed={self.seed}"]
        if self.timestamp:
            lines.append("timestamp=" + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
        return lines

    def table(self, name: str) -> dict:
        return self.tables.get(name, {})


# ---------------------------------------------------------------------------
# Argument and config parsing


def parse_pair(text: str, flag: str) -> Tuple[int, int]:
    try:
        a, b = (int(v) for v in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"{flag} must look like a:b with integers, got {text!r}") from None
    if a > b:
        raise ConfigError(f"{flag} needs a <= b, got {text!r}")
    return a, b


def parse_resolution(text) -> int:
    """``2^m`` or a power-of-two point count; returns ``m``."""
    s = str(text).strip().replace("**", "^")
    try:
        if s.startswith("2^"):
            return int(s[2:])
        count = int(s)
    except ValueError:
        raise ConfigError(f"resolution must be 2^m or a power of two, got {text!r}") from None
    if count < 2 or count & (count - 1):
        raise ConfigError(f"resolution must be a power of two, got {text!r}")
    return count.bit_length() - 1


def _parse_seed(value) -> int:
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}") from None
    if not 0 <= seed < 1 << 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    return seed


def _positive_int(table: str, name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ConfigError(f"{table}.{name} must be a positive integer, got {value!r}")
    return value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
        data = parse_config(text)
    else:
        data = {"system": AffineHorseshoe().to_config()}
        text = serialize_config(data)
    unknown = set(data) - TABLES
    if unknown:
        raise ConfigError(f"unknown config table(s): {', '.join(sorted(unknown))}")
    run = data.get("run", {})
    bad = set(run) - RUN_FIELDS
    if bad:
        raise ConfigError(f"unknown field(s) in [run]: {', '.join(sorted(bad))}")
    budgets = Budgets(**{k: _positive_int("run", k, run[k]) for k in ("max_words", "max_points", "max_depth")
                         if k in run})
    pick = lambda flag, key: flag if flag is not None else run.get(key)  # noqa: E731
    seed = pick(args.seed, "seed")
    resolution = pick(args.resolution, "resolution")
    depth = pick(args.depth, "depth")
    ladder = pick(args.ladder, "ladder")
    window = pick(args.window, "window")
    cfg = RunConfig(
        system=build_system(data["system"]),
        command=args.command,
        config_hash=config_hash(text),
        seed=_parse_seed(seed if seed is not None else 0),
        bits=parse_resolution(resolution) if resolution is not None else None,
        depth=_positive_int("run", "depth", int(depth)) if depth is not None else None,
        ladder=parse_pair(ladder, "--ladder") if ladder is not None else DEFAULT_LADDER,
        window=parse_pair(window, "--window") if window is not None else None,
        out_dir=Path(args.out),
        timestamp=not args.no_timestamp,
        budgets=budgets,
        tables={k: v for k, v in data.items() if k not in ("system", "run")},
    )
    if cfg.window is not None and not (cfg.ladder[0] <= cfg.window[0] and cfg.window[1] <= cfg.ladder[1]):
        raise ConfigError(f"--window {cfg.window[0]}:{cfg.window[1]} must lie inside --ladder "
                          f"{cfg.ladder[0]}:{cfg.ladder[1]}")
    if cfg.bits is not None and (1 << cfg.bits) > budgets.max_points:
        raise BudgetExceeded(f"resolution 2^{cfg.bits} exceeds run.max_points={budgets.max_points}")
    return cfg


def _potential(value, name: str, alphabet: int) -> OneSidedPotential:
    try:
        psi = OneSidedPotential(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"potentials.{name}: {exc}") from exc
    if psi.depth and psi.alphabet_size != alphabet:
        raise ConfigError(f"potentials.{name} has alphabet {psi.alphabet_size}, expected {alphabet}")
    return psi


def potentials_for(cfg: RunConfig) -> Tuple[ShiftSpace, OneSidedPotential, OneSidedPotential]:
    """``[potentials]`` table, or ``(phi_u, phi_cu)`` of the configured system."""
    table = cfg.table("potentials")
    if not table:
        pots = cfg.system.geometric_potentials()
        return cfg.system.base_shift, pots.phi_u, pots.phi_cu
    bad = set(table) - {"alphabet", "transition", "psi1", "psi2"}
    if bad:
        raise ConfigError(f"unknown field(s) in [potentials]: {', '.join(sorted(bad))}")
    try:
        if "transition" in table:
            shift = ShiftSpace.from_matrix(table["transition"])
        else:
            shift = ShiftSpace.full(_positive_int("potentials", "alphabet", table.get("alphabet", 2)))
    except (InvalidParameters, TypeError, ValueError) as exc:
        raise ConfigError(f"potentials.transition: {exc}") from exc
    if "psi1" not in table:
        raise ConfigError("potentials.psi1 is required")
    psi1 = _potential(table["psi1"], "psi1", shift.alphabet_size)
    psi2 = _potential(table.get("psi2", 0.0), "psi2", shift.alphabet_size)
    return shift, psi1, psi2


def default_bits(cfg: RunConfig, fallback: Optional[int] = None) -> int:
    if cfg.bits is not None:
        return cfg.bits
    if fallback is not None:
        return fallback
    return 18 if isinstance(cfg.system, AffineHorseshoe) else 20


# ---------------------------------------------------------------------------
# Output files


class OutputFiles:
    """CSV files opened with the run header; interrupted files get a TRUNCATED footer."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.open_handles: List[io.TextIOBase] = []
        cfg.out_dir.mkdir(parents=True, exist_ok=True)

    def open(self, name: str):
        fh = open(self.cfg.out_dir / name, "w", encoding="utf-8", newline="\n")
        for line in self.cfg.header_lines:
            fh.write(f"# {line}\n")
        fh.flush()
        self.open_handles.append(fh)
        return fh

    def close(self, fh):
        fh.close()
        self.open_handles.remove(fh)

    def write(self, name: str, body: str):
        fh = self.open(name)
        fh.write(body)
        self.close(fh)

    def truncate_all(self):
        for fh in list(self.open_handles):
            fh.write("# TRUNCATED\n")
            self.close(fh)


def emit(lines):
    for line in lines:
        print(line)


# ---------------------------------------------------------------------------
# Subcommands


def _sample(cfg: RunConfig, bits: int):
    return sample_unstable_slice(cfg.system, bits=bits, depth=cfg.depth or DEFAULT_DEPTH)


def cmd_graph(cfg: RunConfig, out: OutputFiles):
    fh = out.open("graph.csv")
    graph = _sample(cfg, default_bits(cfg, GRAPH_BITS))
    graph.to_csv(fh)
    out.close(fh)
    emit([f"points={len(graph)}", f"max_error_bound={float(graph.error_bound.max()):.3e}",
          f"file={cfg.out_dir / 'graph.csv'}"])


def _boxdim(cfg: RunConfig, out: OutputFiles, write_graph: bool):
    graph_fh = out.open("graph.csv") if write_graph else None
    box_fh = out.open("boxcount.csv")
    graph = _sample(cfg, default_bits(cfg))
    if graph_fh is not None:
        graph.to_csv(graph_fh)
        out.close(graph_fh)
    table = box_dimension_estimate(graph, ladder=cfg.ladder, window=cfg.window)
    box_fh.write(table.to_csv())
    out.close(box_fh)
    return graph, table


def cmd_boxdim(cfg: RunConfig, out: OutputFiles):
    graph, table = _boxdim(cfg, out, write_graph=False)
    emit([f"points={len(graph)}", f"mode={table.mode}", table.summary()])


def cmd_predict(cfg: RunConfig, out: OutputFiles):
    hyp = validate_hypotheses(cfg.system)
    emit(predict_dimension(cfg.system).lines())
    emit(hyp.lines())


def _pressure_ladder(shift: ShiftSpace, table: dict, budget: int) -> Tuple[int, ...]:
    if "n_ladder" in table:
        return tuple(_positive_int("pressure", "n_ladder", n) for n in table["n_ladder"])
    cap = min(budget, PRESSURE_LADDER_WORDS)
    return tuple(n for n in range(4, 17) if shift.count_words(n) <= cap)[-6:]


def cmd_pressure(cfg: RunConfig, out: OutputFiles):
    shift, psi1, psi2 = potentials_for(cfg)
    ladder = _pressure_ladder(shift, cfg.table("pressure"), cfg.budgets.max_words)
    fh = out.open("pressure.csv")
    lines = []
    try:
        exact = pressure_exact(shift, psi2, max_depth=cfg.budgets.max_depth)
        lines.append(f"P_exact={exact.value:.12f}")
    except DepthTooLarge:
        lines.append("P_exact=unavailable")
    if shift.entropy_override is not None and psi2.depth > 0:
        lines.append("P_cylinder=unavailable")
    else:
        est = pressure_cylinder(shift, psi2, ladder, cfg.budgets.max_words)
        fh.write("n,P_n\n")
        for n in ladder:
            fh.write(f"{n},{cylinder_pressure(shift, psi2, n, cfg.budgets.max_words):.15g}\n")
        lines += [f"P_cylinder={est.value:.12f}", f"cylinder_error_bound={est.error_bound:.3e}",
                  f"cylinder_r_squared={est.r_squared:.6f}", f"poor_fit={str(est.poor_fit).lower()}"]
    out.close(fh)
    root = solve_linear_root(shift, psi1, psi2, max_depth=cfg.budgets.max_depth)
    lines.append(f"t_root={root.d:.12f}")
    if not cfg.table("potentials"):
        pots = cfg.system.geometric_potentials()
        lines.append(f"d={solve_pressure_root(shift, pots.phi_cu, pots.phi_u).d:.12f}")
    emit(lines)


def cmd_multifractal(cfg: RunConfig, out: OutputFiles):
    shift, psi1, psi2 = potentials_for(cfg)
    table = cfg.table("multifractal")
    bad = set(table) - {"n_ladder", "cells"}
    if bad:
        raise ConfigError(f"unknown field(s) in [multifractal]: {', '.join(sorted(bad))}")
    n_ladder = tuple(_positive_int("multifractal", "n_ladder", n) for n in table.get("n_ladder", DEFAULT_N_LADDER))
    cells = _positive_int("multifractal", "cells", table.get("cells", DEFAULT_CELLS))
    fh = out.open("multifractal.csv")
    surface = entropy_surface(shift, psi1, psi2, n_ladder=n_ladder, cells=cells, budget=cfg.budgets.max_words)
    fh.write(surface.to_csv())
    out.close(fh)
    result = variational_dimension(shift, psi1, psi2, surface)
    lines = [f"t_variational={result.t_variational:.6f}", f"t_pressure_root={result.t_pressure_root:.6f}",
             f"gap={result.gap:.6f}", f"gaps_decreasing={str(result.gaps_decreasing).lower()}",
             f"sandwich_width={surface.sandwich_width:.6f}"]
    lines += [f"n={s.n},t_raw={s.t_raw:.6f},t_refined={s.t_refined:.6f},gap={s.gap:.6f}" for s in result.steps]
    emit(lines)


def cmd_moran(cfg: RunConfig, out: OutputFiles):
    shift, psi1, _ = potentials_for(cfg)
    table = cfg.table("moran")
    r = table.get("r", 0.01)
    if isinstance(r, bool) or not isinstance(r, (int, float)) or not 0 < r < 1:
        raise ConfigError(f"moran.r must lie in (0, 1), got {r!r}")
    fh = out.open("moran.csv")
    cover = moran_cover(shift, psi1, float(r), budget=cfg.budgets.max_words)
    fh.write("word,length,log_weight\n")
    for w in cover.cells:
        fh.write(f"{''.join(map(str, w))},{len(w)},{birkhoff_sum(psi1, w, len(w), shift):.15g}\n")
    out.close(fh)
    emit([f"r={float(r):.12g}", f"cells={len(cover)}", f"n_min={cover.n_bounds[0]}", f"n_max={cover.n_bounds[1]}"])


def cmd_blender(cfg: RunConfig, out: OutputFiles):
    table = cfg.table("blender")
    bad = set(table) - {"lambdas", "ts", "depth", "germ_word_length"}
    if bad:
        raise ConfigError(f"unknown field(s) in [blender]: {', '.join(sorted(bad))}")
    system = cfg.system
    mu, kappa = (system.mu, system.kappa) if isinstance(system, AffineHorseshoe) else (0.25, 4.0)
    default_t = system.t if isinstance(system, AffineHorseshoe) else 0.5
    lams = [float(v) for v in table.get("lambdas", [round(1.1 + 0.2 * k, 10) for k in range(10)])]
    ts = [float(v) for v in table.get("ts", [default_t])]
    depth = cfg.depth or _positive_int("blender", "depth", table.get("depth", 12))
    word_length = _positive_int("blender", "germ_word_length", table.get("germ_word_length", 4))
    if any(not 1 < lam < kappa for lam in lams):
        raise ConfigError(f"blender.lambdas must lie in (1, kappa={kappa})")
    fh = out.open("blender.csv")
    rows = blender_sweep(lams, ts, depth, word_length, mu, kappa)
    fh.write(sweep_csv(rows))
    out.close(fh)
    lines = []
    for r in rows:
        germ = "n/a" if r.germ_passed is None else str(r.germ_passed).lower()
        lines.append(f"lambda={r.lam:.6g},t={r.t:.6g},regime={r.regime},connected={str(r.connected).lower()},"
                     f"gap_fraction={r.gap_fraction:.6f},germ={germ}")
    if isinstance(system, AffineHorseshoe):
        report = overlap_interval(system.lam, system.t)
        if report.interval is None:
            lines.append("overlap=none")
        else:
            lines.append(f"overlap={float(report.interval[0]):.12g}:{float(report.interval[1]):.12g}")
        dim_u = math.log(2.0) / math.log(system.kappa)
        bounds = bound_regime(system.constants.critical_exponent, dim_u)
        lines.append(f"D1={bounds.D1:.12f},D2={bounds.D2:.12f},binding={bounds.binding}")
    emit(lines)


def cmd_regularity(cfg: RunConfig, out: OutputFiles):
    fh = out.open("regularity.csv")
    report = classify_regularity(cfg.system, seed=cfg.seed)
    fh.write("probe,delta_u\n")
    for i, v in enumerate(report.probe_values):
        fh.write(f"{i},{v:.17g}\n")
    out.close(fh)
    emit(report.lines())


def cmd_report(cfg: RunConfig, out: OutputFiles):
    from .report import render_report_figures

    prediction = predict_dimension(cfg.system)
    emit(f"predict.{line}" for line in prediction.lines())
    graph, table = _boxdim(cfg, out, write_graph=True)
    lo, hi = table.window
    lines = [f"boxdim.points={len(graph)}", f"boxdim.{table.summary()}",
             f"comparison.predicted_slice_dim={prediction.d:.6f}",
             f"comparison.measured_slope={table.slope:.6f}",
             f"comparison.stderr={table.stderr:.6f}",
             f"comparison.window={lo}:{hi}",
             f"comparison.abs_difference={abs(table.slope - prediction.d):.6f}"]
    if prediction.derived:
        lines.append("comparison.prediction=derived")
    figures = render_report_figures(cfg.out_dir, graph, table, prediction.d, "graph.csv", "boxcount.csv",
                                    f"{cfg.system.to_config()['kind']} unstable slice")
    lines += [f"figure={p}" for p in figures]
    emit(lines)


HANDLERS = {
    "graph": cmd_graph, "boxdim": cmd_boxdim, "predict": cmd_predict, "pressure": cmd_pressure,
    "multifractal": cmd_multifractal, "moran": cmd_moran, "blender": cmd_blender,
    "regularity": cmd_regularity, "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config with a [system] table")
    common.add_argument("--out", default=".", help="output directory for CSV and figures")
    common.add_argument("--seed", help="unsigned 64-bit seed recorded in every header")
    common.add_argument("--resolution", help="number of slice samples, 2^m")
    common.add_argument("--depth", type=int, help="series / orbit depth")
    common.add_argument("--ladder", help="dyadic scale ladder j_min:j_max")
    common.add_argument("--window", help="fit window a:b inside the ladder")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")
    parser = argparse.ArgumentParser(prog="skewgraph", description="Dimension experiments for invariant graphs.")
    parser.add_argument("--version", action="version", version=f"skewgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = None
    try:
        cfg = build_run_config(args)
        print(f"# {cfg.header_lines[0]}")
        out = OutputFiles(cfg)
        HANDLERS[args.command](cfg, out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (UndersampledScale, InsufficientResolution) as exc:
        print(f"config error: --resolution too small for the ladder: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, DepthTooLarge) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except KeyboardInterrupt:
        if out is not None:
            out.truncate_all()
        print("interrupted", file=sys.stderr)
        return 130
    except (SkewGraphError, AssertionError, ValueError, FloatingPointError) as exc:
        print(f"invariant violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        if out is not None:
            for fh in list(out.open_handles):
                out.close(fh)


def main() -> None:
    # A parent that ignores SIGINT would otherwise disable the TRUNCATED footer.
    signal.signal(signal.SIGINT, signal.default_int_handler)
    sys.exit(run())


if __name__ == "__main__":
    main()
