"""The `snalab` command line tool.

Every subcommand loads one experiment config (defaults when --config is
absent), applies the flag overrides, writes its outputs plus the resolved
config into the output directory, and exits 0 when all computed
diagnostics pass or the family is cleanly out of regime, 1 when a
diagnostic is violated or cannot be evaluated, and 2 on configuration
errors (argparse uses the same code for usage errors).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import mpmath

from .attractor import Direction, birkhoff_blocks, lyapunov_of_graph, \
    pullback_graph
from .config import ConfigError, ExperimentConfig, load_config, resolved_text
from .families import estimate_constants
from .multiscale import stable_phase_set
from .pipeline import (_build_hierarchy, _dimension_stage, _Summary,
                       _write_constants, _write_csv, _write_graph_csv,
                       run_hierarchy, run_sna_report, run_staircase,
                       write_plateaus_csv, write_staircase_csv)
from .rectifiability import empirical_lipschitz, slope_bound

__all__ = ["main"]


def _prepare(cfg: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved.cfg").write_text(resolved_text(cfg),
                                             encoding="utf-8")


def _print_lines(lines) -> None:
    for key, value in lines:
        print(f"{key} = {value}")


def _constants(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    family = cfg.build_family()
    data = estimate_constants(family,
                              theta_grid_size=cfg.constants_theta_grid,
                              x_grid_size=cfg.constants_x_grid,
                              level=cfg.constants_level)
    _write_constants(data, out / "constants.csv")
    if not data.split_found:
        print(data.reason)
        return 0
    print(f"C = {data.C}")
    print(f"E = {data.E}")
    print(f"alpha_bound = {data.alpha_bound!r}")
    print(f"S = {data.S!r}")
    print(f"I0: {data.I0.n_components} component(s), "
          f"measure {data.I0.measure()!r}")
    return 0


def _attractor(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    family = cfg.build_family()
    for direction, name in ((Direction.ATTRACTOR, "attractor"),
                            (Direction.REPELLER, "repeller")):
        g = pullback_graph(family, direction, cfg.grid_size,
                           cfg.pullback_depth, cfg.seed_x,
                           workers=cfg.workers)
        _write_graph_csv(g, out / f"{name}.csv")
        print(f"{name}: residual p50 {g.residual_p50!r}, "
              f"converged {'yes' if g.converged else 'no'}")
    return 0


def _lyapunov(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    family = cfg.build_family()
    rows = []
    att = pullback_graph(family, Direction.ATTRACTOR, cfg.grid_size,
                         cfg.pullback_depth, cfg.seed_x, workers=cfg.workers)
    x0 = float(att.phi[0]) if att.converged else cfg.seed_x
    birk = birkhoff_blocks(family, 0.0, x0, cfg.orbit_n)
    rows.append(("birkhoff_attractor", birk.value, birk.std_error,
                 birk.n_samples))
    print(f"birkhoff = {birk.value!r} +- {birk.std_error!r}")
    if att.converged:
        est = lyapunov_of_graph(family, att)
        rows.append(("graph_attractor", est.value, est.std_error,
                     est.n_samples))
        print(f"graph attractor = {est.value!r} +- {est.std_error!r}")
    else:
        print("attractor pullback not converged; graph average skipped")
    rep = pullback_graph(family, Direction.REPELLER, cfg.grid_size,
                         cfg.pullback_depth, cfg.seed_x, workers=cfg.workers)
    if rep.converged:
        est_inv = lyapunov_of_graph(family, rep, inverse=True)
        rows.append(("graph_repeller", -est_inv.value, est_inv.std_error,
                     est_inv.n_samples))
        print(f"graph repeller = {-est_inv.value!r} +- "
              f"{est_inv.std_error!r}")
    else:
        print("repeller pullback not converged; graph average skipped")
    _write_csv(out / "lyapunov.csv",
               ("source", "value", "std_error", "n_samples"), rows)
    return 0


def _staircase(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    result = run_staircase(cfg)
    write_staircase_csv(result, out / "staircase.csv")
    write_plateaus_csv(result, out / "plateaus.csv")
    bad = sum(1 for r in result.rows if r.status != "ok")
    print(f"{len(result.rows)} sweep rows, {len(result.plateaus)} "
          f"plateau(s), {bad} with problems")
    for p in result.plateaus:
        print(f"  rho = {p.lock_num}/{p.lock_den}: width {p.width!r} "
              f"({p.points} points from tau = {p.start!r})")
    return 0 if bad == 0 else 1


def _hierarchy(cfg: ExperimentConfig, out: Path) -> int:
    result = run_hierarchy(cfg, out)
    _print_lines(result.summary)
    return 0 if result.ok else 1


def _with_hierarchy(cfg: ExperimentConfig):
    """Constants plus the computed critical levels; the hierarchy slot is
    None with the reason filled in when the family has no split."""
    family = cfg.build_family()
    data = estimate_constants(family,
                              theta_grid_size=cfg.constants_theta_grid,
                              x_grid_size=cfg.constants_x_grid,
                              level=cfg.constants_level)
    if not data.split_found:
        return family, data, None, data.reason
    return family, data, _build_hierarchy(cfg, family, data), ""


def _omega_sets(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    family, data, hier, reason = _with_hierarchy(cfg)
    if hier is None:
        print(reason)
        return 0
    rows = []
    ok = True
    for j in range(1, len(hier.levels) + 1):
        sp = stable_phase_set(hier, family.omega, j)
        rows.extend((j, i, a, b) for i, (a, b) in enumerate(sp.arcs.arcs))
        covered = (not sp.valid) or sp.measured >= sp.leb_lower_bound
        ok = ok and covered
        print(f"omega_{j}: measured {sp.measured!r}, "
              f"bound {sp.leb_lower_bound!r}, "
              f"{'ok' if covered else 'VIOLATED'}")
    _write_csv(out / "omega_sets.csv",
               ("j", "component", "left", "length"), rows)
    return 0 if ok else 1


def _lipschitz(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    family, data, hier, reason = _with_hierarchy(cfg)
    if hier is None:
        print(reason)
        return 0
    att = pullback_graph(family, Direction.ATTRACTOR, cfg.grid_size,
                         cfg.pullback_depth, cfg.seed_x, workers=cfg.workers)
    rows = []
    ok = True
    for j in range(1, cfg.lipschitz_j_max + 1):
        region = stable_phase_set(hier, family.omega, j).arcs
        bound = slope_bound(data.S, data.alpha_bound, hier.b_limit,
                            hier.K(j - 1), hier.M[j - 1])
        rep = empirical_lipschitz(family, att, region, S=data.S,
                                  E_length=data.E_length,
                                  pair_budget=cfg.lipschitz_pair_budget,
                                  j=j, bound=bound, seed=cfg.seed + j)
        good = rep.within_bound and math.isfinite(rep.max_slope)
        ok = ok and good
        log_bound = float(mpmath.log10(bound))
        rows.append((j, rep.pair_count, rep.max_slope, log_bound,
                     rep.within_bound, rep.note))
        print(f"j = {j}: max slope {rep.max_slope!r} over "
              f"{rep.pair_count} pairs, log10 bound {log_bound!r}, "
              f"{'ok' if good else 'VIOLATED'}")
    _write_csv(out / "lipschitz.csv",
               ("j", "pair_count", "max_slope", "bound_log10",
                "within_bound", "note"), rows)
    return 0 if ok else 1


def _dimension(cfg: ExperimentConfig, out: Path) -> int:
    _prepare(cfg, out)
    family = cfg.build_family()
    probe = pullback_graph(family, Direction.ATTRACTOR, cfg.grid_size,
                           cfg.pullback_depth, cfg.seed_x,
                           workers=cfg.workers)
    if not probe.converged:
        print("attractor pullback not converged; dimension estimates "
              "would not be meaningful")
        return 0
    summary = _Summary()
    _dimension_stage(cfg, family, summary, out)
    _print_lines(summary.lines)
    return 0 if not summary.failures else 1


def _report(cfg: ExperimentConfig, out: Path) -> int:
    result = run_sna_report(cfg, out)
    _print_lines(result.summary)
    return 0 if result.ok else 1


_COMMANDS = {
    "constants": (_constants, "derivative split, bounds, and the critical "
                              "region at level zero"),
    "attractor": (_attractor, "sample the attracting and repelling graphs"),
    "lyapunov": (_lyapunov, "graph-average and single-orbit exponents"),
    "staircase": (_staircase, "rotation number sweep with plateau "
                              "detection"),
    "hierarchy": (_hierarchy, "critical levels and structure verdicts"),
    "omega-sets": (_omega_sets, "stable driving angles per depth with "
                                "coverage bounds"),
    "lipschitz": (_lipschitz, "empirical slopes against the closed-form "
                              "bounds"),
    "dimension": (_dimension, "pointwise and box scaling estimates"),
    "report": (_report, "everything above in one directory"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snalab",
        description="simulate quasiperiodically forced circle maps and "
                    "check the structure of their invariant graphs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (handler, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH",
                       help="experiment config file (defaults when absent)")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default from the config)")
        p.add_argument("--workers", type=int, metavar="K",
                       help="process count for the parallel stages")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="seed for the sampling stages")
        p.add_argument("--tau", type=float,
                       help="override the family's translation parameter")
        p.add_argument("--grid", type=int,
                       help="override the graph sampling grid size")
        p.add_argument("--depth", type=int,
                       help="override the pullback depth")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = cfg.with_overrides(family_tau=args.tau, grid_size=args.grid,
                                 pullback_depth=args.depth,
                                 workers=args.workers, seed=args.seed,
                                 out_dir=args.out)
        if cfg.workers < 1:
            raise ConfigError("run.workers must be at least 1")
        if cfg.seed < 0:
            raise ConfigError("run.seed must be non-negative")
        if cfg.grid_size < 256:
            raise ConfigError("grid.size must be at least 256")
        if cfg.pullback_depth < 1:
            raise ConfigError("grid.pullback_depth must be at least 1")
        if min(cfg.constants_theta_grid, cfg.constants_x_grid) < 256:
            raise ConfigError("constants grids must be at least 256 per axis")
        cfg.build_family()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.handler(cfg, Path(cfg.out_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
