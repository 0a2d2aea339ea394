"""Batch command line: analyze, synthesize, cuts, sweep, selftest."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import tomlkit

from .config import ProblemConfig, resolve_config
from .errors import ValidationError, WaimError
from .greens import UNCOATED
from .objective import tolerance_sweep, worst_cut_threshold
from .records import DesignRecord, write_atc_map, write_cuts, write_design, write_trace
from .selftest import DEFAULT_ARRAY, run_selftest
from .synthesis import run_synthesis

log = logging.getLogger("waimforge")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        n_theta, n_phi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NTHETAxNPHI, got {text!r}") from None
    if n_theta < 1 or n_phi < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return n_theta, n_phi


def _phis(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated angles, got {text!r}") from None


def _fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError("perturbation must lie in [0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="waimforge", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="config path or shipped config name")
        sp.add_argument("--out", default="waimforge_out", type=Path, help="output directory")
        sp.add_argument("--grid", type=_grid, metavar="NTHETAxNPHI", help="override the angular grid")
        sp.add_argument("--plots", action="store_true", help="also render PNG figures")

    a = sub.add_parser("analyze", help="ATC map of the configured design plus the uncoated baseline")
    common(a)
    a.add_argument("--uncoated", action="store_true", help="analyze the bare array only")

    s = sub.add_parser("synthesize", help="optimize the superstrate")
    common(s)
    s.add_argument("--seed", type=int, help="override swarm.seed")

    c = sub.add_parser("cuts", help="ATC along constant-phi planes")
    common(c)
    c.add_argument("--phis", type=_phis, default=[0.0, 45.0, 90.0], metavar="LIST")
    c.add_argument("--uncoated", action="store_true", help="skip the coated variant")

    w = sub.add_parser("sweep", help="thickness tolerance sweep of the configured design")
    common(w)
    w.add_argument("--perturb", type=_fraction, default=0.1, metavar="FRACTION")
    w.add_argument("--phis", type=_phis, default=[0.0, 45.0, 90.0], metavar="LIST")

    t = sub.add_parser("selftest", help="invisible-layer, broadside and scale-invariance checks")
    common(t, config_required=False)
    t.add_argument("--seed", type=int, default=0)
    return p


def _load(args) -> ProblemConfig:
    cfg = resolve_config(args.config)
    if args.grid:
        cfg = cfg.with_grid(*args.grid)
    if getattr(args, "seed", None) is not None and args.command == "synthesize":
        cfg = cfg.with_seed(args.seed)
    return cfg


def _need_design(cfg: ProblemConfig, what: str):
    if cfg.waim.design is None or cfg.waim.design.L == 0:
        raise ValidationError([f"waim.layer: {what} needs a design in the config"])
    return cfg.waim.design


def _write_summary(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(tomlkit.dumps(data))
    return path


def _thresholds(result) -> list[float]:
    return [worst_cut_threshold(result.thetas, result.atc[i]) for i in range(len(result.freqs))]


def cmd_analyze(args) -> int:
    cfg = _load(args)
    stack = None if args.uncoated else _need_design(cfg, "analyze without --uncoated")
    problem = cfg.problem()
    out: Path = args.out
    base = problem.evaluate(UNCOATED)
    base_report = problem.cost(UNCOATED, base)
    summary = {"fingerprint": cfg.fingerprint(), "arl_cap": problem.arl_cap,
               "uncoated": {"Psi": base_report.Psi, "theta_star_deg": _thresholds(base)}}
    if args.uncoated:
        write_atc_map(base, out / "atc_map.csv")
        maps = {"atc_map": base}
    else:
        res = problem.evaluate(stack)
        rep = problem.cost(stack, res)
        write_atc_map(res, out / "atc_map.csv")
        write_atc_map(base, out / "atc_map_uncoated.csv")
        summary["coated"] = {"Psi": rep.Psi, "Psi_norm": rep.Psi_norm, "delta_psi": rep.delta_psi,
                             "theta_star_deg": _thresholds(res)}
        maps = {"atc_map": res, "atc_map_uncoated": base}
    _write_summary(out / "summary.toml", summary)
    print(tomlkit.dumps(summary), end="")
    if args.plots:
        from . import plotting  # matplotlib is only loaded on request
        for name, r in maps.items():
            plotting.plot_atc_map(r, out / f"{name}.png", title=name)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    cfg = _load(args)
    problem = cfg.problem()

    def progress(k, state):
        log.info("iteration %d: best cost %.6g", k, state.gbest_cost)

    res = run_synthesis(problem, cfg.swarm, cfg.waim.layers, cfg.waim.anisotropic, callback=progress)
    rec = DesignRecord.from_result(res, cfg.fingerprint(), cfg.swarm.seed)
    out: Path = args.out
    write_design(rec, out / "design.txt")
    write_trace(res.trace, out / "trace.csv")
    final = problem.evaluate(res.stack)
    write_atc_map(final, out / "atc_map.csv")
    print(f"delta_psi = {rec.delta_psi:+.4%}  Psi_norm = {rec.Psi_norm:.6g}  iterations = {rec.iterations}")
    if args.plots:
        from . import plotting
        plotting.plot_trace(res.trace, out / "trace.png")
        plotting.plot_atc_map(final, out / "atc_map.png")
    return EXIT_OK


def cmd_cuts(args) -> int:
    cfg = _load(args)
    stack = None if args.uncoated else _need_design(cfg, "cuts without --uncoated")
    problem = cfg.problem()
    variants = {}
    if stack is not None:
        variants["coated"] = problem.cuts(stack, args.phis)
    variants["uncoated"] = problem.cuts(UNCOATED, args.phis)
    f = problem.scan.centre_frequency
    write_cuts(variants, f, args.out / "cuts.csv", problem.arl_cap)
    if args.plots:
        from . import plotting
        plotting.plot_cuts(variants, args.out / "cuts.png")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    stack = _need_design(cfg, "sweep")
    problem = cfg.problem()
    variants = tolerance_sweep(problem, stack, args.perturb, args.phis)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variant", "factors", "feasible", "Psi", "Psi_norm", "delta_psi", "violations", "error"])
        for v in variants:
            r = v.report
            w.writerow([v.label, " ".join(repr(x) for x in v.factors), v.feasible,
                        repr(r.Psi) if r else "", repr(r.Psi_norm) if r else "", repr(r.delta_psi) if r else "",
                        "; ".join(v.violations), v.error or ""])
    cut_variants = {v.label: v.cuts for v in variants if v.cuts}
    write_cuts(cut_variants, problem.scan.centre_frequency, out / "cuts.csv", problem.arl_cap)
    for v in variants:
        dp = f"{v.report.delta_psi:+.2%}" if v.report else "n/a"
        print(f"{v.label:10s} delta_psi {dp}{'' if v.feasible else '  (infeasible)'}")
    if args.plots:
        from . import plotting
        plotting.plot_cuts(cut_variants, out / "cuts.png")
    return EXIT_OK


def cmd_selftest(args) -> int:
    d = resolve_config(args.config).array if args.config else DEFAULT_ARRAY
    results = run_selftest(d, seed=args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


COMMANDS = {"analyze": cmd_analyze, "synthesize": cmd_synthesize, "cuts": cmd_cuts, "sweep": cmd_sweep,
            "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (WaimError, OSError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
