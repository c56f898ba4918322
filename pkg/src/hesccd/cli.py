"""Batch command line: validate, run, sweep, export-mps, import-solution, report.

Exit codes: 0 success, 1 invalid input, 2 infeasible or unbounded, 3 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--signals-dir", help="directory for relative signal paths")
    common.add_argument("--out", help="output directory (default: $HESCCD_OUT or ./out)")
    common.add_argument("--overlay", help="named overlay from the config's 'overlays'")
    solve_opts = _Parser(add_help=False)
    solve_opts.add_argument("--tol", type=float, default=1e-9)
    solve_opts.add_argument("--max-iter", type=int, default=None)
    solve_opts.add_argument("--scale", type=float, default=1e-9, help="objective scale factor")
    solve_opts.add_argument("--external-solver", choices=("none", "highs"), default="none")

    p = _Parser(prog="hesccd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="check a configuration")
    sub.add_parser("run", parents=[common, solve_opts], help="solve and write results")
    sw = sub.add_parser("sweep", parents=[common, solve_opts], help="solve a parameter grid")
    sw.add_argument("--axis", action="append", default=[], metavar="PATH=V1,V2,...",
                    help="config path and values; hour windows as START-END or 'none'")
    sw.add_argument("--workers", type=int, default=1)
    sub.add_parser("export-mps", parents=[common], help="write model.mps and names.csv")
    imp = sub.add_parser("import-solution", parents=[common, solve_opts], help="check an external solution")
    imp.add_argument("--solution", required=True)
    rp = sub.add_parser("report", parents=[common], help="rebuild accounting from a saved trajectory")
    rp.add_argument("--trajectory", required=True)
    rp.add_argument("--report-json", help="report.json holding the capacities (default: next to trajectory)")
    return p


def _digest(paths, settings) -> str:
    h = hashlib.sha256()
    for p in sorted(set(map(str, paths))):
        h.update(p.encode())
        h.update(Path(p).read_bytes())
    h.update(json.dumps(settings, sort_keys=True).encode())
    return h.hexdigest()


def _dump(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("HESCCD_OUT", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _settings(args) -> dict:
    keys = ("command", "overlay", "tol", "max_iter", "scale", "external_solver", "axis", "workers")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _load(args):
    from .config_io import load_config

    cfg, raw, used = load_config(args.config, args.signals_dir, args.overlay)
    return cfg, raw, [Path(args.config)] + used


def _report_dict(rep, lp) -> dict:
    out = {
        "status": rep.status,
        "objective": rep.objective,
        "iterations": rep.iterations,
        "primal_residual": rep.primal_residual,
        "dual_residual": rep.dual_residual,
        "complementarity": rep.complementarity,
        "gap": rep.gap,
        "message": rep.message,
        "warnings": list(rep.warnings),
    }
    if rep.x is not None and lp.layout is not None:
        out["sigma"] = {k[len("sigma_"):]: float(rep.x[lp.layout.col(k)]) for k in lp.layout.plant_kinds}
    return out


def _write_results(out: Path, res, cfg):
    from .analysis import write_accounting_csv, write_trajectory_csv

    write_trajectory_csv(res.trajectory, out / "trajectory.csv")
    write_accounting_csv(res.accounting, out / "accounting.csv")
    npv = res.npv.as_dict()
    npv["solver_objective"] = res.report.objective
    _dump(out / "npv.json", npv)
    _dump(out / "report.json", _report_dict(res.report, res.lp))


def cmd_validate(args) -> int:
    from .model import validate_config

    cfg, _, _ = _load(args)
    rep = validate_config(cfg)
    print(rep)
    return EXIT_OK if rep.ok else EXIT_INVALID


def _solve_external(lp, out: Path, tol):
    from .solver import export_mps, import_external_solution
    from .solver.external import solve_mps_with_highs

    export_mps(lp, out / "model.mps", out / "names.csv")
    solve_mps_with_highs(out / "model.mps", out / "solution.txt", tol=tol)
    return import_external_solution(lp, out / "solution.txt", tol=tol)


def cmd_run(args) -> int:
    from .analysis import energy_accounting, extract_trajectory
    from .economics import npv_breakdown
    from .pipeline import RunResult, build_problem, run_config
    from .transcription import scale_lp

    t0 = time.perf_counter()
    cfg, _, inputs = _load(args)
    out = _out_dir(args)
    settings = _settings(args)
    if args.external_solver == "highs":
        lp = build_problem(cfg)
        rep = _solve_external(lp, out, args.tol)
        res = RunResult(lp, scale_lp(lp, 1.0), rep)
        if rep.status in ("optimal", "feasible, optimality unverified"):
            traj = extract_trajectory(rep, lp, cfg)
            res = RunResult(lp, res.scaled_lp, rep, traj, npv_breakdown(traj, cfg), energy_accounting(traj, cfg))
    else:
        res = run_config(cfg, objective_scale=args.scale, tol=args.tol, max_iter=args.max_iter)
    _dump(out / "manifest.json", {"config": str(args.config), "inputs": [str(p) for p in inputs],
                                   "settings": settings, "digest": _digest(inputs, settings)})
    _dump(out / "timing.json", {"wall_time_s": time.perf_counter() - t0, "solve_time_s": res.report.wall_time})
    if res.trajectory is None:
        _dump(out / "report.json", _report_dict(res.report, res.lp))
        print(f"{res.report.status}: {res.report.message}")
        return EXIT_INFEASIBLE if res.report.status in ("infeasible", "unbounded") else EXIT_INVALID
    _write_results(out, res, cfg)
    print(f"{res.report.status}: objective {res.report.objective!r}")
    return EXIT_OK


def _parse_axis(spec):
    from .transcription import hour_window

    if "=" not in spec:
        raise UsageError(f"axis '{spec}' must look like PATH=V1,V2,...")
    path, vals = spec.split("=", 1)
    out = []
    for v in vals.split(","):
        v = v.strip()
        if path.endswith(("peak_window",)) or "sale_windows" in path:
            if v.lower() in ("none", ""):
                out.append(())
            else:
                a, b = v.split("-")
                out.append(hour_window(int(a), int(b)))
        else:
            out.append(float(v))
    return path, out


def cmd_sweep(args) -> int:
    from dataclasses import replace

    from .analysis import run_sweep
    from .transcription import ScenarioOverlay

    cfg, raw, inputs = _load(args)
    axes = [_parse_axis(a) for a in args.axis]
    for path, vals in raw.get("sweep", {}).get("axes", {}).items():
        axes.append(_parse_axis(f"{path}={','.join(map(str, vals))}"))
    if any(p.startswith("scenario.") for p, _ in axes) and cfg.scenario is None:
        cfg = replace(cfg, scenario=ScenarioOverlay())
    out = _out_dir(args)
    res = run_sweep(cfg, axes, parallelism=args.workers, tol=args.tol, objective_scale=args.scale)
    res.to_csv(out / "sweep.csv")
    settings = _settings(args)
    _dump(out / "manifest.json", {"config": str(args.config), "inputs": [str(p) for p in inputs],
                                   "settings": settings, "digest": _digest(inputs, settings)})
    failed = int(sum(s != "optimal" for s in res.status.flat))
    print(f"{res.status.size} points, {failed} failed")
    return EXIT_OK


def cmd_export(args) -> int:
    from .pipeline import build_problem
    from .solver import export_mps

    cfg, _, _ = _load(args)
    out = _out_dir(args)
    lp = build_problem(cfg)
    export_mps(lp, out / "model.mps", out / "names.csv")
    print(f"wrote {out / 'model.mps'} ({lp.n_rows} rows, {lp.n_cols} columns)")
    return EXIT_OK


def cmd_import(args) -> int:
    from .pipeline import build_problem
    from .solver import import_external_solution

    cfg, _, _ = _load(args)
    out = _out_dir(args)
    lp = build_problem(cfg)
    rep = import_external_solution(lp, args.solution, tol=args.tol)
    _dump(out / "report.json", _report_dict(rep, lp))
    print(f"{rep.status}: objective {rep.objective!r}")
    return EXIT_INFEASIBLE if rep.status == "infeasible" else EXIT_OK


def cmd_report(args) -> int:
    from .analysis import energy_accounting, write_accounting_csv
    from .analysis.trajectory import read_trajectory_csv
    from .economics import npv_breakdown
    from .pipeline import config_mesh
    from .transcription import resolve_signals

    cfg, _, _ = _load(args)
    out = _out_dir(args)
    mesh = config_mesh(cfg)
    rj = Path(args.report_json) if args.report_json else Path(args.trajectory).with_name("report.json")
    saved = json.loads(rj.read_text(encoding="utf-8"))
    prices = {k: v for k, v in resolve_signals(cfg, mesh).items() if k.endswith("_price")}
    traj = read_trajectory_csv(args.trajectory, mesh, saved.get("sigma", {}), prices)
    write_accounting_csv(energy_accounting(traj, cfg), out / "accounting.csv")
    npv = npv_breakdown(traj, cfg).as_dict()
    npv["solver_objective"] = saved.get("objective")
    _dump(out / "npv.json", npv)
    print(f"npv {npv['npv']!r}")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "sweep": cmd_sweep, "export-mps": cmd_export,
            "import-solution": cmd_import, "report": cmd_report}


def run_command(argv=None) -> int:
    from .config_io import ConfigFileError
    from .pipeline import ConfigError
    from .signals import SignalError

    try:
        args = _parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, ConfigFileError, SignalError, KeyError, ValueError) as exc:
        if isinstance(exc, SignalError) and "No such file" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
