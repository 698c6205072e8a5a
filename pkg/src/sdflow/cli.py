"""Command-line driver for reproducible experiments.

Commands: shoot, sweep, verify, flow-graph, flow-curve.  Configuration
comes from plain key=value files (--config) with command-line flags
taking precedence; every JSON report embeds the effective configuration
and the package version, carries no timestamps, and serializes floats
at shortest round-trip precision, so identical runs produce identical
bytes.

Exit codes: 0 certified or passed, 2 inconclusive, 1 runtime error,
64 usage error, 65 parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import GraphField
from .graphpde import FlowConfig, evolve
from .identities import (
    convexity_residual_m,
    convexity_residual_q,
    q_upper_bound_residual,
    steady_first_integral_residuals,
    tangential_identity_residual,
)
from .soliton import (
    IntegratorOptions,
    ProfileState,
    SolitonKind,
    Trajectory,
    run_sweep,
    sample_initial_state,
    shoot_bidirectional,
)
from . import curveflow

USAGE_ERROR = 64
PARSE_ERROR = 65

# residual thresholds used by `verify`, matching the test suite
VERIFY_THRESHOLDS = {
    "q_convexity": 1e-4,
    "m_convexity": 1e-4,
    "tangential": 1e-4,
    "q_bound": 1e-9,
    "steady_w": 1e-8,
    "steady_k": 1e-7,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _load_config(path: str, allowed: set) -> dict:
    """key=value file; unknown keys are rejected."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed:
            raise ValueError(f"unknown config key: {key}")
        out[key] = val
    return out


def _out_dir(args) -> Path:
    root = args.out or os.environ.get("SDFLOW_OUT", "runs")
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _effective_config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys}


def _kind_from_args(parser, args) -> SolitonKind:
    if args.kind == "travelling":
        try:
            return SolitonKind.travelling(args.a, args.b)
        except ValueError as exc:
            parser.error(str(exc))
    return SolitonKind(args.kind)


def _integrator_options(args) -> IntegratorOptions:
    return IntegratorOptions(
        abs_tol=args.abs_tol,
        rel_tol=args.rel_tol,
        sample_h=args.sample_h,
    )


def _parse_init(parser, text: str) -> ProfileState:
    parts = text.split(",")
    if len(parts) != 4:
        parser.error("--init expects four values: phi,psi,k,w")
    try:
        phi, psi, k, w = (float(p) for p in parts)
    except ValueError:
        parser.error("--init values must be numbers")
    return ProfileState.initial(phi, psi, k, w)


def _cmd_shoot(parser, args) -> int:
    kind = _kind_from_args(parser, args)
    opts = _integrator_options(args)
    out = _out_dir(args)
    config_keys = ["kind", "a", "b", "init", "random", "seed", "count",
                   "budget", "abs_tol", "rel_tol", "sample_h"]
    config = _effective_config(args, config_keys)

    if args.random:
        inits = []
        for i in range(args.count):
            rng = np.random.default_rng([args.seed, i])
            inits.append((sample_initial_state(rng), args.seed))
    else:
        if args.init is None:
            parser.error("either --init or --random is required")
        inits = [(_parse_init(parser, args.init), None)]

    worst = 0
    counts = {"trivial": 0, "breakdown": 0, "inconclusive": 0}
    for i, (init, seed) in enumerate(inits):
        report = shoot_bidirectional(kind, init, args.budget, opts, seed=seed)
        counts[report.outcome] += 1
        tag = f"_{i:03d}" if len(inits) > 1 else ""
        payload = report.to_dict()
        payload["config"] = config
        payload["version"] = __version__
        _write_json(out / f"report{tag}.json", payload)
        (out / f"trajectory{tag}_fwd.csv").write_text(report.forward.to_csv())
        (out / f"trajectory{tag}_bwd.csv").write_text(report.backward.to_csv())
        if report.outcome == "inconclusive":
            worst = 2
    print(
        f"shoot {kind.name}: {counts['trivial']} trivial, "
        f"{counts['breakdown']} breakdown, {counts['inconclusive']} inconclusive"
    )
    return worst


def _cmd_sweep(parser, args) -> int:
    kind = _kind_from_args(parser, args)
    opts = _integrator_options(args)
    out = _out_dir(args)
    reports = run_sweep(kind, args.count, args.seed, args.budget, opts, workers=args.workers)
    # workers is execution infrastructure, not experiment identity: per-run
    # reports stay byte-identical for any worker count
    config = _effective_config(
        args, ["kind", "a", "b", "seed", "count", "budget", "abs_tol", "rel_tol"]
    )
    counts = {"trivial": 0, "breakdown": 0, "inconclusive": 0}
    for i, report in enumerate(reports):
        counts[report.outcome] += 1
        payload = report.to_dict()
        payload["config"] = config
        payload["version"] = __version__
        _write_json(out / f"run_{i:03d}.json", payload)
    _write_json(
        out / "summary.json",
        {"config": config, "version": __version__, "counts": counts},
    )
    print(f"sweep {kind.name}: {counts}")
    return 2 if counts["inconclusive"] else 0


def _verify_one(path: Path) -> list:
    traj = Trajectory.from_csv(path.read_text())
    reports = []
    if traj.kind.name == "selfsimilar":
        rep = convexity_residual_q(traj)
        rep.threshold = VERIFY_THRESHOLDS["q_convexity"]
        reports.append(rep.to_dict())
        bound = q_upper_bound_residual(traj)
        reports.append(
            {
                "identity": "q_bound",
                "max_residual": max(bound, 0.0),
                "y_at_max": None,
                "samples": traj.n,
                "threshold": VERIFY_THRESHOLDS["q_bound"],
                "pass": bound <= VERIFY_THRESHOLDS["q_bound"],
            }
        )
    elif traj.kind.name == "travelling":
        rep = convexity_residual_m(traj)
        rep.threshold = VERIFY_THRESHOLDS["m_convexity"]
        reports.append(rep.to_dict())
        rep = tangential_identity_residual(traj, traj.kind.a, traj.kind.b)
        rep.threshold = VERIFY_THRESHOLDS["tangential"]
        reports.append(rep.to_dict())
    else:
        res_w, res_k = steady_first_integral_residuals(traj)
        reports.append(
            {
                "identity": "steady_first_integrals",
                "max_residual": max(res_w, res_k),
                "y_at_max": None,
                "samples": traj.n,
                "threshold": max(VERIFY_THRESHOLDS["steady_w"], VERIFY_THRESHOLDS["steady_k"]),
                "pass": res_w <= VERIFY_THRESHOLDS["steady_w"]
                and res_k <= VERIFY_THRESHOLDS["steady_k"],
            }
        )
    return reports


def _cmd_verify(parser, args) -> int:
    out = _out_dir(args)
    bundle = []
    for name in args.trajectories:
        path = Path(name)
        try:
            reports = _verify_one(path)
        except (OSError, ValueError) as exc:
            print(f"verify: {name}: {exc}", file=sys.stderr)
            return PARSE_ERROR
        bundle.append({"file": name, "checks": reports})
    payload = {
        "version": __version__,
        "config": {"trajectories": list(args.trajectories)},
        "reports": bundle,
    }
    _write_json(out / "verify.json", payload)
    ok = all(chk["pass"] for entry in bundle for chk in entry["checks"])
    for entry in bundle:
        for chk in entry["checks"]:
            status = "pass" if chk["pass"] else "FAIL"
            print(f"{entry['file']}: {chk['identity']}: {chk['max_residual']:.3e} [{status}]")
    return 0 if ok else 1


def _emit_plot_data(path: Path, rows) -> None:
    with path.open("w") as fh:
        fh.write("t,series,value\n")
        for t, series, value in rows:
            fh.write(f"{float(t)!r},{series},{float(value)!r}\n")


def _cmd_flow_graph(parser, args) -> int:
    n, L = args.n, args.L
    x = np.arange(n) * L / n
    f = GraphField(L, args.A, args.eps * np.sin(2.0 * math.pi * x / L))
    cfg = FlowConfig(dt=args.dt, t_end=args.t_end, scheme=args.scheme)
    out = _out_dir(args)
    final, series = evolve(f, cfg, frames=args.frames)
    manifest = []
    plot_rows = []
    for i, (t, field, mon) in enumerate(series):
        fname = f"graph_{i:03d}.csv"
        (out / fname).write_text(field.to_csv())
        manifest.append({"t": t, "frame_file": fname, "monitors": mon.to_dict()})
        for key, val in mon.to_dict().items():
            if key != "t":
                plot_rows.append((t, key, val))
    config = _effective_config(args, ["n", "L", "A", "eps", "dt", "t_end", "scheme", "frames"])
    _write_json(out / "manifest.json", {"version": __version__, "config": config, "frames": manifest})
    if args.emit_plot_data:
        _emit_plot_data(out / "plot_data.csv", plot_rows)
    print(f"flow-graph: {len(series)} frames, final max|w| = {np.max(np.abs(final.values)):.3e}")
    return 0


def _seed_curve(parser, args) -> curveflow.ClosedCurve:
    if args.input:
        rows = []
        try:
            for ln in Path(args.input).read_text().strip().splitlines():
                if ln.startswith("#") or ln.strip() == "x,y":
                    continue
                sx, sy = ln.split(",")
                rows.append((float(sx), float(sy)))
        except (OSError, ValueError) as exc:
            print(f"flow-curve: {exc}", file=sys.stderr)
            raise SystemExit(PARSE_ERROR)
        return curveflow.ClosedCurve(np.asarray(rows))
    if args.seed_shape == "lemniscate":
        return curveflow.seed_lemniscate(args.n)
    if args.seed_shape == "circle":
        return curveflow.seed_circle(args.kappa, args.n)
    if args.seed_shape == "ellipse":
        return curveflow.seed_ellipse(args.major, args.minor, args.n)
    parser.error("choose --seed lemniscate|circle|ellipse or --input FILE")


def _cmd_flow_curve(parser, args) -> int:
    curve = _seed_curve(parser, args)
    out = _out_dir(args)
    result = curveflow.flow(
        curve,
        dt=args.dt,
        t_end=args.t_end,
        resample_every=args.resample_every,
        frames=args.frames,
    )
    manifest = []
    plot_rows = []
    for i, (t, c, mon) in enumerate(result.frames):
        fname = f"curve_{i:03d}.csv"
        with (out / fname).open("w") as fh:
            fh.write("x,y\n")
            for px, py in c.points:
                fh.write(f"{float(px)!r},{float(py)!r}\n")
        manifest.append({"t": t, "file": fname, **mon.to_dict()})
        for key, val in mon.to_dict().items():
            plot_rows.append((t, key, val))
    config = _effective_config(
        args,
        ["seed_shape", "input", "n", "kappa", "major", "minor", "dt", "t_end",
         "resample_every", "frames"],
    )
    payload = {
        "version": __version__,
        "config": config,
        "outcome": asdict(result.outcome),
        "frames": manifest,
    }
    _write_json(out / "manifest.json", payload)
    if args.emit_plot_data:
        _emit_plot_data(out / "plot_data.csv", plot_rows)
    print(f"flow-curve: outcome {result.outcome.kind}, t_ext {result.outcome.t_ext}")
    return 0 if result.outcome.kind != "failed" else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output directory (default $SDFLOW_OUT or ./runs)")
    p.add_argument("--config", default=None, help="key=value config file")


def _add_shoot_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("kind", choices=["steady", "selfsimilar", "travelling"])
    p.add_argument("--init", default=None, help="phi,psi,k,w at y=0")
    p.add_argument("--a", type=float, default=0.0, help="travelling wave speed a")
    p.add_argument("--b", type=float, default=0.0, help="travelling wave speed b")
    p.add_argument("--random", action="store_true", help="sample seeded random initial states")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--budget", type=float, default=200.0)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--sample-h", type=float, default=None)


def build_parser():
    parser = _Parser(prog="sdflow", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {}

    p = commands["shoot"] = sub.add_parser("shoot", help="classify one or more initial states")
    _add_shoot_args(p)
    _add_common(p)

    p = commands["sweep"] = sub.add_parser("sweep", help="seeded random classification sweep")
    _add_shoot_args(p)
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)

    p = commands["verify"] = sub.add_parser("verify", help="identity checks on trajectory files")
    p.add_argument("trajectories", nargs="+")
    _add_common(p)

    p = commands["flow-graph"] = sub.add_parser("flow-graph", help="evolve a periodic graph perturbation")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--L", type=float, default=2.0 * math.pi)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--scheme", choices=["semi_implicit", "explicit_rk"], default="semi_implicit")
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--emit-plot-data", action="store_true")
    _add_common(p)

    p = commands["flow-curve"] = sub.add_parser("flow-curve", help="evolve a closed curve")
    p.add_argument("--seed", dest="seed_shape", choices=["lemniscate", "circle", "ellipse"],
                   default=None)
    p.add_argument("--input", default=None, help="CSV of x,y rows (closed implied)")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--major", type=float, default=1.0)
    p.add_argument("--minor", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--t-end", type=float, default=8.0)
    p.add_argument("--resample-every", type=int, default=5)
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--emit-plot-data", action="store_true")
    _add_common(p)
    return parser, commands


_COMMANDS = {
    "shoot": _cmd_shoot,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "flow-graph": _cmd_flow_graph,
    "flow-curve": _cmd_flow_curve,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser, commands = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            subparser = commands[args.command]
            overrides = _load_config(args.config, {a.dest for a in subparser._actions})
            for key, val in overrides.items():
                action = next(a for a in subparser._actions if a.dest == key)
                if not _flag_given(argv, action):
                    setattr(args, key, _coerce(action, val))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    except ValueError as exc:
        print(f"sdflow: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](parser, args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except (ValueError, OSError) as exc:
        print(f"sdflow: error: {exc}", file=sys.stderr)
        return 1


def _flag_given(argv, action) -> bool:
    return any(opt in argv for opt in action.option_strings)


def _coerce(action, val: str):
    if isinstance(action.const, bool):
        return val.lower() in ("1", "true", "yes")
    if action.type is not None:
        return action.type(val)
    return val


if __name__ == "__main__":
    sys.exit(main())
