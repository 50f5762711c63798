"""Command-line front end: enumeration oracles, exact sampling, mixing
diagnostics, limit-shape exports, the verification battery, and SVG
rendering."""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import subprocess
import sys

import numpy as np

from . import __version__
from . import limitshape as ls
from .dynamics import ChainConfig, cftp_sample, grand_coupling
from .experiments import (
    ExperimentReport,
    coalescence_scaling,
    concentration_experiment,
    draw_cftp_samples,
    empirical_tv_check,
    level_line_concentration,
    tilted_shape_experiment,
    tilted_volume_experiment,
    uniformity_test,
)
from .gridio import dump_field, load_field
from .hexlattice import (
    HexDomain,
    count_tilings_macmahon,
    count_tilings_paths,
    enumerate_all,
)
from .render import render_svg
from .rng import replica_seed
from .spectrum import (
    detailed_balance_residual,
    exact_spectrum,
    stationarity_residual,
    tmix_exact,
)


def build_id() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=here, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0:
            return f"hexmix-{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"hexmix-{__version__}"


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header_comment(args) -> str:
    return f"# config: {json.dumps(_config_echo(args), sort_keys=True)}\n# build: {build_id()}\n"


def _g17(v: float) -> str:
    return f"{v:.17g}"


# ---------------------------------------------------------------------------
# subcommands (each returns the exit code)


def cmd_enumerate(args) -> int:
    d = HexDomain(*args.sides)
    mac = count_tilings_macmahon(*args.sides)
    lgv = count_tilings_paths(*args.sides)
    ok = mac == lgv
    if mac <= args.limit:
        ok &= len(enumerate_all(d, limit=args.limit)) == mac
    payload = {
        "config": _config_echo(args),
        "build": build_id(),
        "count": str(mac),
        "oracles_agree": bool(ok),
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(f"{mac}\n", args.out)
    return 0 if ok else 1


def cmd_sample(args) -> int:
    d = HexDomain(*args.sides)
    fields = []
    for i in range(args.replicas):
        cfg = ChainConfig(
            domain=d, q=args.q, seed=replica_seed(args.seed, i), nscale=args.n
        )
        fields.append(cftp_sample(cfg))
    if args.format == "svg":
        _emit(render_svg(fields[0], nscale=args.n, q=args.q), args.out)
    elif args.format == "json":
        payload = {
            "config": _config_echo(args),
            "build": build_id(),
            "samples": [dump_field(f) for f in fields],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:  # grid
        head = _header_comment(args) if args.out is None else ""
        _emit(head + "\n".join(dump_field(f) for f in fields), args.out)
    return 0


def cmd_mix(args) -> int:
    ok = True
    lines = [_header_comment(args)]
    if args.coalescence:
        rep = coalescence_scaling(args.n_list, args.replicas, args.seed)
        ok &= rep.passed()
        lines.append(rep.to_text())
    else:
        d = HexDomain(*args.sides)
        spec = exact_spectrum(d, args.q, nscale=args.n)
        res = stationarity_residual(spec)
        db = detailed_balance_residual(spec)
        tm = tmix_exact(spec, args.tol if 0 < args.tol < 1 else 0.25)
        ok &= res < 1e-10 and db < 1e-10
        lines.append(
            f"states {len(spec.states)}\ngap {_g17(spec.gap)}\n"
            f"tmix(1/4) {_g17(tm)}\nstationarity_residual {res:.3e}\n"
            f"detailed_balance_residual {db:.3e}\n"
        )
    _emit("".join(lines), args.out)
    return 0 if ok else 1


def _shape_rows(p: ls.ShapeParams, N: int, res: int):
    rows = []
    for i in range(1, res):
        x = (p.a + p.c) * i / res
        for j in range(1, res):
            y = j / res * (p.b + p.c)
            if not p.in_hexagon(x, y, tol=-1e-9):
                continue
            phase = ls.classify((x, y), p)
            H = ls.height((x, y), p)
            dHx, dHy = ls.grad_height((x, y), p)
            xi = ls.xi_xy(x, y, p)
            ec = ls.edge_coords((x, y), p, N)
            rows.append((x, y, phase, H, dHx, dHy, xi, ec.d_tt, ec.e_tt))
    return rows


def cmd_shape(args) -> int:
    p = ls.ShapeParams(args.q, *[s / args.n for s in args.sides])
    if args.conic_check:
        worst = 0.0
        for x, y in ls.arctic_polyline(p):
            X, Y = p.XY(x, y)
            worst = max(worst, abs(ls.xi_eta_zeta(X, Y, p)[0]))
        _emit(
            _header_comment(args) + f"max_conic_residual {worst:.3e}\n", args.out
        )
        return 0 if worst < 1e-9 else 1
    if args.arctic:
        out = io.StringIO()
        out.write(_header_comment(args))
        out.write("x,y\n")
        for x, y in ls.arctic_polyline(p):
            out.write(f"{_g17(x)},{_g17(y)}\n")
        _emit(out.getvalue(), args.out)
        return 0
    rows = _shape_rows(p, args.n, args.resolution)
    if args.format == "json":
        payload = {
            "config": _config_echo(args),
            "build": build_id(),
            "columns": ["x", "y", "phase", "H", "dHx", "dHy", "xi", "d", "e"],
            "rows": [
                [_g17(x), _g17(y), ph] + [_g17(v) for v in rest]
                for x, y, ph, *rest in rows
            ],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        out = io.StringIO()
        out.write(_header_comment(args))
        out.write("x,y,phase,H,dHx,dHy,xi,d,e\n")
        for x, y, ph, *rest in rows:
            out.write(f"{_g17(x)},{_g17(y)},{ph}," + ",".join(_g17(v) for v in rest) + "\n")
        _emit(out.getvalue(), args.out)
    return 0


def cmd_render(args) -> int:
    if args.infile:
        with open(args.infile) as fh:
            f = load_field(fh.read())
    else:
        d = HexDomain(*args.sides)
        f = cftp_sample(ChainConfig(domain=d, q=args.q, seed=args.seed, nscale=args.n))
    svg = render_svg(
        f,
        show_level_lines=args.level_lines,
        show_arctic=args.arctic,
        show_analytic_levels=args.analytic_levels,
        q=args.q,
        nscale=args.n,
    )
    _emit(svg, args.out)
    return 0


def _verify_reports(suite: str, seed: int) -> list[ExperimentReport]:
    big = suite == "primary"
    reports = []

    d = HexDomain(2, 2, 2)
    nsamp = 2000 if big else 300
    samples = draw_cftp_samples(d, nsamp, seed)
    p = uniformity_test(samples, d)
    spec = exact_spectrum(d, 0.0)
    reports.append(
        ExperimentReport(
            name="sampler_exactness",
            config={"sides": [2, 2, 2], "samples": nsamp},
            seed=seed,
            stats={
                "chi2_pvalue": p,
                "stationarity_residual": stationarity_residual(spec),
                "detailed_balance_residual": detailed_balance_residual(exact_spectrum(d, 1.0)),
            },
            verdicts={
                "uniform_pvalue_gt_1e-3": p > 1e-3,
                "stationarity_residual_lt_1e-10": stationarity_residual(spec) < 1e-10,
            },
        )
    )

    p0 = ls.ShapeParams(0.0)
    worst = max(
        abs(ls.xi_eta_zeta(*p0.XY(x, y), p0)[0]) for x, y in ls.arctic_polyline(p0)
    )
    reports.append(
        ExperimentReport(
            name="arctic_conic",
            config={"q": 0.0},
            seed=seed,
            stats={"max_conic_residual": worst},
            verdicts={"residual_lt_1e-9": worst < 1e-9},
        )
    )

    nas = [8, 16] if not big else [16, 32]
    reps = 100 if big else 20
    reports.append(concentration_experiment(nas, reps, 0.3, seed))
    reports.append(level_line_concentration(nas, reps, 0.4, seed))
    reports.append(tilted_volume_experiment(8, [-1.0, 0.0, 1.0], 40 if big else 20, seed))
    reports.append(tilted_shape_experiment(16 if big else 8, 0.5, 30 if big else 10, seed))
    reports.append(
        coalescence_scaling([4, 6, 8, 12, 16] if big else [4, 6, 8], reps, seed)
    )
    reports.append(empirical_tv_check(10_000 if big else 2000, seed))
    return reports


def cmd_verify(args) -> int:
    reports = _verify_reports(args.suite, args.seed)
    ok = all(r.passed() for r in reports)
    text = io.StringIO()
    text.write(_header_comment(args))
    for r in reports:
        text.write(r.to_text())
        text.write("\n")
    text.write(f"OVERALL {'PASS' if ok else 'FAIL'}\n")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.txt"), "w") as fh:
            fh.write(text.getvalue())
        blob = {
            "config": _config_echo(args),
            "build": build_id(),
            "reports": [json.loads(r.to_json(include_wall_clock=False)) for r in reports],
            "overall_pass": ok,
        }
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            json.dump(blob, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for r in reports:
            csvtxt = r.to_csv()
            if csvtxt:
                with open(os.path.join(args.out, f"{r.name}.csv"), "w") as fh:
                    fh.write(csvtxt)
    sys.stdout.write(text.getvalue())
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def _add_common(sp, sides=True):
    if sides:
        sp.add_argument("--sides", nargs=3, type=int, default=[8, 8, 8],
                        metavar=("A", "B", "C"))
    sp.add_argument("--n", type=int, default=None, help="nominal scale N")
    sp.add_argument("--q", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.add_argument("--tol", type=float, default=0.25)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hexmix",
        description="Glauber dynamics and limit shapes of hexagon lozenge tilings",
    )
    ap.add_argument("--version", action="version", version=build_id())
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("enumerate", help="count tilings via independent oracles")
    _add_common(sp)
    sp.add_argument("--format", choices=["csv", "json", "svg", "grid"], default="grid")
    sp.add_argument("--limit", type=int, default=10_000)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("sample", help="draw exact samples by coupling from the past")
    _add_common(sp)
    sp.add_argument("--format", choices=["csv", "json", "svg", "grid"], default="grid")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("mix", help="exact spectrum or coalescence sweeps")
    _add_common(sp)
    sp.add_argument("--format", choices=["csv", "json", "svg", "grid"], default="grid")
    sp.add_argument("--coalescence", action="store_true")
    sp.add_argument("--n-list", nargs="+", type=int, default=[4, 6, 8])
    sp.set_defaults(func=cmd_mix)

    sp = sub.add_parser("shape", help="limit-shape fields and arctic curves")
    _add_common(sp)
    sp.add_argument("--format", choices=["csv", "json", "svg", "grid"], default="csv")
    sp.add_argument("--conic-check", action="store_true")
    sp.add_argument("--arctic", action="store_true")
    sp.add_argument("--resolution", type=int, default=24)
    sp.set_defaults(func=cmd_shape)

    sp = sub.add_parser("verify", help="run the verification battery")
    sp.add_argument("--suite", choices=["quick", "primary"], default="quick")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--tol", type=float, default=0.25)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("render", help="render a tiling to SVG")
    _add_common(sp)
    sp.add_argument("--format", choices=["svg"], default="svg")
    sp.add_argument("--in", dest="infile", default=None, help="height-grid file")
    sp.add_argument("--level-lines", action="store_true")
    sp.add_argument("--arctic", action="store_true")
    sp.add_argument("--analytic-levels", action="store_true")
    sp.set_defaults(func=cmd_render)
    return ap


def cli_dispatch(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "n", None) is None and hasattr(args, "sides"):
        args.n = args.sides[0]
    try:
        return args.func(args)
    except Exception as e:  # surface library errors as clean CLI failures
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch())
