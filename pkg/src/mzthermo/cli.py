"""Command-line front end.

Exit codes: 0 success, 1 usage or precondition error, 2 tolerance failure.
Diagnostics go to stderr; data goes to ``<out>.csv``, ``<out>.json`` and
``<out>.svg``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analytic import (
    MziConfig,
    neff_local_maxima,
    qfi_at,
    qfi_max_over_neff,
    qfi_naive_phase,
)
from .errors import ThermometryError
from .estimation import (
    MODES,
    ExperimentConfig,
    fit_linear,
    fit_quadratic,
    loglog_slope,
    run_experiment,
    scaling_study,
)
from .oracle import mode_a_qfi
from .output import write_csv, write_json
from .svg import Series, heatmap, line_plot
from .thermal import ThermalEnsemble, gibbs_qfi
from .validation import triangle_suite

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2
DEFAULT_MAX_POINTS = 1_000_000
COMMANDS = ("qfi-curve", "qfi-surface", "optimize-neff", "scaling", "experiment", "oracle-check", "naive-compare")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- grid syntax ---------------------------------------------------------------


def float_grid(text: str) -> list[float]:
    """``a,b,c`` or ``lo:hi:n`` (inclusive linspace); segments may be mixed with commas."""
    out: list[float] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise argparse.ArgumentTypeError(f"range {part!r} must be lo:hi:n")
            lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
            if n < 1:
                raise argparse.ArgumentTypeError("range needs at least one point")
            out += [float(v) for v in np.linspace(lo, hi, n)]
        else:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError("empty grid")
    if any(not math.isfinite(v) for v in out):
        raise argparse.ArgumentTypeError("grid values must be finite")
    return out


def int_grid(text: str) -> list[int]:
    """``1,2,5`` or ``lo:hi`` (inclusive) segments."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = (int(v) for v in part.split(":"))
            out += list(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty grid")
    return out


def temperature_grid(text: str) -> list[float]:
    vals = float_grid(text)
    if any(v == 0 for v in vals):
        raise argparse.ArgumentTypeError("T = 0 is not allowed; use a small signed value")
    return vals


def positive_int_grid(text: str) -> list[int]:
    vals = int_grid(text)
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


# -- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument("--out", help="output path prefix (default: command name)")
    p.add_argument("--no-svg", action="store_true", help="skip the SVG plot")
    p.add_argument("--timestamp", action="store_true", help="record wall-clock time in JSON provenance")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _physics(p, M="1", N="1", T=None, neff="0.5"):
    p.add_argument("--M", type=positive_int_grid, default=M, help="sample size(s)")
    p.add_argument("--N", type=positive_int_grid, default=N, help="N00N excitation(s)")
    p.add_argument("--T", type=temperature_grid, default=T, help="temperature grid, e.g. 0.1,0.2 or -3:3:60")
    p.add_argument("--neff", type=float_grid, default=neff, help="n_eff value(s)")
    p.add_argument("--optimize-neff", action="store_true", help="maximize the QFI over n_eff per point")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mzthermo", description="Dispersive N00N interferometer thermometry toolkit")
    parser.add_argument("--version", action="version", version=f"mzthermo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("qfi-curve", help="QFI along T, M or n_eff")
    _common(p)
    _physics(p, T="0.25")
    p.add_argument("--sweep", choices=("T", "M", "neff"), default="T")
    p.add_argument("--p-gamma", type=float, default=None, help="add a depolarized (oracle) column")
    p.add_argument("--gibbs", action="store_true", help="add the equilibrium QFI column")

    p = sub.add_parser("qfi-surface", help="QFI over a (T, n_eff) grid with per-T ridge")
    _common(p)
    _physics(p, T="0.05:3:60", neff="0:6.283185307179586:120")
    p.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)

    p = sub.add_parser("optimize-neff", help="n_eff maximizing the QFI per T")
    _common(p)
    _physics(p, T="0.1:3:30")
    p.add_argument("--neff-range", type=float_grid, default="0,6.283185307179586")

    p = sub.add_parser("scaling", help="optimal QFI versus M for several N")
    _common(p)
    _physics(p, M="1:9", N="1,2,3", T="2")
    p.add_argument("--shots", type=int, default=None, help="also run shot-based estimates")
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--delta-T", type=float, default=0.01)

    p = sub.add_parser("experiment", help="shot-noise CFI protocol over a T grid")
    _common(p)
    _physics(p, T="-3,-2.2,-1.5,-1,-0.65,-0.45,-0.3,-0.25,-0.2,-0.15,0.1,0.15,0.2,0.25,0.3,0.45,0.65,1,1.5,2.2,3")
    p.add_argument("--shots", type=int, default=5000)
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--delta-T", type=float, default=0.01, help="absolute finite-difference step")
    p.add_argument("--delta-rel", type=float, default=None, help="step as a fraction of |T| (overrides --delta-T)")
    p.add_argument("--mode", choices=MODES, default="finite-difference")
    p.add_argument("--smoothing", action="store_true", help="add-half smoothing of bright fractions")
    p.add_argument("--sign", choices=("minus", "plus"), default="minus", help="N00N relative sign")

    p = sub.add_parser("oracle-check", help="closed form / oracle / circuit agreement suite")
    _common(p)
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--M-max", type=int, default=6)
    p.add_argument("--N-max", type=int, default=3)
    p.add_argument("--inject-fault", action="store_true", help="perturb alpha by 1e-6 to test the tester")
    p.add_argument("--no-qfi", action="store_true")
    p.add_argument("--no-circuit", action="store_true")

    p = sub.add_parser("naive-compare", help="mean-phase N^2 estimate versus the exact QFI")
    _common(p)
    _physics(p, N="1:8", T="0.25")
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    return parser


def _config_defaults(path: str, sub: argparse.ArgumentParser) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    known = {a.dest: a for a in sub._actions}
    out = {}
    for key, val in data.items():
        if key == "command":
            continue
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        elif isinstance(val, (int, float)) and not isinstance(val, bool):
            val = repr(val)
        out[dest] = val
    return out


def parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        defaults = _config_defaults(args.config, sub)
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# -- helpers ---------------------------------------------------------------


def _spec(args) -> dict:
    d = {k: v for k, v in sorted(vars(args).items()) if k not in ("timestamp",)}
    return json.loads(json.dumps(d, default=str))


def _outputs(args) -> Path:
    return Path(args.out if args.out else args.command)


def _path(base: Path, suffix: str) -> Path:
    return base.with_name(base.name + suffix)


def _write(args, header, rows, results, seeds=None, extra=None, svg=None, tag="") -> None:
    base = _outputs(args)
    if base.parent and not base.parent.exists():
        base.parent.mkdir(parents=True, exist_ok=True)
    spec = _spec(args)
    write_csv(_path(base, tag + ".csv"), header, rows, {"command": args.command, "spec": spec})
    if not tag:
        write_json(_path(base, ".json"), spec, seeds, results, args.timestamp, extra)
        if svg is not None and not args.no_svg:
            _path(base, ".svg").write_text(svg, encoding="utf-8")


def _cfg(M, N, eps, neff=0.0) -> MziConfig:
    return MziConfig(N=N, M=M, epsilon=eps).with_neff(neff)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise UsageError(msg)


def _qvalue(M, N, T, neff, eps, optimize) -> tuple[float, float]:
    if optimize:
        return qfi_max_over_neff(_cfg(M, N, eps), T)
    return neff, float(qfi_at(M, T, neff, eps))


# -- commands ------------------------------------------------------------------


def cmd_qfi_curve(args) -> int:
    _require(args.T is not None, "--T is required")
    eps = args.epsilon
    single = {"T": args.T, "M": args.M, "neff": args.neff}
    for k, v in single.items():
        if k != args.sweep and k != ({"T": "M", "M": "T", "neff": "T"}[args.sweep]) and len(v) != 1:
            raise UsageError(f"--{k} must be a single value when sweeping {args.sweep}")
    _require(len(args.N) == 1, "--N must be a single value")
    _require(not (args.optimize_neff and args.sweep == "neff"), "--optimize-neff conflicts with --sweep neff")
    if args.p_gamma is not None:
        _require(0.0 <= args.p_gamma <= 1.0, "--p-gamma must lie in [0, 1]")
    N = args.N[0]
    if args.sweep == "T":
        xs, series_vals, series_name = args.T, args.M, "M"
    elif args.sweep == "M":
        xs, series_vals, series_name = args.M, args.T, "T"
    else:
        xs, series_vals, series_name = args.neff, args.T, "T"

    header = ["T", "M", "N", "n_eff", "qfi"]
    if args.gibbs:
        header.append("qfi_gibbs")
    if args.p_gamma is not None:
        header.append("qfi_depolarized")
    rows, results, plot = [], [], []
    for sv in series_vals:
        ys, yd = [], []
        for xv in xs:
            T = {"T": xv, "M": sv, "neff": sv}[args.sweep]
            M = int({"T": sv, "M": xv, "neff": args.M[0]}[args.sweep])
            nu = xv if args.sweep == "neff" else args.neff[0]
            nu, q = _qvalue(M, N, T, nu, eps, args.optimize_neff)
            row = [T, M, N, nu, q]
            if args.gibbs:
                row.append(gibbs_qfi(ThermalEnsemble(M, T, eps)))
            if args.p_gamma is not None:
                qd = mode_a_qfi(_cfg(M, N, eps, nu), T, p_gamma=args.p_gamma)
                row.append(qd)
                yd.append(qd)
            rows.append(row)
            results.append(dict(zip(header, row)))
            ys.append(q)
        plot.append(Series(xs, ys, f"{series_name}={sv:g}"))
        if yd:
            plot.append(Series(xs, yd, f"{series_name}={sv:g}, p_gamma={args.p_gamma:g}", dashed=True))
    svg = line_plot(plot, "QFI", {"T": "T / epsilon", "M": "M", "neff": "n_eff"}[args.sweep], "Q")
    _write(args, header, rows, results, svg=svg)
    return EXIT_OK


def cmd_qfi_surface(args) -> int:
    _require(len(args.M) == 1 and len(args.N) == 1, "--M and --N must be single values")
    Ts, nus = args.T, args.neff
    n = len(Ts) * len(nus)
    if n > args.max_points:
        raise UsageError(f"grid has {n} points, above --max-points {args.max_points}")
    M, N, eps = args.M[0], args.N[0], args.epsilon
    nu_arr = np.asarray(nus, float)
    z = np.array([qfi_at(M, T, nu_arr, eps) for T in Ts]).reshape(len(Ts), len(nus))
    rows = [[T, nu, z[i, j]] for i, T in enumerate(Ts) for j, nu in enumerate(nus)]
    ridge_rows, overlay, ridge_results = [], [], []
    lo, hi = (min(nus), max(nus)) if len(nus) > 1 else (0.0, 2 * math.pi)
    for T in Ts:
        peaks = neff_local_maxima(_cfg(M, N, eps), T, (lo, hi)) if hi > lo else []
        top = max((q for _, q in peaks), default=math.nan)
        for k, (nu, q) in enumerate(sorted(peaks)):
            is_global = q == top
            ridge_rows.append([T, k, nu, q, is_global])
            ridge_results.append({"T": T, "n_eff": nu, "qfi": q, "global": is_global})
            overlay.append((T, nu))
    svg = heatmap(Ts, nus, z, overlay, f"QFI, M={M}", "T / epsilon", "n_eff")
    results = [{"T": r[0], "n_eff": r[1], "qfi": r[2]} for r in rows]
    _write(args, ["T", "n_eff", "qfi"], rows, results, extra={"ridge": ridge_results}, svg=svg)
    _write(args, ["T", "index", "n_eff", "qfi", "global"], ridge_rows, None, tag="-ridge")
    return EXIT_OK


def cmd_optimize_neff(args) -> int:
    _require(len(args.neff_range) == 2 and args.neff_range[1] > args.neff_range[0], "--neff-range needs lo,hi")
    eps = args.epsilon
    header = ["T", "M", "N", "n_eff_star", "qfi_star", "local_maxima"]
    rows, results, series = [], [], []
    for M in args.M:
        for N in args.N:
            xs, ys = [], []
            for T in args.T:
                cfg = _cfg(M, N, eps)
                nu, q = qfi_max_over_neff(cfg, T, tuple(args.neff_range))
                peaks = neff_local_maxima(cfg, T, tuple(args.neff_range))
                rows.append([T, M, N, nu, q, len(peaks)])
                results.append({"T": T, "M": M, "N": N, "n_eff_star": nu, "qfi_star": q, "local_maxima": peaks})
                xs.append(T)
                ys.append(nu)
            series.append(Series(xs, ys, f"M={M}, N={N}", markers=True))
    _write(args, header, rows, results, svg=line_plot(series, "QFI-optimal n_eff", "T / epsilon", "n_eff*"))
    return EXIT_OK


def cmd_scaling(args) -> int:
    _require(len(args.T) == 1, "--T must be a single value")
    T = args.T[0]
    if args.shots is not None:
        _require(args.shots >= 1 and args.reps >= 1, "--shots and --reps must be positive")
    rows_ = scaling_study(
        T, args.N, args.M, args.epsilon, args.shots, args.reps, args.delta_T, args.seed
    )
    header = ["T", "N", "M", "n_eff_star", "qfi_star", "cfi_mean", "cfi_std"]
    rows = [[T, r.N, r.M, r.n_eff_star, r.qfi_star, r.cfi_mean, r.cfi_std] for r in rows_]
    results = [dict(zip(header, r)) for r in rows]
    fits, series = {}, []
    for N in args.N:
        sel = [r for r in rows_ if r.N == N]
        Ms = [r.M for r in sel]
        qs = [r.qfi_star for r in sel]
        if len(Ms) >= 2:
            c1, r2 = fit_linear(Ms, qs)
            q1, q2 = fit_quadratic(Ms, qs)
            fits[str(N)] = {"c1": c1, "r2": r2, "quad_c1": q1, "quad_c2": q2}
            print(f"N={N}: c1={c1:.6g} R^2={r2:.6f} quadratic c1={q1:.6g} c2={q2:.6g}", file=sys.stderr)
        series.append(Series(Ms, qs, f"N={N}", markers=len(args.N) > 1 and N != args.N[0]))
    _write(args, header, rows, results, extra={"fits": fits}, svg=line_plot(series, f"max QFI at T={T:g}", "M", "Q*"))
    return EXIT_OK


def cmd_experiment(args) -> int:
    _require(len(args.M) == 1 and len(args.N) == 1, "--M and --N must be single values")
    _require(args.shots >= 1 and args.reps >= 1, "--shots and --reps must be positive")
    M, N, eps = args.M[0], args.N[0], args.epsilon
    point_seeds = np.random.SeedSequence(args.seed).generate_state(len(args.T), dtype=np.uint64)
    header = ["T", "n_eff", "M", "N", "shots", "reps", "delta_T", "cfi_mean", "cfi_std", "cfi_stderr",
              "undefined", "qfi_analytic"]
    configs = []
    for i, T in enumerate(args.T):
        d = args.delta_rel * abs(T) if args.delta_rel is not None else args.delta_T
        nu, q = _qvalue(M, N, T, args.neff[0], eps, args.optimize_neff)
        ec = ExperimentConfig(_cfg(M, N, eps, nu), T, args.shots, args.reps, d, int(point_seeds[i]),
                              args.mode, args.smoothing, args.sign)
        configs.append((ec, nu, q))  # validate every point before running any
    rows, results, seeds = [], [], []
    for ec, nu, q in configs:
        est = run_experiment(ec)
        rows.append([ec.temperature, nu, M, N, ec.shots, ec.repetitions, ec.delta_T, est.mean, est.std,
                     est.stderr, est.undefined, q])
        results.append({**dict(zip(header, rows[-1])), "per_repetition": est.per_repetition,
                        "repetition_seeds": est.seeds})
        seeds.append(ec.seed)
    Ts = [r[0] for r in rows]
    fine = np.linspace(min(Ts), max(Ts), 400)
    fine = fine[np.abs(fine) > 1e-3]
    qline = [_qvalue(M, N, T, args.neff[0], eps, args.optimize_neff)[1] for T in fine]
    svg = line_plot(
        [Series(fine, qline, "analytic QFI"), Series(Ts, [r[7] for r in rows], "CFI mean +- std",
                                                     yerr=[r[8] for r in rows], markers=True)],
        f"CFI from {args.shots} shots x {args.reps} repetitions", "T / epsilon", "F",
    )
    _write(args, header, rows, results, seeds={"base": args.seed, "per_point": seeds}, svg=svg)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    _require(args.points >= 1 and args.M_max >= 1 and args.N_max >= 1, "counts must be positive")
    report = triangle_suite(
        args.points, args.M_max, args.N_max, args.seed, args.epsilon,
        alpha_fault=1e-6 if args.inject_fault else None, qfi=not args.no_qfi, circuit=not args.no_circuit,
    )
    rows = [[k, c["tolerance"], c["max_deviation"], len(c["offending"]), c["passed"]]
            for k, c in report["checks"].items()]
    _write(args, ["check", "tolerance", "max_deviation", "failures", "passed"], rows, [report],
           seeds={"grid": args.seed})
    for k, c in report["checks"].items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {k}: max deviation {c['max_deviation']:.3e} "
              f"(tol {c['tolerance']:g}, {len(c['offending'])} offending)", file=sys.stderr)
        for o in c["offending"][:10]:
            print(f"    {o}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def cmd_naive_compare(args) -> int:
    _require(len(args.M) == 1 and len(args.T) == 1, "--M and --T must be single values")
    _require(args.chi >= 0 and args.t >= 0, "--chi and --t must be non-negative")
    M, T, eps = args.M[0], args.T[0], args.epsilon
    header = ["N", "M", "T", "qfi_naive", "qfi_exact", "n_eff_star"]
    rows = []
    for N in args.N:
        naive = qfi_naive_phase(MziConfig(N=N, chi=args.chi, t=args.t, epsilon=eps, M=M), T)
        nu, q = qfi_max_over_neff(_cfg(M, N, eps), T)
        rows.append([N, M, T, naive, q, nu])
    Ns = [r[0] for r in rows]
    slopes = {}
    if len(Ns) >= 2 and all(r[3] > 0 and r[4] > 0 for r in rows):
        slopes = {"naive": loglog_slope(Ns, [r[3] for r in rows]), "exact": loglog_slope(Ns, [r[4] for r in rows])}
        print(f"log-log slope vs N: naive {slopes['naive']:.4f}, exact {slopes['exact']:.4f}", file=sys.stderr)
    svg = line_plot(
        [Series(Ns, [r[3] for r in rows], "mean-phase N^2 estimate", markers=True),
         Series(Ns, [r[4] for r in rows], "exact QFI (optimal n_eff)", markers=True)],
        f"M={M}, T={T:g}", "N", "Q",
    )
    _write(args, header, rows, [dict(zip(header, r)) for r in rows], extra={"loglog_slopes": slopes}, svg=svg)
    return EXIT_OK


HANDLERS = {
    "qfi-curve": cmd_qfi_curve,
    "qfi-surface": cmd_qfi_surface,
    "optimize-neff": cmd_optimize_neff,
    "scaling": cmd_scaling,
    "experiment": cmd_experiment,
    "oracle-check": cmd_oracle_check,
    "naive-compare": cmd_naive_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
        return HANDLERS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ThermometryError) as exc:
        print(f"mzthermo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
