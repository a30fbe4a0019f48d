"""Batch front door: pin-constants -> solve -> verify -> stability, plus the
randomized algebra fuzzer.

All outputs are JSON (reports) or CSV (profiles, tables), written atomically
(temp file + rename) and deterministic for a fixed seed.  Exit codes:
0 ok, 1 config error, 2 oracle failure, 3 no soliton found, 4 identity
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .config import ConfigError, RunConfig, Tolerances, load_run_config
from .geometry import GeometryError, PinnedConstants, ProfileGrid
from .grids import Scheme
from . import algebra, solver, stability

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ORACLE = 2
EXIT_NO_SOLITON = 3
EXIT_IDENTITY = 4


# ---------------------------------------------------------------------------
# atomic, deterministic file output


def _write_atomic(path: str, content: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, payload: dict):
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _csv_row(values) -> str:
    return ",".join(format(v, ".17g") for v in values)


# ---------------------------------------------------------------------------
# solution (de)serialization


def profile_csv_header(r: int) -> str:
    cols = ["t", "f", "df", "ddf"]
    for i in range(1, r + 1):
        cols += [f"l{i}", f"dl{i}", f"ddl{i}"]
    cols += ["u", "du", "ddu"]
    return ",".join(cols)


def write_solution(out_dir: str, sol: solver.SolitonSolution):
    g = sol.grid
    r = g.nfactors
    lines = [profile_csv_header(r)]
    for k in range(g.t.size):
        row = [g.t[k], g.f[k], g.df[k], g.ddf[k]]
        for i in range(r):
            row += [g.l[i, k], g.dl[i, k], g.ddl[i, k]]
        row += [g.u[k], g.du[k], g.ddu[k]]
        lines.append(_csv_row(row))
    _write_atomic(os.path.join(out_dir, f"profile_{sol.method}.csv"),
                  "\n".join(lines) + "\n")
    payload = sol.to_dict()
    payload["scheme"] = g.scheme.kind
    _write_json(os.path.join(out_dir, f"solution_{sol.method}.json"), payload)


def read_solution(sol_dir: str, method: str) -> solver.SolitonSolution:
    with open(os.path.join(sol_dir, f"solution_{method}.json")) as fh:
        meta = json.load(fh)
    data = np.loadtxt(os.path.join(sol_dir, f"profile_{method}.csv"),
                      delimiter=",", skiprows=1)
    from .config import BaseFactor, BundleConfig

    config = BundleConfig(factors=tuple(
        BaseFactor(d=int(f["dim"]), p=float(f["einstein_constant"]),
                   q=int(f["twist"]),
                   kappa=float(f.get("deformation_norm2", 0.0)))
        for f in meta["config"]["factors"]
    ))
    r = config.r
    nodes = int(meta["nodes"])
    if data.shape != (nodes + 1, 3 * r + 7):
        raise GeometryError("profile CSV does not match the solution metadata")
    mk = Scheme.chebyshev if meta["scheme"] == "chebyshev" else Scheme.uniform
    sch = mk(nodes, 0.0, float(meta["T"]))
    if np.abs(sch.t - data[:, 0]).max() > 1e-9:
        raise GeometryError("profile nodes disagree with the stated scheme")
    l = np.stack([data[:, 4 + 3 * i] for i in range(r)])
    dl = np.stack([data[:, 5 + 3 * i] for i in range(r)])
    ddl = np.stack([data[:, 6 + 3 * i] for i in range(r)])
    grid = ProfileGrid(
        scheme=sch, f=data[:, 1], df=data[:, 2], ddf=data[:, 3],
        l=l, dl=dl, ddl=ddl,
        u=data[:, 3 * r + 4], du=data[:, 3 * r + 5], ddu=data[:, 3 * r + 6],
    )
    grid.validate()
    constants = PinnedConstants(
        A=float(__import__("fractions").Fraction(meta["constants"]["A"])),
        B=float(__import__("fractions").Fraction(meta["constants"]["B"])),
        max_rel_err=float(meta["constants"]["max_rel_err"]),
        samples=int(meta["constants"]["samples"]),
    )
    rep = solver.residual_report(grid, config, constants)
    return solver.SolitonSolution(
        grid=grid, config=config, constants=constants,
        c_slope=float(meta["c_slope"]), gauge_shift=float(meta["gauge_shift"]),
        residuals=rep, method=method,
    )


# ---------------------------------------------------------------------------
# commands


def cmd_pin_constants(args) -> int:
    from .oracle import OracleError, pin_constants

    try:
        pc = pin_constants(seed=args.seed, samples=args.samples,
                           h=args.fd_step, tol=args.fd_tol)
    except OracleError as exc:
        _write_json(args.out, {"error": str(exc)})
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    _write_json(args.out, pc.to_dict())
    print(f"pinned constants written to {args.out} "
          f"(A={pc.A}, B={pc.B}, max_rel_err={pc.max_rel_err:.3e})")
    return EXIT_OK


def _load_constants(args) -> PinnedConstants:
    if args.constants:
        return PinnedConstants.load(args.constants)
    from .oracle import pin_constants

    return pin_constants(seed=args.seed)


def cmd_solve(args) -> int:
    try:
        run = load_run_config(args.config)
        constants = _load_constants(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    methods = (["momentum", "shooting"] if run.method == "both"
               else [run.method])
    sols = {}
    try:
        for method in methods:
            fn = (solver.solve_momentum if method == "momentum"
                  else solver.solve_shooting)
            sols[method] = fn(run.bundle, constants, nodes=run.nodes,
                              scheme=run.scheme)
    except (solver.NoSolitonFound, solver.SolverError) as exc:
        _write_json(os.path.join(args.out, "diagnostics.json"),
                    {"error": str(exc), "config": run.bundle.to_dict()})
        print(f"no soliton: {exc}", file=sys.stderr)
        return EXIT_NO_SOLITON
    if len(sols) == 2:
        a, b = sols["momentum"], sols["shooting"]
        sols["momentum"] = solver.attach_cross_method(a, b)
        sols["shooting"] = solver.attach_cross_method(b, a)
    ok = True
    for sol in sols.values():
        write_solution(args.out, sol)
        if sol.residuals.max_equation_residual() >= run.tolerances.residual:
            ok = False
        cm = sol.residuals.cross_method
        if cm is not None and cm >= 1e-6:
            ok = False
        print(f"{sol.method}: c={sol.c_slope:.12f} T={sol.grid.T:.9f} "
              f"max_residual={sol.residuals.max_equation_residual():.3e}"
              + (f" cross={cm:.3e}" if cm is not None else ""))
    return EXIT_OK if ok else EXIT_IDENTITY


def cmd_verify(args) -> int:
    tol = Tolerances()
    if args.config:
        try:
            tol = load_run_config(args.config).tolerances
        except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        sol = read_solution(args.solution, args.method)
        report = solver.identity_suite(sol)
    except (OSError, ValueError, KeyError, GeometryError) as exc:
        print(f"identity verification failed to run: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    bounds = {
        "delta_uu_plus_2u": tol.identity,
        "trace_R_plus_lap_u_minus_n": tol.identity,
        "hamilton_constancy": tol.identity,
        "weighted_mean_u": 1e-10,
        "div_integral": tol.residual,
        "kaehler": tol.residual,
    }
    payload = {"residuals": report, "bounds": bounds,
               "passed": {k: report[k] < bounds[k] for k in bounds}}
    _write_json(os.path.join(args.out, f"verify_{args.method}.json"), payload)
    for k in bounds:
        print(f"{k}: {report[k]:.3e} (< {bounds[k]:.0e}: "
              f"{'ok' if payload['passed'][k] else 'FAIL'})")
    return EXIT_OK if all(payload["passed"].values()) else EXIT_IDENTITY


def _family_from_config(sol, run: RunConfig):
    if not run.stability_profiles:
        return stability.default_family(sol)
    named = {p.name: p for p in stability.default_family(sol)}
    family = []
    for items in run.stability_profiles:
        spec = dict(items)
        kind = spec.get("kind")
        if kind == "constant":
            kap = spec.get("kappas", list(sol.config.kappa))
            family.append(stability.constant_profile(kap))
        elif kind in ("u_plus", "u_minus", "abs_u"):
            family.append(named[kind])
        else:
            raise ConfigError(f"unknown stability profile kind {kind!r}")
    return family


def cmd_stability(args) -> int:
    run = None
    prefactor = 2.0
    if args.config:
        try:
            run = load_run_config(args.config)
            prefactor = run.prefactor
        except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        sol = read_solution(args.solution, args.method)
        family = (stability.default_family(sol) if run is None
                  else _family_from_config(sol, run))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError, GeometryError) as exc:
        print(f"failed to load solution: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    reports = stability.sign_explorer(sol, family, prefactor=prefactor)
    lines = ["profile,value,sign,C_hg,v_h_norm"]
    for rep in reports:
        lines.append(f"{rep.profile},{rep.value:.17g},{rep.sign},"
                     f"{rep.C_hg:.17g},{rep.v_h_norm:.17g}")
        print(f"{rep.profile:12s} {rep.value:+.6e}  {rep.sign}")
    _write_atomic(os.path.join(args.out, f"stability_{args.method}.csv"),
                  "\n".join(lines) + "\n")
    # constant profiles must land in the zero band on a solved soliton
    bad = [r for r in reports
           if r.essential and r.sign != "zero"]
    if bad:
        print("vanishing theorem violated for constant profiles",
              file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_fuzz_algebra(args) -> int:
    report = algebra.fuzz_suite(seed=args.seed, trials=args.trials)
    _write_json(args.out, report)
    print(f"{report['trials']} trials, max residual "
          f"{report['max_residual']:.3e}")
    return EXIT_OK if report["max_residual"] < 1e-12 else EXIT_IDENTITY


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="krs",
        description="Cohomogeneity-one soliton laboratory: solve, verify "
                    "and probe stability of the circle-bundle ansatz.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pin-constants",
                       help="pin the ansatz curvature coefficients against "
                            "the finite-difference oracle")
    p.add_argument("--out", default="constants.json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--fd-step", type=float, default=0.02)
    p.add_argument("--fd-tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_pin_constants)

    p = sub.add_parser("solve", help="solve the soliton boundary-value "
                                     "problem for a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--constants", default=None,
                   help="pinned-constants JSON (default: re-pin)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="identity suite on a solved solution")
    p.add_argument("--solution", required=True, help="solve output directory")
    p.add_argument("--method", default="momentum",
                   choices=["momentum", "shooting"])
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stability", help="second-variation table on a "
                                         "solved solution")
    p.add_argument("--solution", required=True)
    p.add_argument("--method", default="momentum",
                   choices=["momentum", "shooting"])
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("fuzz-algebra", help="randomized pointwise-algebra "
                                            "suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--out", default="fuzz_algebra.json")
    p.set_defaults(func=cmd_fuzz_algebra)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
