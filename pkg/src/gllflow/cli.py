"""Command-line front door: solvers, verification suites, plot-ready data.

Exit codes: 0 = pass, 1 = an asserted property failed, 2 = solver failure
or violated preconditions.  Every run directory receives exactly one
run_manifest.json; data files are CSV (full-precision decimal) and reports
JSON.  GLLFLOW_OUT sets the default output root.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import figure_reference as figref
from . import realflow as rf
from .errors import GLLFlowError
from .evolution import (EvolveConfig, RadialField, evolve, field_from_profile,
                        great_circle_bump, make_grid, residual)
from .geometry import FlowParams, TangentVec, harmonic_map_jet
from .hasimoto import compute_q, strichartz_exponents, transport_frame
from .manifest import RunManifest
from .selfsim import apriori_identity_residual, solve_profile, tail_limit
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_ASSERT = 1
EXIT_SOLVER = 2


def _out_dir(args, default_leaf):
    root = Path(os.environ.get("GLLFLOW_OUT", "."))
    out = Path(args.out_dir) if args.out_dir else root / default_leaf
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_gnuplot(out_dir, csv_name, columns, title):
    lines = [f"set datafile separator ','", f"set key autotitle columnhead",
             f"set title '{title}'",
             "plot " + ", ".join(f"'{csv_name}' using 1:{c} with lines" for c in columns)]
    (Path(out_dir) / "plot.gp").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# selfsim
# ---------------------------------------------------------------------------

def cmd_selfsim(args):
    t0 = time.time()
    params = FlowParams(args.n, args.alpha, args.beta)
    out = _out_dir(args, "out-selfsim")
    trivial = (args.v1 == 0.0 and args.v2 == 0.0)
    if trivial:
        print("warning: trivial data (v = 0); profile is constant at the north pole")
    prof = solve_profile((args.v1, args.v2), params, args.r_max, rel_tol=args.tol)
    prof.to_csv(out / "profile.csv")
    results = {
        "nodes": int(prof.r.size),
        "max_A": float(prof.A.max()),
        "A_bound_4n": 4.0 * args.n,
        "identity_residual": None if trivial else apriori_identity_residual(
            prof, r_stop=min(20.0, args.r_max)),
    }
    a_ok = results["max_A"] <= results["A_bound_4n"] + 1e-6
    print(f"max A(r) = {results['max_A']:.6f} (bound 4n = {results['A_bound_4n']:g}): "
          f"{'ok' if a_ok else 'VIOLATED'}")
    if not trivial and prof.r_max >= 10.0:
        rep = tail_limit(prof)
        (out / "tail_report.json").write_text(rep.to_json() + "\n")
        results["tail"] = json.loads(rep.to_json())
    mani = RunManifest(
        command="selfsim",
        parameters={"n": args.n, "alpha": args.alpha, "beta": args.beta,
                    "v1": args.v1, "v2": args.v2},
        grid={"r_max": args.r_max, "nodes": int(prof.r.size)},
        tolerances={"rel_tol": args.tol},
        results=results, wall_time_s=time.time() - t0)
    mani.write(out)
    if args.gnuplot:
        _write_gnuplot(out, "profile.csv", (2, 3, 4), "self-similar profile")
    print(f"wrote {out}")
    return EXIT_OK if a_ok else EXIT_ASSERT


# ---------------------------------------------------------------------------
# realheat subcommands
# ---------------------------------------------------------------------------

def cmd_realheat_classify(args):
    rep = rf.classify_uniqueness(args.n)
    out = _out_dir(args, "out-realheat-classify")
    (out / "classifier_report.json").write_text(rep.to_json() + "\n")
    RunManifest("realheat classify", {"n": args.n},
                results=json.loads(rep.to_json())).write(out)
    print(f"n = {args.n}: {rep.verdict} (eta'(pi) = {rep.eta_prime_at_pi:g}, "
          f"min eta' = {rep.min_eta_prime:g}, threshold = {rep.threshold:g})")
    return EXIT_OK


def cmd_realheat_stationary(args):
    t0 = time.time()
    ns = [int(v) for v in args.n_list.split(",")]
    rs = [float(v) for v in args.r_list.split(",")]
    rows = []
    worst = 0.0
    for n in ns:
        res = rf.stationary_residual(args.alpha, rs, n)
        worst = max(worst, res)
        rows.append((n, res))
    out = _out_dir(args, "out-realheat-stationary")
    lines = ["n,max_residual"] + [f"{n},{res:.17g}" for n, res in rows]
    (out / "stationary_residuals.csv").write_text("\n".join(lines) + "\n")
    RunManifest("realheat stationary",
                {"alpha": args.alpha, "n_list": ns, "r_list": rs},
                results={"max_residual": worst},
                wall_time_s=time.time() - t0).write(out)
    print(f"max residual over n in {ns}: {worst:.3e} (dimension-independent family)")
    return EXIT_OK if worst <= 1e-10 else EXIT_ASSERT


def cmd_realheat_selfsim(args):
    t0 = time.time()
    slope = 2.0 * args.beta if args.convention == "label" else args.beta
    prof = rf.solve_selfsim_real(slope, args.n, args.r_max, rel_tol=args.tol)
    out = _out_dir(args, "out-realheat-selfsim")
    prof.to_csv(out / "profile.csv")
    mono = bool(np.all(np.diff(prof.g) >= -1e-8))
    below = bool(prof.g.max() < np.pi)
    RunManifest("realheat selfsim",
                {"beta": args.beta, "slope": slope, "n": args.n,
                 "convention": args.convention},
                grid={"r_max": args.r_max, "nodes": int(prof.r.size)},
                tolerances={"rel_tol": args.tol},
                results={"g_inf": prof.g_inf, "monotone": mono, "below_pi": below},
                wall_time_s=time.time() - t0).write(out)
    if args.gnuplot:
        _write_gnuplot(out, "profile.csv", (2,), "scalar self-similar profile")
    print(f"phi(r_max) = {prof.g_inf:.6f}; monotone: {mono}; below pi: {below}")
    return EXIT_OK if (mono and below) else EXIT_ASSERT


def cmd_realheat_witness(args):
    t0 = time.time()
    rep = rf.nonuniqueness_witness(args.epsilon, args.delta, quad_nodes=args.quad_nodes)
    out = _out_dir(args, "out-realheat-witness")
    (out / "witness_report.json").write_text(rep.to_json() + "\n")
    RunManifest("realheat witness",
                {"epsilon": args.epsilon, "delta": args.delta},
                tolerances={"quad_nodes": args.quad_nodes},
                results=json.loads(rep.to_json()),
                wall_time_s=time.time() - t0).write(out)
    sign = "negative" if rep.energy_gap < 0 else "positive"
    print(f"energy gap E(h) - E(equator) = {rep.energy_gap:.6e} ({sign}); "
          f"Hardy saturation ratio = {rep.hardy_ratio:.6f}")
    if rep.taylor_delta_literal is None:
        print("note: the stated quartic Taylor domination admits no delta; "
              "the halved-quadratic form gives delta <= "
              f"{rep.taylor_delta_halved}")
    return EXIT_OK


def _figure_worker(job):
    label, n, slope_factor, rel_tol = job
    prof = rf.solve_selfsim_real(slope_factor * label, n, 2.55, rel_tol=rel_tol)
    pts = figref.FIGURE_CURVES[label]
    g, _ = prof.eval(pts[:, 0] * figref.X_SCALE)
    return label, np.column_stack([pts[:, 0], pts[:, 1], g / figref.Y_SCALE])


def cmd_realheat_figure(args):
    t0 = time.time()
    fit = figref.fit_convention()
    labels = sorted(figref.FIGURE_CURVES)
    jobs = [(lbl, fit.n, fit.slope_factor, 1e-11) for lbl in labels]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            curves = dict(pool.map(_figure_worker, jobs))
    else:
        curves = dict(map(_figure_worker, jobs))
    out = _out_dir(args, "out-realheat-figure")
    errs = {}
    for lbl in labels:
        data = curves[lbl]
        name = f"curve_beta_{str(lbl).replace('.', 'p')}.csv"
        np.savetxt(out / name, data, delimiter=",",
                   header="x_plot,y_reference,y_simulated", comments="", fmt="%.17g")
        errs[str(lbl)] = float(np.max(np.abs(data[:, 1] - data[:, 2])))
    RunManifest("realheat figure",
                {"labels": labels, "fitted_n": fit.n,
                 "fitted_slope_factor": fit.slope_factor},
                tolerances={"rel_tol": 1e-11},
                results={"fit_max_err": fit.max_err, "per_curve_err": errs},
                wall_time_s=time.time() - t0).write(out)
    print(f"fitted convention: n = {fit.n}, origin slope = {fit.slope_factor:g} x label")
    for lbl in labels:
        print(f"  label {lbl:g}: max plot-unit error {errs[str(lbl)]:.2e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def _read_config_file(path):
    conf = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        conf[key.strip()] = value.strip()
    return conf


def _evolve_initial(args, params, r):
    if args.preset == "harmonic":
        u0, _, _ = harmonic_map_jet(TangentVec(args.v1, args.v2, 0.0), r)
        return RadialField(r, u0)
    if args.preset == "bump":
        return great_circle_bump(r, args.amplitude, args.center, args.width)
    if args.preset == "selfsim":
        prof = solve_profile((args.v1, args.v2), params, r[-1] / np.sqrt(args.t0) + 1.0)
        return field_from_profile(prof, r, args.t0)
    raise GLLFlowError(f"unknown preset {args.preset!r}")


def cmd_evolve(args):
    t0 = time.time()
    conf = _read_config_file(args.config) if args.config else {}
    # precedence: explicit flags > config file > defaults
    def pick(name, default, cast):
        flag = getattr(args, name)
        if flag is not None:
            return flag
        if name in conf:
            return cast(conf[name])
        return default

    n = pick("n", 2, int)
    alpha = pick("alpha", 1.0, float)
    beta = pick("beta", 0.0, float)
    r_max = pick("r_max", 50.0, float)
    nodes = pick("nodes", 201, int)
    T = pick("T", 0.1, float)
    params = FlowParams(n, alpha, beta)
    r = make_grid(r_max, nodes, grading=args.grading)
    field0 = _evolve_initial(args, params, r)
    config = EvolveConfig(dt_factor=args.dt_factor, outer_boundary=args.outer,
                          store_every=args.store_every)
    traj = evolve(field0, params, T, config)
    rep = residual(traj) if len(traj.frames) >= 3 else None
    out = _out_dir(args, "out-evolve")
    for i, f in enumerate(traj.frames):
        f.to_csv(out / f"frame_{i:04d}.csv")
    results = {"frames": len(traj.frames), "dt": traj.dt,
               "max_norm_drift": traj.max_norm_drift}
    if rep is not None:
        results["residual_l2_max"] = rep.max_l2
        results["residual_linf_max"] = rep.max_linf
    if args.preset == "harmonic":
        drift = max(float(np.max(np.linalg.norm(f.u - traj.frames[0].u, axis=1)))
                    for f in traj.frames)
        results["stationarity_drift"] = drift
        dr = float(np.min(np.diff(r)))
        print(f"harmonic stationarity drift: {drift:.3e} (dr^2 = {dr**2:.3e})")
    mani = RunManifest(
        "evolve",
        {"preset": args.preset, "n": n, "alpha": alpha, "beta": beta,
         "v1": args.v1, "v2": args.v2, "amplitude": args.amplitude,
         "center": args.center, "width": args.width, "t0": args.t0},
        grid={"r_max": r_max, "nodes": nodes, "grading": args.grading},
        tolerances={"dt_factor": args.dt_factor, "T": T,
                    "outer_boundary": args.outer, "store_every": args.store_every},
        results=results, wall_time_s=time.time() - t0)
    mani.write(out)
    print(f"wrote {len(traj.frames)} frames to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# hasimoto
# ---------------------------------------------------------------------------

def cmd_hasimoto_exponents(args):
    table = strichartz_exponents(args.p)
    out = _out_dir(args, "out-hasimoto")
    (out / "exponent_table.json").write_text(table.to_json() + "\n")
    RunManifest("hasimoto exponents", {"p": str(args.p)},
                results=json.loads(table.to_json())).write(out)
    print(f"p = {args.p}: r = {table.r} = {float(table.r)}; "
          f"s(1,1) = {table.s[(1, 1)]}; Holder identity exact: {table.holder_identity_holds()}")
    return EXIT_OK


def cmd_hasimoto_run(args):
    t0 = time.time()
    params = FlowParams(args.n, args.alpha, args.beta)
    r = np.linspace(0.0, args.r_max, args.nodes)
    u, u_r, _ = harmonic_map_jet(TangentVec(args.v1, args.v2, 0.0), r)
    frame = transport_frame(r, u, np.array([1.0, 0.0, 0.0]))
    qf = compute_q(r, u, frame, params, u_r=u_r)
    out = _out_dir(args, "out-hasimoto")
    qf.to_csv(out / "qfield.csv", u_r_norm=np.linalg.norm(u_r, axis=1))
    RunManifest("hasimoto run",
                {"n": args.n, "alpha": args.alpha, "beta": args.beta,
                 "v1": args.v1, "v2": args.v2},
                grid={"r_max": args.r_max, "nodes": args.nodes},
                results={"max_abs_q": float(np.max(np.abs(qf.q))),
                         "max_alpha_g": float(np.max(np.abs(qf.alpha_g)))},
                wall_time_s=time.time() - t0).write(out)
    print(f"wrote frame coordinates for the stationary profile to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    t0 = time.time()
    rows = run_suites(names)
    ok = True
    for c in rows:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.suite}.{c.name}: {c.detail}")
        ok = ok and c.passed
    print(f"{sum(c.passed for c in rows)}/{len(rows)} checks passed "
          f"({time.time() - t0:.1f}s)")
    return EXIT_OK if ok else EXIT_ASSERT


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="gllflow", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selfsim", help="solve a self-similar profile")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--v1", type=float, default=1.0)
    p.add_argument("--v2", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--gnuplot", action="store_true")
    p.set_defaults(fn=cmd_selfsim)

    rh = sub.add_parser("realheat", help="scalar great-circle flow tools")
    rsub = rh.add_subparsers(dest="subcommand", required=True)

    p = rsub.add_parser("classify")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_realheat_classify)

    p = rsub.add_parser("stationary")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n-list", default="2,3,4,5,6,7,8")
    p.add_argument("--r-list", default="0.1,1,10")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_realheat_stationary)

    p = rsub.add_parser("selfsim")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--convention", choices=("label", "slope"), default="label",
                   help="'label': origin slope 2*beta (fitted); 'slope': beta itself")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--gnuplot", action="store_true")
    p.set_defaults(fn=cmd_realheat_selfsim)

    p = rsub.add_parser("witness")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--quad-nodes", type=int, default=4000)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_realheat_witness)

    p = rsub.add_parser("figure")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_realheat_figure)

    p = sub.add_parser("evolve", help="method-of-lines evolution")
    p.add_argument("--preset", choices=("harmonic", "bump", "selfsim"), default="bump")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--r-max", dest="r_max", type=float, default=None)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--dt-factor", type=float, default=0.1)
    p.add_argument("--outer", choices=("clamp", "neumann"), default="clamp")
    p.add_argument("--store-every", type=int, default=10)
    p.add_argument("--v1", type=float, default=1.0)
    p.add_argument("--v2", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--center", type=float, default=3.0)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--config", default=None, help="key=value file; flags take precedence")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_evolve)

    hs = sub.add_parser("hasimoto", help="frame and gauge tools")
    hsub = hs.add_subparsers(dest="subcommand", required=True)

    p = hsub.add_parser("exponents")
    p.add_argument("--p", default="2")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_hasimoto_exponents)

    p = hsub.add_parser("run")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--v1", type=float, default=1.0)
    p.add_argument("--v2", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--nodes", type=int, default=2001)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_hasimoto_run)

    p = sub.add_parser("verify", help="run invariant suites; exit 0 iff all pass")
    p.add_argument("suite", nargs="?", default="all",
                   choices=["all"] + sorted(SUITES))
    p.set_defaults(fn=cmd_verify)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GLLFlowError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        extra = getattr(exc, "diagnostics", None)
        if extra:
            diag["diagnostics"] = {k: (v if isinstance(v, (int, float, str)) else str(v))
                                   for k, v in extra.items()}
        print(json.dumps(diag, sort_keys=True), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
