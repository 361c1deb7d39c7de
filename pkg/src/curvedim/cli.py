"""Scenario runner: load a YAML scenario, execute its checks, emit a report
and CSV curves.

Exit codes: 0 all asserted checks pass, 1 check failure, 2 scenario parse
error, 3 numerical abort (conjugate point, chart exit, negative density).
CSV files carry the fixed column set t,value,bound,margin with LF line
endings; identical scenario and seed give byte-identical output.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .cdcheck import (
    check_cd_entropic,
    check_cd_finite,
    check_cd_inf,
    check_jacobi_ode,
    check_pointwise,
    counterexample_scan,
    make_instance_1d,
)
from .comparison import bishop_gromov_check, bonnet_myers_check, packing_ratios, volume_profile
from .errors import CurvedimError
from .fields import lower_bound_scan
from .geometry import geodesic_shoot
from .presets import bump_density, make_field, make_space, random_bump_pair
from .semigroup import (
    build_generator,
    contraction_check,
    density_state,
    evi_check,
    gradient_estimate_check,
    kuwada_speed_check,
)
from .transport import density_measure, grid_measure_1d
from .warped import sphere_example

EXIT_OK = 0
EXIT_CHECK_FAIL = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3

# check name -> anchor string describing the inequality it certifies
CHECKS = {
    "cd-finite": "distortion-weighted entropy convexity, tau coefficients",
    "cd-star": "reduced condition, sigma coefficients",
    "cd-inf": "K-convex drift-adjusted entropy along W2 geodesics",
    "cd-entropic": "exponential-entropy sigma-concavity",
    "pointwise": "per-geodesic density inequality",
    "jacobi-ode": "Jacobi determinant concavity along shot geodesics",
    "counterexample-scan": "localized quadratic-potential violation search",
    "bishop-gromov": "weighted ball/sphere volume ratio comparison",
    "bonnet-myers": "diameter bound pi*sqrt((N-1)/K) under certified curvature",
    "packing": "disjoint-ball packing mass bounds",
    "sphere-example": "warped suspension certification over the round sphere",
    "contraction": "exp(-2Kt) Wasserstein contraction envelope",
    "evi": "evolution variational inequality of the dual flow",
    "kuwada-speed": "metric speed vs Fisher-type bound",
    "gradient-estimate": "pointwise exp(-2Kt) gradient bound",
    "scan": "drift Ricci tensor infimum scan",
}


class _Ctx:
    def __init__(self, scenario: dict, tol_scale: float, seed: int):
        self.space = make_space(scenario.get("space", {}))
        self.field = make_field(scenario.get("field", {}), self.space.dim)
        self.seed = int(scenario.get("seed", seed))
        self.tol_scale = tol_scale

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng(self.seed + 1000003 * salt)


def _instance_from(ctx: _Ctx, params: dict, salt: int):
    m = int(params.get("grid", 256))
    n_t = int(params.get("t_points", 17))
    ref = grid_measure_1d(ctx.space, m)
    rng = ctx.rng(salt)
    bumps = params.get("bumps")
    if bumps:
        f0 = bump_density(float(bumps[0]["center"]), float(bumps[0]["radius"]), ctx.space)
        f1 = bump_density(float(bumps[1]["center"]), float(bumps[1]["radius"]), ctx.space)
    else:
        f0, f1 = random_bump_pair(ctx.space, rng)
    mu0 = density_measure(ref, f0)
    mu1 = density_measure(ref, f1)
    return make_instance_1d(ctx.space, ctx.field, ref, mu0, mu1, n_t)


def _curve_rows(verdict) -> list:
    curve = verdict.extras.get("curve")
    rows = []
    if curve:
        for entry in curve:
            t, val, bound = entry[0], entry[1], entry[2]
            rows.append((t, val, bound, bound - val))
    elif "lhs" in verdict.extras and "rhs" in verdict.extras:
        lhs = verdict.extras["lhs"]
        rhs = verdict.extras["rhs"]
        ts = np.linspace(0.0, 1.0, len(lhs))
        for t, a, b in zip(ts, lhs, rhs):
            rows.append((float(t), float(a), float(b), float(b - a)))
    return rows


def _run_check(ctx: _Ctx, idx: int, check: dict):
    name = check.get("name")
    if name not in CHECKS:
        raise ValueError(f"unknown check {name!r}")
    p = {k: v for k, v in check.items() if k != "name"}
    K = float(p.get("K", 0.0))
    N = float(p.get("N", math.inf)) if p.get("N") not in (None, "inf") else math.inf
    ts = ctx.tol_scale
    if name in ("cd-finite", "cd-star", "cd-inf", "cd-entropic", "pointwise"):
        inst = _instance_from(ctx, p, idx)
        if name == "cd-inf":
            v = check_cd_inf(inst, K, ts)
        elif name == "cd-finite":
            v = check_cd_finite(inst, K, N, reduced=False, tol_scale=ts)
        elif name == "cd-star":
            v = check_cd_finite(inst, K, N, reduced=True, tol_scale=ts)
        elif name == "cd-entropic":
            v = check_cd_entropic(inst, K, N, ts)
        else:
            v = check_pointwise(inst, K, N, bool(p.get("use_tau", False)), ts)
        return v
    if name == "jacobi-ode":
        rng = ctx.rng(idx)
        n_geos = int(p.get("n_geodesics", 16))
        n_ics = int(p.get("n_initial", 4))
        max_len = float(p.get("max_length", 1.3))
        worst = None
        for _ in range(n_geos):
            x, vel = _random_geodesic_data(ctx, rng, max_len)
            geo = geodesic_shoot(ctx.space, x, vel, 512)
            for _ in range(n_ics):
                S = rng.normal(size=(ctx.space.dim, ctx.space.dim))
                S = 0.1 * (S + S.T)
                v = check_jacobi_ode(ctx.space, geo, ctx.field, K, N,
                                     (np.eye(ctx.space.dim), S), ts)
                if worst is None or v.margin < worst.margin:
                    worst = v
        return worst
    if name == "counterexample-scan":
        v = counterexample_scan(ctx.space, ctx.field, K, N,
                                n_trials=int(p.get("trials", 200)),
                                seed=ctx.seed + idx, tol_scale=ts)
        if p.get("expect") == "witness":
            found = v.extras.get("found_witness", False)
            v.notes.append("scenario expects a violation witness: "
                           + ("found" if found else "NOT FOUND"))
            v.margin = abs(v.margin) if found else -1.0
        return v
    if name == "bishop-gromov":
        r, R = float(p.get("r", 0.5)), float(p.get("R", 1.0))
        x0 = p.get("x0")
        if x0 is None:
            x0 = _default_center(ctx)
        radii = sorted({r, R})
        prof = volume_profile(ctx.space, ctx.field, np.asarray(x0, dtype=float), radii,
                              int(p.get("quadrature_n", 512)))
        v = bishop_gromov_check(prof, K, N, r, R, tol=float(p.get("tol", 1e-5)) * ts)
        v.extras["curve"] = [(float(rr), float(vv), float(vv), 0.0)
                             for rr, vv in zip(prof.radii, prof.v)]
        return v
    if name == "bonnet-myers":
        return bonnet_myers_check(ctx.space, ctx.field, K, N)
    if name == "packing":
        eps = [float(e) for e in p.get("eps", [0.3, 0.6, 1.0])]
        rep = packing_ratios(ctx.space, ctx.field, eps)
        from .cdcheck import CdVerdict

        v = CdVerdict("Packing", 0.0, math.inf, 0.0, 1e-9,
                      notes=[f"M>={rep.M_est:.6g} m={rep.m_est:.6g} ratio={rep.ratio:.6g}"])
        v.extras["report"] = rep
        return v
    if name == "sphere-example":
        bundle = sphere_example(float(p.get("N", 5.0)), float(p.get("alpha", 0.0)),
                                sample_n=int(p.get("samples", 500)), seed=ctx.seed + idx)
        v = bundle.ricci_verdict
        v.notes.append(f"bonnet-myers margin {bundle.bonnet_verdict.margin:.3e}")
        if not bundle.bonnet_verdict.passed:
            v.margin = min(v.margin, bundle.bonnet_verdict.margin)
        return v
    if name == "scan":
        rep = lower_bound_scan(ctx.space, ctx.field, N,
                               int(p.get("points", 64)), int(p.get("dirs", 8)))
        from .cdcheck import CdVerdict

        v = CdVerdict("Scan", K, N, rep.inf_estimate - K, 1e-9,
                      notes=[f"inf estimate {rep.inf_estimate:.9g}"])
        v.extras["scan_inf"] = rep.inf_estimate
        return v
    # semigroup family
    m = int(p.get("m", 256))
    gen = build_generator(ctx.space, ctx.field, m)
    times = [float(t) for t in p.get("times", [0.1, 0.2, 0.5, 1.0])]
    rng = ctx.rng(idx)
    bumps = p.get("bumps")
    if bumps:
        f0 = bump_density(float(bumps[0]["center"]), float(bumps[0]["radius"]), ctx.space)
        f1 = bump_density(float(bumps[1]["center"]), float(bumps[1]["radius"]), ctx.space)
    else:
        f0, f1 = random_bump_pair(ctx.space, rng, 0.5, 1.0)
    mu = density_state(gen, f0)
    nu = density_state(gen, f1)
    if name == "contraction":
        return contraction_check(gen, mu, nu, K, times,
                                 tol_rel=float(p.get("tol_rel", 1e-2)) * ts)
    if name == "evi":
        return evi_check(gen, mu, nu, K, times)
    if name == "kuwada-speed":
        return kuwada_speed_check(gen, mu, times)
    if name == "gradient-estimate":
        x = gen.points[:, 0]
        f = np.sin(x) + 0.3 * x if ctx.space.kind.value == "interval" else np.sin(x)
        return gradient_estimate_check(gen, f, K, times)
    raise ValueError(f"unhandled check {name!r}")


def _random_geodesic_data(ctx: _Ctx, rng: np.random.Generator,
                          max_len: float = 1.3):
    if ctx.space.dim == 1:
        lo, hi = ctx.space.bounds[0]
        x = np.array([rng.uniform(lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo))])
        vel = np.array([rng.uniform(-0.2, 0.2) * (hi - lo)])
        return x, vel
    x = np.array([rng.uniform(0.6, math.pi - 0.6), rng.uniform(0, 2 * math.pi)])
    ang = rng.uniform(0, math.pi)
    th = rng.uniform(0.3, max_len)
    g = ctx.space.metric(x)
    E = np.linalg.inv(np.linalg.cholesky(g).T)
    return x, th * (E @ np.array([math.cos(ang), math.sin(ang)]))


def _default_center(ctx: _Ctx):
    if ctx.space.dim == 1:
        lo, hi = ctx.space.bounds[0]
        return [0.5 * (lo + hi)] if not ctx.space.periodic[0] else [0.0]
    return [math.pi / 2, 0.0]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def run_scenario(path: str, tol_scale: float = 1.0, threads: int = 1,
                 csv_dir: str | None = None, seed: int = 0,
                 out=None) -> int:
    if out is None:
        out = sys.stdout
    try:
        with open(path, "r", encoding="utf-8") as fh:
            scenario = yaml.safe_load(fh)
        if not isinstance(scenario, dict) or "checks" not in scenario:
            raise ValueError("scenario must be a mapping with a 'checks' list")
        checks = scenario["checks"]
        if not isinstance(checks, list) or not checks:
            raise ValueError("'checks' must be a nonempty list")
        ctx = _Ctx(scenario, tol_scale, seed)
    except (OSError, yaml.YAMLError, ValueError, KeyError, TypeError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE

    csv_target = csv_dir or scenario.get("csv_dir")
    results = [None] * len(checks)

    def work(i):
        return _run_check(ctx, i, checks[i])

    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futs = {pool.submit(work, i): i for i in range(len(checks))}
                for fut, i in futs.items():
                    results[i] = fut.result()
        else:
            for i in range(len(checks)):
                results[i] = work(i)
    except CurvedimError as e:
        print(f"numerical abort: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE

    order = sorted(range(len(checks)), key=lambda i: (checks[i]["name"], i))
    all_pass = True
    print(f"curvedim {__version__} scenario report: {Path(path).name}", file=out)
    print(f"seed={ctx.seed} tolerance-scale={tol_scale:g}", file=out)
    for i in order:
        name = checks[i]["name"]
        v = results[i]
        anchor = CHECKS[name]
        state = "pass" if v.passed else "FAIL"
        print(f"  [{state}] {name} ({anchor}): margin={v.margin:.6e} tol={v.tol:.2e}",
              file=out)
        for note in v.notes:
            print(f"         note: {note}", file=out)
        if not v.passed:
            all_pass = False
            for w in v.witnesses[:3]:
                print(f"         witness: {w}", file=out)
        if csv_target:
            rows = _curve_rows(v)
            if rows:
                d = Path(csv_target)
                d.mkdir(parents=True, exist_ok=True)
                fp = d / f"{i:02d}-{name}.csv"
                with open(fp, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write("t,value,bound,margin\n")
                    for r in rows:
                        fh.write(",".join(_fmt(x) for x in r) + "\n")
    return EXIT_OK if all_pass else EXIT_CHECK_FAIL


def list_checks(out=None) -> int:
    if out is None:
        out = sys.stdout
    for name in sorted(CHECKS):
        print(f"{name}: {CHECKS[name]}", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance-scale", type=float, default=1.0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--csv-dir", type=str, default=None)
    common.add_argument("--seed", type=int, default=0)
    ap = argparse.ArgumentParser(prog="curvedim",
                                 description="numerical curvature-dimension checks")
    sub = ap.add_subparsers(dest="cmd", required=True)
    pv = sub.add_parser("verify", parents=[common], help="run a scenario file")
    pv.add_argument("scenario", type=str)
    sub.add_parser("list-checks", parents=[common], help="list available checks")
    args = ap.parse_args(argv)
    if args.cmd == "list-checks":
        return list_checks()
    return run_scenario(args.scenario, args.tolerance_scale, args.threads,
                        args.csv_dir, args.seed)


if __name__ == "__main__":
    sys.exit(main())
