"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The heavy Monte Carlo
criteria (4, 7, 10) use two worker processes and finish well inside their
stated budgets on a 2-core box.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

import roughtail as rt
from roughtail.experiments import (ExperimentConfig, jacobian_tail_experiment,
                                   n_tail_experiment, riemann_zeta)
from roughtail.gaussian import bm_model, fbm_model, plan_parameters, sample_path
from roughtail.partition import greedy_partition
from roughtail.rough_path import PiecewiseLinearPath, lift
from roughtail.variation import ControlQuery

SEED = 20260809


def report(num, name, passed, detail=""):
    line = f"ACCEPTANCE {num:02d} [{'PASS' if passed else 'FAIL'}] {name}"
    if detail:
        line += f" -- {detail}"
    print(line, flush=True)
    return passed


# -------------------------------------------------------------------- 1 ----

def test_criterion_01_algebra_suite():
    t0 = time.time()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    cases = 0
    while cases < 10_000:
        d = int(rng.integers(1, 5))
        level = int(rng.integers(1, 4))
        segs = rng.standard_normal((3, 4, d))
        elems = []
        for s in segs:
            path = PiecewiseLinearPath(np.linspace(0, 1, 5),
                                       np.vstack([np.zeros(d), np.cumsum(s, 0)]))
            elems.append(lift(path, level).increment(0, 4))
        a, b, c = elems
        # associativity (Chen composition is a group product)
        lhs = rt.mul(rt.mul(a, b), c)
        rhs = rt.mul(a, rt.mul(b, c))
        worst = max(worst, *(np.abs(lhs.levels[k] - rhs.levels[k]).max()
                             for k in range(level)))
        # inverse roundtrip and identity neutrality
        e = rt.mul(rt.inverse(a), a)
        worst = max(worst, *(np.abs(e.levels[k]).max() for k in range(level)))
        ident = rt.identity_element(d, level)
        le = rt.mul(ident, b)
        worst = max(worst, *(np.abs(le.levels[k] - b.levels[k]).max()
                             for k in range(level)))
        # Chen split of a lifted path increment
        split = rt.mul(a, b)
        two = PiecewiseLinearPath(
            np.linspace(0, 1, 9),
            np.vstack([np.zeros(d), np.cumsum(np.vstack([segs[0], segs[1]]), 0)]))
        direct = lift(two, level).increment(0, 8)
        worst = max(worst, *(np.abs(split.levels[k] - direct.levels[k]).max()
                             for k in range(level)))
        # dilation homogeneity of the homogeneous norm, degree 1
        lam = float(rng.uniform(0.2, 4.0))
        n0 = rt.homogeneous_norm(a)
        if n0 > 1e-8:
            worst = max(worst, abs(rt.homogeneous_norm(rt.dilate(a, lam))
                                   - lam * n0) / max(lam * n0, 1e-12))
        cases += 5
    elapsed = time.time() - t0
    ok = worst < 1e-11 and elapsed < 10.0
    assert report(1, "algebra: Chen, group axioms, dilation (10^4 cases)", ok,
                  f"max err {worst:.2e}, {elapsed:.1f}s"), \
        f"max error {worst:.3e} (limit 1e-11), runtime {elapsed:.1f}s (limit 10s)"


# -------------------------------------------------------------------- 2 ----

def test_criterion_02_lift_translate_consistency():
    t0 = time.time()
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 4))
        times = np.linspace(0, 1, 65)
        x = PiecewiseLinearPath(times, np.cumsum(rng.standard_normal((65, d)), 0))
        h = PiecewiseLinearPath(times, np.cumsum(rng.standard_normal((65, d)), 0))
        lhs = rt.translate(lift(x, 3), h)
        rhs = lift(x + h, 3)
        worst = max(worst,
                    np.abs(lhs.level1 - rhs.level1).max(),
                    np.abs(lhs.level2 - rhs.level2).max(),
                    np.abs(lhs.level3 - rhs.level3).max())
    elapsed = time.time() - t0
    ok = worst < 1e-9 and elapsed < 30.0
    assert report(2, "translate(lift(x), h) == lift(x+h), levels 1-3", ok,
                  f"max entry err {worst:.2e}, {elapsed:.1f}s"), \
        f"max entry error {worst:.3e} (limit 1e-9), runtime {elapsed:.1f}s"


# -------------------------------------------------------------------- 3 ----

def _all_dissections(n):
    """Flattened cell arrays of every sub-dissection of grid 0..n."""
    starts, a_all, b_all = [], [], []
    pos = 0
    for r in range(n):
        for combo in itertools.combinations(range(1, n), r):
            pts = (0, *combo, n)
            starts.append(pos)
            for u, v in zip(pts[:-1], pts[1:]):
                a_all.append(u)
                b_all.append(v)
                pos += 1
    return (np.array(starts, dtype=np.int64), np.array(a_all, dtype=np.int64),
            np.array(b_all, dtype=np.int64))


def test_criterion_03_dp_exactness_vs_enumeration():
    t0 = time.time()
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for n in range(2, 13):
        starts, a_arr, b_arr = _all_dissections(n)
        for _ in range(500):
            d = int(rng.integers(1, 3))
            p = float(rng.uniform(1.0, 3.9))
            level = max(int(math.floor(p)), 1)
            # unit-scale paths keep the weight sums O(1), so the absolute
            # 1e-12 agreement bound is meaningfully beyond roundoff
            path = PiecewiseLinearPath(
                np.linspace(0, 1, n + 1),
                np.cumsum(rng.standard_normal((n + 1, d)), axis=0) / math.sqrt(n))
            x = lift(path, level)
            got = rt.p_variation(x, p, 0, n)
            # independent enumeration: increments assembled in numpy from the
            # signature rows, dissection sums via reduceat over every
            # sub-dissection of the grid
            from roughtail.tensor_algebra import increment_levels
            rows = [x._levels_at_index(i) for i in range(n + 1)]
            want = 0.0
            for k in range(1, level + 1):
                w = np.zeros((n + 1, n + 1))
                for i in range(n):
                    for j in range(i + 1, n + 1):
                        inc = increment_levels(rows[i], rows[j], level)
                        w[i, j] = np.linalg.norm(inc[k - 1].ravel()) ** (p / k)
                sums = np.add.reduceat(w[a_arr, b_arr], starts)
                want += float(sums.max())
            worst = max(worst, abs(got - want))
    elapsed = time.time() - t0
    ok = worst < 1e-12
    assert report(3, "p-variation DP == exhaustive enumeration (n <= 12)", ok,
                  f"max err {worst:.2e}, {elapsed:.0f}s"), \
        f"max error {worst:.3e} (limit 1e-12)"


# ---------------------------------------------------------------- 4 & 5 ----

def _mn_sweep_worker(args):
    hurst, p, level, index, alphas = args
    model = fbm_model(hurst, dim=1, n=256) if hurst != 0.5 else bm_model(dim=1, n=256)
    x = lift(sample_path(model, SEED + 3, index), level)
    ctrl = ControlQuery(x, p)
    out = []
    for alpha in alphas:
        rep = rt.check_m_n_inequality(ctrl, alpha)
        gp = greedy_partition(ctrl, alpha)
        interior_err = 0.0
        if gp.count > 0:
            interior_err = float(np.abs(gp.interval_controls[:gp.count] - alpha).max()
                                 / alpha)
        out.append((rep.passed, rep.degenerate, interior_err,
                    rep.local_variation, rep.count, alpha))
    return out


_MN_RESULTS = {}


def _run_mn_sweep():
    if "data" in _MN_RESULTS:
        return _MN_RESULTS["data"]
    from roughtail.experiments import parallel_map, warm_kernels
    warm_kernels()
    t0 = time.time()
    cases = []
    for hurst in (0.5, 0.4, 0.35):
        plan = plan_parameters(hurst=hurst)
        model = fbm_model(hurst, dim=1, n=256) if hurst != 0.5 else bm_model(dim=1, n=256)
        # fixed alphas from a pilot: the 10th/25th/50th percentiles of the
        # total control over 64 pilot paths (a separate stream)
        pilot_tot = []
        for i in range(64):
            x = lift(sample_path(model, SEED + 3, i, tag=1), plan.level)
            pilot_tot.append(ControlQuery(x, plan.p).total())
        alphas = tuple(float(v) for v in np.percentile(pilot_tot, [10, 25, 50]))
        cases.extend((hurst, plan.p, plan.level, i, alphas) for i in range(1000))
        _MN_RESULTS.setdefault("alphas", {})[hurst] = alphas
    results = parallel_map(_mn_sweep_worker, cases, threads=2)
    _MN_RESULTS["data"] = (results, time.time() - t0)
    return _MN_RESULTS["data"]


def test_criterion_04_mn_inequality_sweep():
    results, elapsed = _run_mn_sweep()
    flat = [row for path_rows in results for row in path_rows]
    violations = sum(0 if passed else 1 for passed, *_ in flat)
    ok = violations == 0 and elapsed < 600.0
    assert report(4, "M <= (2N+1) alpha on 3000 fBm lifts x 3 alphas", ok,
                  f"{len(flat)} checks, {violations} violations, {elapsed:.0f}s"), \
        f"{violations} violations (limit 0), runtime {elapsed:.0f}s (limit 600s)"


def test_criterion_05_greedy_interval_exactness():
    results, _ = _run_mn_sweep()
    worst = max(row[2] for path_rows in results for row in path_rows)
    ok = worst <= 1e-6
    assert report(5, "greedy interior intervals |omega - alpha| <= 1e-6 alpha",
                  ok, f"worst rel err {worst:.2e}"), \
        f"worst interior relative error {worst:.3e} (limit 1e-6)"


# -------------------------------------------------------------------- 6 ----

def test_criterion_06_rde_correctness():
    # scalar linear RDE at 2^12 sub-steps
    t = np.linspace(0, 1, 65)
    x = PiecewiseLinearPath(t, (np.sin(2 * np.pi * t) + 0.5 * t)[:, None])
    fields = rt.linear_fields(np.array([[[1.0]]]))
    traj = rt.solve_rde(lift(x, 2), fields, np.array([1.0]), substeps=64)
    exact = math.exp(x.values[-1, 0] - x.values[0, 0])
    rel = abs(traj.final[0] - exact) / exact

    # Euler one-step order: slope within 0.2 of floor(p) + 1
    slopes = []
    for level in (2, 3):
        hs = 2.0 ** -np.arange(4, 11)
        errs = [abs(rt.euler_increment(np.array([1.0]),
                                       rt.segment_exp(np.array([h]), level),
                                       fields)[0] - (math.exp(h) - 1.0))
                for h in hs]
        slopes.append(float(np.polyfit(np.log(hs), np.log(errs), 1)[0]))
    slope_ok = abs(slopes[0] - 3.0) < 0.2 and abs(slopes[1] - 4.0) < 0.2

    # Jacobian vs central finite differences, polynomial fields e = d = 2
    rng = np.random.default_rng(SEED + 6)
    poly = rt.polynomial_fields(c0=0.2 * rng.standard_normal((2, 2)),
                                c1=0.4 * rng.standard_normal((2, 2, 2)),
                                c2=0.1 * rng.standard_normal((2, 2, 2, 2)))
    t2 = np.linspace(0, 1, 33)
    drv = PiecewiseLinearPath(t2, 0.5 * np.stack([np.sin(2 * np.pi * t2),
                                                  np.cos(np.pi * t2) - 1], axis=1))
    xg = lift(drv, 2)
    y0 = np.array([0.3, -0.1])
    jac = rt.jacobian_flow(xg, poly, y0, substeps=32).jacobians[-1]
    eps = 1e-5
    cols = [(rt.solve_rde(xg, poly, y0 + eps * a, substeps=32).final
             - rt.solve_rde(xg, poly, y0 - eps * a, substeps=32).final) / (2 * eps)
            for a in np.eye(2)]
    fd = np.stack(cols, axis=1)
    fd_rel = np.abs(fd - jac).max() / np.abs(fd).max()

    ok = rel < 1e-6 and slope_ok and fd_rel < 1e-3
    assert report(6, "RDE: scalar exp, Euler order, Jacobian vs FD", ok,
                  f"rel {rel:.1e}, slopes {slopes[0]:.2f}/{slopes[1]:.2f}, "
                  f"fd {fd_rel:.1e}"), \
        f"scalar rel {rel:.2e} (<1e-6), slopes {slopes} (3, 4 +-0.2), fd {fd_rel:.2e} (<1e-3)"


# -------------------------------------------------------------------- 7 ----

def test_criterion_07_brownian_tail_exponent():
    """With 2e4 paths, n_grid=512, p=2.5 and a pilot-calibrated threshold,
    the fitted tail shape of the greedy count must land in [1.6, 2.4].

    The count-scale pilot calibration used here maximises the number of
    usable regression points; see the decisions ledger for the measured
    calibration frontier of this criterion.
    """
    cfg = ExperimentConfig(kind="n-tail", model_kind="bm", dim=1, grid_n=512,
                           path_count=20_000, pilot_count=500, seed=SEED,
                           threads=2, alpha_mode="count-scale",
                           count_scale_divisor=6.0, p=2.5)
    t0 = time.time()
    rep = n_tail_experiment(cfg)
    elapsed = time.time() - t0
    fit = rep.shape_fit
    usable = [(int(r.threshold), r.exceedances) for r in rep.rows
              if 30 <= r.exceedances < rep.sample_count]
    detail = (f"r_hat={None if fit is None else round(fit['r_hat'], 3)}, "
              f"usable points {len(usable)}, predicted 2/rho = "
              f"{rep.predicted_shape_rho}, {elapsed:.0f}s")
    ok = fit is not None and 1.6 <= fit["r_hat"] <= 2.4 and elapsed < 1200.0
    report(7, "Brownian greedy-count tail shape in [1.6, 2.4]", ok, detail)
    assert fit is not None, "no reported shape fit (needs >= 4 usable points)"
    assert 1.6 <= fit["r_hat"] <= 2.4, (
        f"fitted shape {fit['r_hat']:.3f} outside [1.6, 2.4]; survival rows "
        f"{[(int(r.threshold), r.exceedances) for r in rep.rows]}; the "
        f"integer greedy count concentrates too sharply at this sample size "
        f"for the log(-log) regression to reach the asymptotic exponent 2 "
        f"(see decisions ledger)")


# -------------------------------------------------------------------- 8 ----

def test_criterion_08_fbm_bound_domination():
    cfg = ExperimentConfig(kind="n-tail", model_kind="fbm", hurst=0.4, dim=1,
                           grid_n=256, path_count=4000, pilot_count=500,
                           seed=SEED, threads=2,
                           alpha_mode="norm-percentile", alpha_percentile=25.0)
    try:
        rep = n_tail_experiment(cfg)  # raises BoundViolationError on failure
        violations = 0
    except rt.BoundViolationError as exc:
        rep = exc.report
        violations = len(exc.violations)
    have_curve = (rep.c1 is not None and rep.v_rho is not None
                  and rep.c_pq is not None
                  and all(r.bound is not None for r in rep.rows))
    ok = violations == 0 and have_curve
    assert report(8, "fBm H=0.4 survival upper-CI <= theoretical curve", ok,
                  f"mu(A)={rep.mu_a_alpha:.3f}, C1={rep.c1 and round(rep.c1, 3)}, "
                  f"c_pq={rep.c_pq and round(rep.c_pq, 2)}, "
                  f"V_rho={rep.v_rho and round(rep.v_rho, 4)}, "
                  f"violations={violations}"), \
        f"{violations} domination violations; curve defined: {have_curve}"


# -------------------------------------------------------------------- 9 ----

def test_criterion_09_constants():
    zeta2_err = abs(riemann_zeta(2.0) - math.pi ** 2 / 6.0)
    # summation oracle for c_{2,1} = 16 zeta(1.5): partial sum + integral tail
    k = np.arange(1, 2_000_001, dtype=np.float64)
    partial = float(np.sum(k ** -1.5))
    lo = partial + 2.0 / math.sqrt(2_000_001)
    hi = partial + 2.0 / math.sqrt(2_000_000)
    c21 = rt.constant_c_pq(2.0, 1.0)
    ok = zeta2_err < 1e-12 and 16 * lo - 1e-8 <= c21 <= 16 * hi + 1e-8 \
        and abs(c21 - 41.798005578967846) < 1e-8
    assert report(9, "zeta(2) = pi^2/6 and c_{2,1} vs summation oracle", ok,
                  f"zeta2 err {zeta2_err:.1e}, c21 {c21:.10f}"), \
        f"zeta(2) err {zeta2_err:.2e}, c21 {c21!r} vs bracket [{16*lo}, {16*hi}]"


# ------------------------------------------------------------------- 10 ----

def test_criterion_10_jacobian_moment_stability():
    field_spec = {"family": "linear",
                  "coefficients": {"A": [[[0.35, -0.2], [0.15, 0.25]]]}}
    worst = 0.0
    details = []
    for kind, hurst in (("bm", 0.5), ("fbm", 0.4)):
        vals = {}
        for count in (4000, 8000):
            cfg = ExperimentConfig(kind="jacobian-tail", model_kind=kind,
                                   hurst=hurst, dim=1, grid_n=256,
                                   path_count=count, pilot_count=50,
                                   seed=SEED + 10, threads=1,
                                   fields_spec=field_spec, substeps=1)
            rep = jacobian_tail_experiment(cfg)
            vals[count] = {m["q"]: m["value"] for m in rep.moments}
        for q in (1, 2, 4):
            drift = abs(vals[8000][q] - vals[4000][q]) / vals[4000][q]
            worst = max(worst, drift)
            details.append(f"{kind} q={q}: {drift*100:.2f}%")
    ok = worst < 0.10
    assert report(10, "jacobian moments drift < 10% under sample doubling", ok,
                  "; ".join(details)), f"worst drift {worst*100:.1f}% (limit 10%)"


# ------------------------------------------------------------------- 11 ----

def test_criterion_11_pipeline_determinism(tmp_path):
    from roughtail.cli import main as cli_main
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({
        "kind": "n-tail", "model_kind": "bm", "dim": 1, "grid_n": 128,
        "path_count": 400, "pilot_count": 100, "seed": SEED,
        "alpha_mode": "norm-percentile"}))
    outs = {}
    for threads in (1, 8):
        out = tmp_path / f"t{threads}"
        rc = cli_main(["tail", "--config", str(cfgfile), "--threads",
                       str(threads), "--out", str(out)])
        assert rc == 0
        data = json.loads((out / "report.json").read_text())
        data["config"].pop("threads")
        outs[threads] = (json.dumps(data, sort_keys=True),
                         (out / "report.csv").read_bytes())
    ok = outs[1] == outs[8]
    assert report(11, "tail pipeline identical for --threads 1 vs 8", ok), \
        "reports differ between worker counts"
