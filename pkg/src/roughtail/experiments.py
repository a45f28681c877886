"""Monte Carlo harnesses for the tail behaviour of the greedy count and the
Jacobian supremum, plus the explicit constants entering the tail bound.

The theoretical curve dominating the survival function of the greedy count
at threshold 3(2 alpha)^p is

    C1 * exp(-alpha^2 n^(2/rho) / (2^7 c^4 V_rho)),
    c = 2 * 4^(1/p + 1/rho) * zeta(1/p + 1/rho),
    C1 = exp(2 * PhiInv(mu(A_alpha))^2),

with mu(A_alpha) the probability that the path's p-variation norm stays
below alpha and V_rho the 2-D variation of the covariance.  The curve is
loose by many orders of magnitude at desk scale; the experiments assert
domination, never tightness.  All randomness flows from one seed through
counter-based per-path streams, so reports are bit-identical for any
worker count.
"""

from __future__ import annotations

import json
import math
import multiprocessing
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import beta as _beta_dist

from . import _kernels
from .errors import BoundViolationError, ConfigError, FeasibilityError
from .gaussian import (STREAM_MAIN, STREAM_PILOT, GaussianModel,
                       plan_parameters, sample_path)
from .partition import greedy_partition
from .rde import fields_from_spec, jacobian_flow
from .rough_path import lift
from .variation import ControlQuery, covariance_rho_variation

REPORT_SCHEMA = "rough-tail/report/v1"
_MAX_THRESHOLD_ROWS = 64


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def riemann_zeta(s: float) -> float:
    """zeta(s) for s > 1 by Euler-Maclaurin acceleration, |error| < 1e-12."""
    if s <= 1.0:
        raise FeasibilityError(f"zeta(s) diverges for s <= 1 (got s={s})")
    n = 32
    k = np.arange(1, n + 1, dtype=np.float64)
    val = float(np.sum(k ** (-s)))
    val += n ** (1.0 - s) / (s - 1.0)
    val -= 0.5 * n ** (-s)
    val += s / 12.0 * n ** (-s - 1.0)
    val -= s * (s + 1) * (s + 2) / 720.0 * n ** (-s - 3.0)
    val += s * (s + 1) * (s + 2) * (s + 3) * (s + 4) / 30240.0 * n ** (-s - 5.0)
    return val


def constant_c_pq(p: float, q: float) -> float:
    """The Young pairing constant 2 * 4^(1/p + 1/q) * zeta(1/p + 1/q).

    Defined only for 1/p + 1/q > 1; the boundary is exactly where the
    cross-integrals stop being Young-integrable.
    """
    s = 1.0 / p + 1.0 / q
    if s <= 1.0:
        raise FeasibilityError(
            f"need 1/p + 1/q > 1 for the pairing constant, got {s:.6g}")
    return 2.0 * 4.0 ** s * riemann_zeta(s)


def admissible_moment_eta(count_threshold: float, p: float, rho: float,
                          v_rho: float) -> float:
    """Largest eta for which E[exp(eta N^(2/rho))] is finite, N being the
    greedy count at the given control threshold:
    threshold^(2/p) / (3^(2/p) * 2^9 * c_{p,rho}^4 * V_rho)."""
    if count_threshold <= 0 or v_rho <= 0:
        raise ConfigError("count_threshold and v_rho must be positive")
    c = constant_c_pq(p, rho)
    return (count_threshold ** (2.0 / p)
            / (3.0 ** (2.0 / p) * 2 ** 9 * c ** 4 * v_rho))


def clopper_pearson(successes: int, trials: int, confidence: float = 0.99):
    """Exact binomial two-sided confidence interval."""
    if trials <= 0:
        raise ConfigError("clopper_pearson needs a positive trial count")
    a = 0.5 * (1.0 - confidence)
    lo = 0.0 if successes == 0 else float(_beta_dist.ppf(a, successes,
                                                         trials - successes + 1))
    hi = 1.0 if successes == trials else float(_beta_dist.ppf(1.0 - a, successes + 1,
                                                              trials - successes))
    return lo, hi


# ---------------------------------------------------------------------------
# tail-shape fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeFit:
    """Weibull shape exponent from the log(-log survival) regression."""

    r_hat: float
    ci_lo: float
    ci_hi: float
    points_used: int


def _usable_regression_points(samples: np.ndarray, thresholds: np.ndarray,
                              min_exceedances: int, max_survival: float):
    xs, ys = [], []
    n = samples.shape[0]
    for x in thresholds:
        if x <= 0:
            continue
        k = int(np.sum(samples > x))
        if k < min_exceedances or k >= n:
            continue
        surv = k / n
        if surv > max_survival:
            continue
        xs.append(math.log(x))
        ys.append(math.log(-math.log(surv)))
    return np.array(xs), np.array(ys)


def fit_tail_shape(samples, thresholds=None, min_exceedances: int = 30,
                   bootstrap: int = 200, bootstrap_seed: int = 0,
                   max_survival: float = 1.0):
    """OLS slope of log(-log survival) against log threshold.

    Only strictly positive survival estimates backed by at least
    ``min_exceedances`` exceedances enter the regression; returns None with
    fewer than 4 usable points.  ``max_survival`` < 1 restricts the fit to
    the tail proper, which matters for continuous statistics whose bulk has
    a different local slope than the tail.  The CI is a nonparametric
    bootstrap over the samples (fixed seed, so reports stay deterministic).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if thresholds is None:
        top = int(samples.max()) if samples.size else 0
        thresholds = np.arange(1, max(top, 1) + 1, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    xs, ys = _usable_regression_points(samples, thresholds, min_exceedances,
                                       max_survival)
    if xs.shape[0] < 4:
        return None
    slope = float(np.polyfit(xs, ys, 1)[0])
    rng = np.random.Generator(np.random.Philox(key=np.array(
        [bootstrap_seed & 0xFFFFFFFFFFFFFFFF, 0xB007], dtype=np.uint64)))
    slopes = []
    for _ in range(bootstrap):
        res = samples[rng.integers(0, samples.shape[0], samples.shape[0])]
        bx, by = _usable_regression_points(res, thresholds, min_exceedances,
                                           max_survival)
        if bx.shape[0] >= 2:
            slopes.append(float(np.polyfit(bx, by, 1)[0]))
    if slopes:
        lo, hi = np.percentile(slopes, [2.5, 97.5])
    else:
        lo = hi = slope
    return ShapeFit(slope, float(lo), float(hi), int(xs.shape[0]))


@dataclass(frozen=True)
class MomentEstimate:
    """Bootstrap-intervalled empirical moment with a heavy-tail flag."""

    value: float
    ci_lo: float
    ci_hi: float
    unstable: bool


def _bootstrap_mean(terms: np.ndarray, bootstrap: int, seed: int):
    rng = np.random.Generator(np.random.Philox(key=np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, 0xB117], dtype=np.uint64)))
    means = np.empty(bootstrap)
    n = terms.shape[0]
    for b in range(bootstrap):
        means[b] = terms[rng.integers(0, n, n)].mean()
    return float(np.percentile(means, 2.5)), float(np.percentile(means, 97.5))


def _top_share(terms: np.ndarray) -> float:
    if not np.all(np.isfinite(terms)):
        return 1.0  # overflowed terms are the definition of instability
    k = max(1, int(math.ceil(0.01 * terms.shape[0])))
    top = np.sort(terms)[-k:]
    total = terms.sum()
    return float(top.sum() / total) if total > 0 else 0.0


def moment_estimate(samples, eta: float, r: float, bootstrap: int = 200,
                    bootstrap_seed: int = 0, rho: float = None) -> MomentEstimate:
    """Empirical mean of exp(eta * N^r) over greedy-count samples.

    Pass rho to enforce the admissible exponent range r <= 2/rho of the
    finite-moment regime.  Flags the estimate unstable when the top 1% of
    terms carry more than half of the mean (the usual symptom of an
    infinite-moment regime).
    """
    if eta <= 0:
        raise ConfigError("eta must be positive")
    if rho is not None and r > 2.0 / rho:
        raise FeasibilityError(f"moment exponent r={r} exceeds 2/rho={2.0 / rho}")
    samples = np.asarray(samples, dtype=np.float64)
    terms = np.exp(eta * samples ** r)
    lo, hi = _bootstrap_mean(terms, bootstrap, bootstrap_seed)
    return MomentEstimate(float(terms.mean()), lo, hi, _top_share(terms) > 0.5)


def power_moment(samples, order: float, bootstrap: int = 200,
                 bootstrap_seed: int = 0) -> MomentEstimate:
    """Empirical mean of samples**order with the same bootstrap machinery."""
    samples = np.asarray(samples, dtype=np.float64)
    terms = samples ** order
    lo, hi = _bootstrap_mean(terms, bootstrap, bootstrap_seed)
    return MomentEstimate(float(terms.mean()), lo, hi, _top_share(terms) > 0.5)


# ---------------------------------------------------------------------------
# experiment configuration and report
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Full description of one tail experiment (serialisable, hashable).

    alpha_mode picks how the threshold scale is calibrated from a pilot run:
    "norm-percentile" puts alpha at a percentile of the p-variation norm
    (bound curve estimable, greedy counts typically degenerate);
    "count-scale" puts the greedy threshold at pilot-median total control
    divided by count_scale_divisor (spread-out counts for shape fits, bound
    curve usually unavailable); "fixed" takes alpha as given.
    """

    kind: str = "n-tail"
    model_kind: str = "bm"
    hurst: float = 0.5
    dim: int = 1
    horizon: float = 1.0
    grid_n: int = 256
    path_count: int = 1000
    pilot_count: int = 500
    seed: int = 0
    threads: int = 1
    alpha_mode: str = "norm-percentile"
    alpha_percentile: float = 25.0
    count_scale_divisor: float = 10.0
    alpha: float = None
    p: float = None
    q: float = None
    substeps: int = 1
    y0: list = None
    fields_spec: dict = None
    confidence: float = 0.99

    def model(self) -> GaussianModel:
        hurst = 0.5 if self.model_kind == "bm" else self.hurst
        return GaussianModel(self.model_kind, self.dim, self.horizon,
                             self.grid_n, hurst)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


@dataclass
class ThresholdRow:
    threshold: float
    exceedances: int
    survival: float
    ci_lo: float
    ci_hi: float
    bound: float = None


@dataclass
class TailReport:
    """Survival table, fitted shape, constants, and flags for one run."""

    kind: str
    config: dict
    plan: dict
    alpha: float
    alpha_tilde: float
    sample_count: int
    rows: list
    mu_a_alpha: float = None
    c1: float = None
    c_pq: float = None
    v_rho: float = None
    predicted_shape_rho: float = None
    predicted_shape_q: float = None
    shape_fit: dict = None
    moments: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    max_observed: float = 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema"] = REPORT_SCHEMA
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["n,survival,ci_lo,ci_hi,bound"]
        for row in self.rows:
            r = row if isinstance(row, dict) else asdict(row)
            bound = "" if r["bound"] is None else repr(float(r["bound"]))
            lines.append(f'{r["threshold"]:g},{r["survival"]!r},'
                         f'{r["ci_lo"]!r},{r["ci_hi"]!r},{bound}')
        return "\n".join(lines) + "\n"


def write_report(report: TailReport, json_path=None, csv_path=None) -> None:
    if json_path is not None:
        with open(json_path, "w", encoding="utf-8") as f:
            f.write(report.to_json())
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8") as f:
            f.write(report.to_csv())


# ---------------------------------------------------------------------------
# parallel map (deterministic for any worker count)
# ---------------------------------------------------------------------------

def warm_kernels() -> None:
    """Compile the numba kernels once (in the parent, before forking)."""
    s1 = np.zeros((2, 1))
    s1[1, 0] = 1.0
    s2 = np.zeros((2, 1, 1))
    s3 = np.zeros((2, 1, 1, 1))
    g1 = np.ones((1, 1))
    g2 = np.zeros((1, 1, 1))
    g3 = np.zeros((1, 1, 1, 1))
    times = np.array([0.0, 1.0])
    _kernels.omega_row(s1, s2, s3, 1, 1.0, 0)
    w1, w2, w3 = _kernels.weight_tables(s1, s2, s3, 1, 1.0)
    _kernels.dp_table(w1)
    taus = np.zeros(8)
    oms = np.zeros(8)
    _kernels.greedy_scan(times, s1, s2, s3, g1, g2, g3, 1, 1.0, 10.0, 1e-6,
                         taus, oms)
    _kernels.omega_interval(times, s1, s2, s3, g1, g2, g3, 1, 1.0, 0.0, 1.0)
    _kernels.local_variation_dp(np.zeros((2, 2)), 1.0)


def parallel_map(fn, items, threads: int):
    """Order-preserving map; results depend only on the items, never on the
    worker count (each item is self-contained and seeded)."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(items) // (threads * 8))
    with ctx.Pool(processes=threads) as pool:
        return pool.map(fn, items, chunksize=chunk)


def _path_stats_worker(args):
    """(N, total control) for one path; alpha_tilde None skips the greedy."""
    (model_dict, seed, index, tag, p, level, alpha_tilde) = args
    model = GaussianModel(**model_dict)
    path = sample_path(model, seed, index, tag)
    x = lift(path, level)
    ctrl = ControlQuery(x, p)
    total = ctrl.total()
    count = -1
    if alpha_tilde is not None:
        count = greedy_partition(ctrl, alpha_tilde).count
    return count, total


def _model_dict(model: GaussianModel) -> dict:
    return {"kind": model.kind, "dim": model.dim, "horizon": model.horizon,
            "n": model.n, "hurst": model.hurst}


# ---------------------------------------------------------------------------
# greedy-count tail experiment
# ---------------------------------------------------------------------------

def _resolve_alpha(cfg: ExperimentConfig, p: float, pilot_totals: np.ndarray) -> float:
    if cfg.alpha_mode == "fixed":
        if cfg.alpha is None or cfg.alpha <= 0:
            raise ConfigError("fixed alpha mode needs a positive alpha")
        return float(cfg.alpha)
    if cfg.alpha_mode == "norm-percentile":
        norms = pilot_totals ** (1.0 / p)
        return float(np.percentile(norms, cfg.alpha_percentile))
    if cfg.alpha_mode == "count-scale":
        if cfg.count_scale_divisor <= 0:
            raise ConfigError("count_scale_divisor must be positive")
        alpha_tilde = float(np.median(pilot_totals)) / cfg.count_scale_divisor
        if alpha_tilde <= 0:
            raise ConfigError("pilot total control is degenerate (zero median)")
        return (alpha_tilde / 3.0) ** (1.0 / p) / 2.0
    raise ConfigError(f"unknown alpha mode {cfg.alpha_mode!r}")


def n_tail_experiment(cfg: ExperimentConfig) -> TailReport:
    """Sample, lift, count greedy stops at threshold 3(2 alpha)^p, and check
    the empirical survival against the theoretical curve.

    Raises BoundViolationError (report attached) if any survival upper CI
    exceeds the curve where both are defined.  When the estimate of
    mu(A_alpha) is 0 or 1 the curve is undefined: the report omits it and
    flags the calibration instead.
    """
    model = cfg.model()
    plan = plan_parameters(model, p=cfg.p, q=cfg.q)
    level = plan.level
    warm_kernels()
    mdict = _model_dict(model)

    pilot_args = [(mdict, cfg.seed, i, STREAM_PILOT, plan.p, level, None)
                  for i in range(cfg.pilot_count)]
    pilot_totals = np.array([t for _, t in parallel_map(_path_stats_worker,
                                                        pilot_args, cfg.threads)])
    alpha = _resolve_alpha(cfg, plan.p, pilot_totals)
    alpha_tilde = 3.0 * (2.0 * alpha) ** plan.p

    main_args = [(mdict, cfg.seed, i, STREAM_MAIN, plan.p, level, alpha_tilde)
                 for i in range(cfg.path_count)]
    results = parallel_map(_path_stats_worker, main_args, cfg.threads)
    counts = np.array([c for c, _ in results], dtype=np.int64)
    totals = np.array([t for _, t in results])
    norms = totals ** (1.0 / plan.p)

    mu_hat = float(np.mean(norms <= alpha))
    trivial = bool(counts.max(initial=0) == 0)
    miscalibrated = mu_hat in (0.0, 1.0)

    c_pq = v_rho = c1 = None
    if plan.rho is not None:
        c_pq = constant_c_pq(plan.p, plan.rho)
        v_rho = covariance_rho_variation(model.covariance_grid(), plan.rho)
    if not miscalibrated:
        c1 = math.exp(2.0 * float(ndtri(mu_hat)) ** 2)

    def bound_at(n: float):
        if c1 is None or c_pq is None or v_rho is None:
            return None
        expo = -(alpha ** 2) * n ** (2.0 / plan.rho) / (2 ** 7 * c_pq ** 4 * v_rho)
        return c1 * math.exp(expo)

    max_n = int(counts.max(initial=0))
    top = min(max(max_n, 4), _MAX_THRESHOLD_ROWS)
    rows = []
    for n in range(1, top + 1):
        k = int(np.sum(counts > n))
        lo, hi = clopper_pearson(k, cfg.path_count, cfg.confidence)
        rows.append(ThresholdRow(float(n), k, k / cfg.path_count, lo, hi,
                                 bound_at(float(n))))

    fit = fit_tail_shape(counts, bootstrap_seed=cfg.seed)
    report = TailReport(
        kind="n-tail",
        config=cfg.to_dict(),
        plan=asdict(plan),
        alpha=alpha,
        alpha_tilde=alpha_tilde,
        sample_count=cfg.path_count,
        rows=rows,
        mu_a_alpha=mu_hat,
        c1=c1,
        c_pq=c_pq,
        v_rho=v_rho,
        predicted_shape_rho=None if plan.rho is None else 2.0 / plan.rho,
        predicted_shape_q=2.0 / plan.q,
        shape_fit=None if fit is None else asdict(fit),
        flags={"trivial_regime": trivial, "alpha_miscalibrated": miscalibrated},
        max_observed=float(max_n),
    )
    violations = [(r.threshold, r.ci_hi, r.bound) for r in rows
                  if r.bound is not None and r.ci_hi > r.bound]
    if violations:
        raise BoundViolationError(
            f"empirical survival exceeded the tail bound at n={violations[0][0]:g} "
            f"(ci_hi={violations[0][1]:.3e} > bound={violations[0][2]:.3e})",
            violations, report)
    return report


# ---------------------------------------------------------------------------
# Jacobian tail experiment
# ---------------------------------------------------------------------------

def _batched_linear_sup_jacobian(model: GaussianModel, a_mats: np.ndarray,
                                 seed: int, indices, level: int,
                                 substeps: int) -> np.ndarray:
    """sup_t |J_t| for linear fields, batched across paths.

    For linear fields the Jacobian block is autonomous: one step multiplies
    J by  I + sum_i A_i u_i + sum_ij A_j A_i L2_ij (+ the level-3 term),
    with u the sub-step increment of the canonical lift.
    """
    d, e, _ = a_mats.shape
    batch = len(indices)
    paths = [sample_path(model, seed, i, STREAM_MAIN) for i in indices]
    dx = np.stack([np.diff(p.values, axis=0) for p in paths])  # (B, n, d)
    u = dx / substeps
    aa = np.einsum("jab,ibc->ijac", a_mats, a_mats)            # A_j A_i, index (i, j)
    aaa = None
    if level >= 3:
        aaa = np.einsum("kab,jbc,icd->ijkad", a_mats, a_mats, a_mats)
    jac = np.broadcast_to(np.eye(e), (batch, e, e)).copy()
    sup = np.ones(batch)
    n = u.shape[1]
    for seg in range(n):
        useg = u[:, seg]                                       # (B, d)
        l2 = 0.5 * np.einsum("Bi,Bj->Bij", useg, useg)
        step = (np.broadcast_to(np.eye(e), (batch, e, e)).copy()
                + np.einsum("iab,Bi->Bab", a_mats, useg)
                + np.einsum("ijab,Bij->Bab", aa, l2))
        if level >= 3:
            l3 = np.einsum("Bi,Bj,Bk->Bijk", useg, useg, useg) / 6.0
            step = step + np.einsum("ijkab,Bijk->Bab", aaa, l3)
        for _ in range(substeps):
            jac = step @ jac
            svals = np.linalg.svd(jac, compute_uv=False)
            sup = np.maximum(sup, svals[:, 0])
    return sup


def _jacobian_worker(args):
    (model_dict, seed, index, level, substeps, spec, y0) = args
    model = GaussianModel(**model_dict)
    fields = fields_from_spec(spec)
    path = sample_path(model, seed, index, STREAM_MAIN)
    x = lift(path, level)
    traj = jacobian_flow(x, fields, y0, substeps=substeps)
    return traj.sup_jacobian_norm()


def jacobian_tail_experiment(cfg: ExperimentConfig) -> TailReport:
    """Tail of log sup_t |J_t| plus empirical moments of sup_t |J_t|.

    The theoretical constants for this curve are not explicit, so the report
    carries no bound column; the shape fit and the stability of the moment
    table are the checkable content.
    """
    if cfg.fields_spec is None:
        raise ConfigError("jacobian experiment needs a fields_spec")
    model = cfg.model()
    plan = plan_parameters(model, p=cfg.p, q=cfg.q)
    level = plan.level
    fields = fields_from_spec(cfg.fields_spec)
    if fields.state_dim and cfg.y0 is not None \
            and len(cfg.y0) != fields.state_dim:
        raise ConfigError("y0 length does not match the field state dimension")
    y0 = np.ones(fields.state_dim) if cfg.y0 is None else np.asarray(cfg.y0, float)

    if fields.family == "constant":
        sup_vals = np.ones(cfg.path_count)
    elif fields.family == "linear":
        a = np.asarray(cfg.fields_spec["coefficients"]["A"], dtype=np.float64)
        if a.ndim == 2:
            a = a[None]
        sup_vals = np.empty(cfg.path_count)
        chunk = 256
        for lo in range(0, cfg.path_count, chunk):
            idx = range(lo, min(lo + chunk, cfg.path_count))
            sup_vals[lo:lo + len(idx)] = _batched_linear_sup_jacobian(
                model, a, cfg.seed, idx, level, cfg.substeps)
    else:
        warm_kernels()
        args = [(_model_dict(model), cfg.seed, i, level, cfg.substeps,
                 cfg.fields_spec, y0) for i in range(cfg.path_count)]
        sup_vals = np.array(parallel_map(_jacobian_worker, args, cfg.threads))

    logs = np.log(np.maximum(sup_vals, 1e-300))
    positive = logs[logs > 0]
    if positive.size:
        qs = np.linspace(0.30, 0.9995, 64)
        thresholds = np.unique(np.round(np.quantile(positive, qs), 12))
        thresholds = thresholds[thresholds > 0][:_MAX_THRESHOLD_ROWS]
    else:
        thresholds = np.array([1.0])
    rows = []
    for x in thresholds:
        k = int(np.sum(logs > x))
        lo, hi = clopper_pearson(k, cfg.path_count, cfg.confidence)
        rows.append(ThresholdRow(float(x), k, k / cfg.path_count, lo, hi, None))
    # a continuous statistic's bulk has its own local slope; fit on the tail
    fit = fit_tail_shape(logs, thresholds, bootstrap_seed=cfg.seed,
                         max_survival=0.05)
    moments = []
    for order in (1, 2, 4, 8):
        est = power_moment(sup_vals, order, bootstrap_seed=cfg.seed + order)
        moments.append({"q": order, "value": est.value, "ci_lo": est.ci_lo,
                        "ci_hi": est.ci_hi, "unstable": est.unstable})
    return TailReport(
        kind="jacobian-tail",
        config=cfg.to_dict(),
        plan=asdict(plan),
        alpha=cfg.alpha if cfg.alpha else 0.0,
        alpha_tilde=(3.0 * (2.0 * cfg.alpha) ** plan.p) if cfg.alpha else 0.0,
        sample_count=cfg.path_count,
        rows=rows,
        predicted_shape_rho=None if plan.rho is None else 2.0 / plan.rho,
        predicted_shape_q=2.0 / plan.q,
        shape_fit=None if fit is None else asdict(fit),
        moments=moments,
        flags={"trivial_regime": bool(np.all(sup_vals <= 1.0 + 1e-12))},
        max_observed=float(logs.max(initial=0.0)),
    )
