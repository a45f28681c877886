"""Brownian and fractional Brownian sampling, covariances, parameter plans.

Sampling is exact in distribution: the stationary increment process is drawn
by circulant embedding of its autocovariance (eigenvalues via FFT), so no
discretisation bias enters the tail experiments.  Every path is a pure
function of (seed, stream tag, path index) through a counter-based
generator, which makes ensembles order-independent and safe to parallelise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityError, GridError, NumericError
from .rough_path import PiecewiseLinearPath
from .variation import CovarianceGrid

STREAM_MAIN = 0
STREAM_PILOT = 1
STREAM_AUX = 2

_EIG_CACHE: dict = {}


def fbm_covariance(hurst: float, s, t):
    """Covariance of standard fractional Brownian motion,
    (|s|^2H + |t|^2H - |t - s|^2H) / 2.  Reduces to min(s, t) at H = 1/2."""
    if not 0.0 < hurst < 1.0:
        raise FeasibilityError(f"hurst must lie in (0, 1), got {hurst}")
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    h2 = 2.0 * hurst
    out = 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianModel:
    """Centred Gaussian driver with i.i.d. components.

    kind "bm" or "fbm"; n is the number of grid steps over [0, horizon]
    (n + 1 grid points).  For the circulant sampler n must be a power of two.
    """

    kind: str
    dim: int
    horizon: float
    n: int
    hurst: float = 0.5

    def __post_init__(self):
        if self.kind not in ("bm", "fbm"):
            raise FeasibilityError(f"unknown model kind {self.kind!r}")
        if self.kind == "fbm" and not 0.25 < self.hurst < 1.0:
            raise FeasibilityError(
                f"fbm requires hurst in (1/4, 1), got {self.hurst}")
        if self.kind == "bm" and self.hurst != 0.5:
            raise FeasibilityError("bm fixes hurst = 1/2")
        if self.horizon <= 0 or self.n < 1 or self.dim < 1:
            raise FeasibilityError("horizon, n and dim must be positive")

    @property
    def effective_hurst(self) -> float:
        return 0.5 if self.kind == "bm" else self.hurst

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n + 1)

    def covariance(self, s, t):
        return fbm_covariance(self.effective_hurst, s, t)

    def covariance_grid(self, times=None) -> CovarianceGrid:
        t = self.times if times is None else np.asarray(times, dtype=np.float64)
        r = fbm_covariance(self.effective_hurst, t[:, None], t[None, :])
        return CovarianceGrid(t, r)


def path_stream(seed: int, index: int, tag: int = STREAM_MAIN) -> np.random.Generator:
    """Counter-based generator for one path: key = (seed, tag<<56 | index)."""
    if not 0 <= index < (1 << 56):
        raise FeasibilityError(f"path index out of range: {index}")
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64((tag << 56) | index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _fgn_autocov(hurst: float, dt: float, count: int) -> np.ndarray:
    k = np.arange(count, dtype=np.float64)
    h2 = 2.0 * hurst
    return 0.5 * dt ** h2 * (np.abs(k + 1) ** h2 - 2 * np.abs(k) ** h2
                             + np.abs(k - 1) ** h2)


def _circulant_eigs(hurst: float, n: int, dt: float):
    """FFT eigenvalues of the increment-autocovariance embedding.

    Retries with a padded (longer) embedding if eigenvalues come out
    negative beyond roundoff; raises if padding does not cure it.
    """
    key = (round(hurst, 15), n, round(dt, 15))
    hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit
    n_embed = n
    for _ in range(5):
        gamma = _fgn_autocov(hurst, dt, n_embed + 1)
        c = np.concatenate([gamma[:-1], gamma[-1:], gamma[-2:0:-1]])
        lam = np.fft.fft(c).real
        floor = -1e-10 * lam.max()
        if lam.min() >= floor:
            lam = np.clip(lam, 0.0, None)
            _EIG_CACHE[key] = (lam, n_embed)
            return lam, n_embed
        n_embed *= 2
    raise NumericError(
        f"circulant embedding is not PSD for hurst={hurst} even after padding")


def sample_path(model: GaussianModel, seed: int, index: int,
                tag: int = STREAM_MAIN) -> PiecewiseLinearPath:
    """One exact path, bit-reproducible for a given (seed, tag, index)."""
    n = model.n
    if n & (n - 1):
        raise GridError(f"circulant sampling needs n to be a power of two, got {n}")
    dt = model.horizon / n
    lam, n_embed = _circulant_eigs(model.effective_hurst, n, dt)
    m = 2 * n_embed
    scale = np.sqrt(lam / m)
    rng = path_stream(seed, index, tag)
    values = np.zeros((n + 1, model.dim))
    for c in range(model.dim):
        u = rng.standard_normal(m)
        v = rng.standard_normal(m)
        fgn = np.fft.fft(scale * (u + 1j * v))[:n].real
        np.cumsum(fgn, out=values[1:, c])
    return PiecewiseLinearPath(model.times, values)


def sample_paths(model: GaussianModel, seed: int, count: int, start: int = 0,
                 tag: int = STREAM_MAIN) -> list:
    """Batch of paths with indices start..start+count-1."""
    return [sample_path(model, seed, start + i, tag) for i in range(count)]


def cholesky_sample_path(model: GaussianModel, seed: int, index: int,
                         tag: int = STREAM_AUX) -> PiecewiseLinearPath:
    """O(n^3) dense-Cholesky sampler; small-n cross-check for the circulant
    route (same law, different draw order, so not bit-identical)."""
    n = model.n
    if n > 2048:
        raise GridError("cholesky sampler is a small-n oracle; use sample_path")
    dt = model.horizon / n
    gamma = _fgn_autocov(model.effective_hurst, dt, n)
    cov = np.empty((n, n))
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    cov[:] = gamma[idx]
    chol = np.linalg.cholesky(cov + 1e-14 * gamma[0] * np.eye(n))
    rng = path_stream(seed, index, tag)
    values = np.zeros((n + 1, model.dim))
    for c in range(model.dim):
        z = rng.standard_normal(n)
        np.cumsum(chol @ z, out=values[1:, c])
    return PiecewiseLinearPath(model.times, values)


@dataclass(frozen=True)
class ParamPlan:
    """Feasible (rho, p, q, level) tuple for a Gaussian driver.

    rho is the covariance 2-D variation order (None when only the
    Hurst-specific route applies), p the rough-path order, q the shift-space
    variation order, level = floor(p) the lift depth.
    """

    rho: float | None
    p: float
    q: float
    level: int

    def validate(self, hurst: float | None = None) -> None:
        """Re-assert the three feasibility clauses (lift exists, Young
        pairing 1/p + 1/q > 1, and p > q * floor(p))."""
        if self.level != math.floor(self.p):
            raise FeasibilityError("level must equal floor(p)")
        if self.rho is not None and not self.p > 2 * self.rho:
            raise FeasibilityError(f"lift needs p > 2 rho: p={self.p}, rho={self.rho}")
        if hurst is not None and not self.p > 1.0 / hurst:
            raise FeasibilityError(f"lift needs p > 1/H: p={self.p}, H={hurst}")
        if not 1.0 / self.p + 1.0 / self.q > 1.0:
            raise FeasibilityError(
                f"Young pairing needs 1/p + 1/q > 1: p={self.p}, q={self.q}")
        if not self.p > self.q * self.level:
            raise FeasibilityError(
                f"need p > q floor(p): p={self.p}, q={self.q}, level={self.level}")


def plan_parameters(model: GaussianModel | None = None, strategy: str = "auto",
                    hurst: float | None = None, rho: float | None = None,
                    p: float | None = None, q: float | None = None) -> ParamPlan:
    """Pick a feasible (rho, p, q, level) tuple for the given driver.

    Free parameters default to interval midpoints; explicit p or q override
    the midpoints but are still validated.  Strategies: "rho" plans from a
    covariance-variation order in [1, 3/2); "fbm" plans from the Hurst index
    in (1/4, 1/2); "auto" picks "rho" for Brownian drivers and "fbm"
    otherwise.
    """
    if model is not None:
        hurst = model.effective_hurst if hurst is None else hurst
    if strategy == "auto":
        if rho is not None:
            strategy = "rho"
        elif hurst is not None and abs(hurst - 0.5) < 1e-12:
            strategy, rho = "rho", 1.0
        else:
            strategy = "fbm"
    if strategy == "rho":
        if rho is None:
            if hurst is None:
                raise FeasibilityError("rho-strategy needs rho or a model")
            rho = max(1.0, 1.0 / (2.0 * hurst))
        if not 1.0 <= rho < 1.5:
            raise FeasibilityError(f"rho-route needs rho in [1, 3/2), got {rho}")
        p_val = p if p is not None else 0.5 * (2.0 * rho + 3.0)
        if not 2.0 * rho < p_val < 3.0:
            raise FeasibilityError(f"p must lie in (2 rho, 3), got {p_val}")
        q_val = q if q is not None else rho
        plan = ParamPlan(rho, p_val, q_val, math.floor(p_val))
        plan.validate()
        return plan
    if strategy == "fbm":
        if hurst is None:
            raise FeasibilityError("fbm-strategy needs hurst or a model")
        if not 0.25 < hurst <= 0.5:
            raise FeasibilityError(
                f"tail planning needs hurst in (1/4, 1/2], got {hurst}")
        rho_val = max(1.0, 1.0 / (2.0 * hurst))
        if hurst > 1.0 / 3.0:
            p_val = p if p is not None else 0.5 * (1.0 / hurst + 3.0)
            if not 1.0 / hurst < p_val < 3.0:
                raise FeasibilityError(f"p must lie in (1/H, 3), got {p_val}")
            q_hi = min(p_val / 2.0, p_val / (p_val - 1.0))
            q_lo = 1.0 / (hurst + 0.5)
        else:
            p_val = p if p is not None else 0.5 * (3.0 / (hurst + 0.5) + 4.0)
            if not 3.0 / (hurst + 0.5) < p_val < 4.0:
                raise FeasibilityError(f"p must lie in (3/(H+1/2), 4), got {p_val}")
            q_hi = p_val / 3.0
            q_lo = 1.0 / (hurst + 0.5)
        if q_lo >= q_hi:
            raise FeasibilityError(f"empty q-interval ({q_lo}, {q_hi}) for hurst={hurst}")
        q_val = q if q is not None else 0.5 * (q_lo + q_hi)
        if not q_lo < q_val < q_hi:
            raise FeasibilityError(f"q must lie in ({q_lo}, {q_hi}), got {q_val}")
        plan = ParamPlan(rho_val if rho_val < 1.5 else None, p_val, q_val,
                         math.floor(p_val))
        plan.validate(hurst=hurst)
        return plan
    raise FeasibilityError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class EmbeddingReport:
    """Shift-space norm versus variation norm of one piecewise-linear path."""

    variation_norm: float
    shift_norm: float
    variation_constant: float
    passed: bool


def cameron_martin_embedding_check(h: PiecewiseLinearPath,
                                   model: GaussianModel) -> EmbeddingReport:
    """Check |h|_{1-var} <= sqrt(V_1) |h|_shift for the Brownian driver.

    For Brownian motion the shift-space norm of a piecewise-linear h is the
    L^2 norm of its derivative and V_1 of the covariance equals the horizon.
    Holds for every h by Cauchy-Schwarz, with equality for linear h.
    """
    if model.kind != "bm" and model.effective_hurst != 0.5:
        raise FeasibilityError("the embedding check supports the Brownian model only")
    dh = np.diff(h.values, axis=0)
    dt = np.diff(h.times)
    seg_norms = np.sqrt((dh ** 2).sum(axis=1))
    var_norm = float(seg_norms.sum())
    shift_norm = float(np.sqrt((seg_norms ** 2 / dt).sum()))
    v1 = float(h.times[-1] - h.times[0])
    passed = var_norm <= math.sqrt(v1) * shift_norm * (1.0 + 1e-12) + 1e-15
    return EmbeddingReport(var_norm, shift_norm, v1, bool(passed))


def bm_model(dim: int = 1, horizon: float = 1.0, n: int = 256) -> GaussianModel:
    return GaussianModel("bm", dim, horizon, n)


def fbm_model(hurst: float, dim: int = 1, horizon: float = 1.0,
              n: int = 256) -> GaussianModel:
    return GaussianModel("fbm", dim, horizon, n, hurst)
