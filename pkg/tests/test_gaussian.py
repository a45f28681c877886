import numpy as np
import pytest
from scipy import stats

from roughtail import FeasibilityError, GridError
from roughtail.gaussian import (GaussianModel, bm_model,
                                cameron_martin_embedding_check,
                                cholesky_sample_path, fbm_covariance,
                                fbm_model, plan_parameters, sample_path,
                                sample_paths)
from roughtail.gaussian import _circulant_eigs, _fgn_autocov
from roughtail.rough_path import PiecewiseLinearPath


def test_fbm_covariance_closed_form():
    assert fbm_covariance(0.37, 0.0, 0.8) == 0.0
    for s, t in ((0.2, 0.9), (0.5, 0.5), (1.3, 0.1)):
        assert fbm_covariance(0.5, s, t) == pytest.approx(min(s, t), abs=1e-15)
    assert fbm_covariance(0.35, 0.7, 0.7) == pytest.approx(0.7 ** 0.7, rel=1e-14)


def test_fbm_covariance_grid_psd():
    t = np.linspace(0, 1, 33)
    for hurst in (0.3, 0.4, 0.6):
        r = fbm_covariance(hurst, t[:, None], t[None, :])
        eigs = np.linalg.eigvalsh(r)
        assert eigs[0] >= -1e-10


def test_model_validation():
    with pytest.raises(FeasibilityError):
        GaussianModel("fbm", 1, 1.0, 64, 0.2)
    with pytest.raises(FeasibilityError):
        GaussianModel("bm", 1, 1.0, 64, 0.4)
    with pytest.raises(FeasibilityError):
        GaussianModel("weird", 1, 1.0, 64)
    # hurst = 1/2 fbm collapses to the Brownian covariance
    m = GaussianModel("fbm", 1, 1.0, 64, 0.5)
    t = m.times
    np.testing.assert_allclose(m.covariance_grid().matrix,
                               np.minimum(t[:, None], t[None, :]), atol=1e-12)


def test_circulant_embedding_is_exact():
    # the sampler is a linear map of Gaussians; its exact covariance must
    # reproduce the increment autocovariance on the output window
    for hurst in (0.3, 0.45, 0.5, 0.75):
        n, dt = 16, 1.0 / 16
        lam, n_embed = _circulant_eigs(hurst, n, dt)
        m = 2 * n_embed
        scale = np.sqrt(lam / m)
        amat = np.zeros((n, 2 * m))
        for k in range(m):
            z = np.zeros(m, complex)
            z[k] = 1.0
            amat[:, k] = np.fft.fft(scale * z)[:n].real
            z = np.zeros(m, complex)
            z[k] = 1.0j
            amat[:, m + k] = np.fft.fft(scale * z)[:n].real
        got = amat @ amat.T
        gamma = _fgn_autocov(hurst, dt, n)
        want = gamma[np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])]
        np.testing.assert_allclose(got, want, atol=1e-13)


def test_sampling_determinism_and_streams():
    model = fbm_model(0.4, dim=2, n=64)
    a = sample_path(model, 42, 3)
    b = sample_path(model, 42, 3)
    assert np.array_equal(a.values, b.values)
    c = sample_path(model, 42, 4)
    assert not np.array_equal(a.values, c.values)
    d = sample_path(model, 43, 3)
    assert not np.array_equal(a.values, d.values)
    e = sample_path(model, 42, 3, tag=1)
    assert not np.array_equal(a.values, e.values)


def test_fbm_half_equals_bm_bitwise():
    bm = bm_model(dim=2, n=128)
    fbm = GaussianModel("fbm", 2, 1.0, 128, 0.5)
    for idx in range(3):
        assert np.array_equal(sample_path(bm, 7, idx).values,
                              sample_path(fbm, 7, idx).values)


def test_power_of_two_required():
    with pytest.raises(GridError):
        sample_path(bm_model(n=100), 0, 0)


def test_increment_variance_chi2():
    # 100k Brownian increments: chi^2 test at the 1% level
    model = bm_model(dim=1, n=512)
    incs = np.concatenate([np.diff(sample_path(model, 11, i).values[:, 0])
                           for i in range(196)])  # ~100k increments
    n = incs.size
    stat = (incs ** 2).sum() / (1.0 / 512)
    lo, hi = stats.chi2.ppf([0.005, 0.995], n)
    assert lo < stat < hi


def test_sample_mean_clt_bound():
    model = fbm_model(0.4, dim=1, n=64)
    finals = np.array([sample_path(model, 5, i).values[-1, 0]
                       for i in range(10_000)])
    # mean of X_T over 10^4 paths within 3 sigma / sqrt(count)
    assert abs(finals.mean()) < 3.0 * 1.0 / np.sqrt(10_000)


def test_empirical_covariance_matches_model():
    model = fbm_model(0.4, dim=1, n=32)
    vals = np.stack([sample_path(model, 17, i).values[:, 0]
                     for i in range(10_000)])
    pairs = [(4, 20), (8, 8), (16, 28), (2, 30), (24, 32)]
    t = model.times
    for i, j in pairs:
        emp = (vals[:, i] * vals[:, j]).mean()
        want = fbm_covariance(0.4, t[i], t[j])
        se = np.std(vals[:, i] * vals[:, j]) / np.sqrt(vals.shape[0])
        assert abs(emp - want) < 4.0 * se


def test_cholesky_cross_check():
    # same law from the dense-Cholesky oracle: compare second moments
    model = fbm_model(0.35, dim=1, n=32)
    a = np.stack([sample_path(model, 3, i).values[:, 0] for i in range(4000)])
    b = np.stack([cholesky_sample_path(model, 3, i).values[:, 0]
                  for i in range(4000)])
    va, vb = a[:, -1].var(), b[:, -1].var()
    want = model.covariance(1.0, 1.0)
    for v in (va, vb):
        assert abs(v - want) < 5.0 * want / np.sqrt(4000)
    ks = stats.ks_2samp(a[:, -1], b[:, -1])
    assert ks.pvalue > 0.01


def test_self_similarity_ks():
    # X_{2t} / 2^H has the law of X_t: two-sample KS at the 1% level
    model = fbm_model(0.4, dim=1, n=64, horizon=2.0)
    half = np.array([sample_path(model, 23, i).values[32, 0]
                     for i in range(1000)])
    full = np.array([sample_path(model, 29, i).values[64, 0] / 2 ** 0.4
                     for i in range(1000)])
    assert stats.ks_2samp(half, full).pvalue > 0.01


def test_sample_paths_batch():
    model = bm_model(n=32)
    batch = sample_paths(model, 1, 5, start=10)
    assert len(batch) == 5
    assert np.array_equal(batch[0].values, sample_path(model, 1, 10).values)


def test_plan_parameters_examples():
    plan = plan_parameters(bm_model())
    assert (plan.rho, plan.p, plan.q, plan.level) == (1.0, 2.5, 1.0, 2)
    assert 1 / plan.p + 1 / plan.q > 1
    assert plan.p > plan.q * plan.level

    plan3 = plan_parameters(hurst=0.3)
    assert plan3.p == pytest.approx(3.875)
    assert plan3.q == pytest.approx(1.2708333333)
    assert plan3.level == 3

    plan4 = plan_parameters(fbm_model(0.4))
    assert 1 / 0.4 < plan4.p < 3
    assert plan4.rho == pytest.approx(1.25)

    with pytest.raises(FeasibilityError):
        plan_parameters(hurst=0.2)
    with pytest.raises(FeasibilityError):
        plan_parameters(hurst=0.45, p=2.0)  # p below 1/H


def test_plan_parameters_revalidates():
    for hurst in (0.26, 0.3, 1 / 3, 0.35, 0.4, 0.45, 0.5):
        plan = plan_parameters(hurst=hurst)
        plan.validate(hurst=hurst)  # must not raise


def test_embedding_check_linear_equality():
    t = np.linspace(0, 1, 17)
    h = PiecewiseLinearPath(t, (2.5 * t)[:, None])
    rep = cameron_martin_embedding_check(h, bm_model())
    assert rep.variation_norm == pytest.approx(rep.shift_norm, rel=1e-12)
    assert rep.passed


def test_embedding_check_random_paths():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1, 65)
    for _ in range(1000):
        vals = np.cumsum(rng.standard_normal((65, 2)), axis=0) * 0.2
        rep = cameron_martin_embedding_check(PiecewiseLinearPath(t, vals),
                                             bm_model())
        assert rep.passed
    zero = PiecewiseLinearPath(t, np.zeros((65, 1)))
    repz = cameron_martin_embedding_check(zero, bm_model())
    assert repz.variation_norm == 0.0 and repz.passed


def test_embedding_check_rejects_fbm():
    t = np.linspace(0, 1, 9)
    h = PiecewiseLinearPath(t, t[:, None])
    with pytest.raises(FeasibilityError):
        cameron_martin_embedding_check(h, fbm_model(0.4))
