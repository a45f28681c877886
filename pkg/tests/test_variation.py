import itertools
import threading

import numpy as np
import pytest

from roughtail import (ControlQuery, CovarianceGrid, DimensionMismatchError,
                       control, covariance_rho_variation, lift, p_variation)
from roughtail.gaussian import fbm_covariance, fbm_model, sample_path
from roughtail.rough_path import PiecewiseLinearPath

from conftest import random_lift, random_path


def brute_force_control(x, p, i, j):
    """Per-level sup over every sub-dissection of grid [i, j], by enumeration."""
    level_count = int(np.floor(p))
    interior = list(range(i + 1, j))
    total = 0.0
    for k in range(1, level_count + 1):
        best = 0.0
        for r in range(len(interior) + 1):
            for combo in itertools.combinations(interior, r):
                pts = [i, *combo, j]
                s = sum(np.linalg.norm(x.increment(a, b).levels[k - 1].ravel())
                        ** (p / k) for a, b in zip(pts[:-1], pts[1:]))
                best = max(best, s)
        total += best
    return total


def test_monotone_path_one_variation_is_length():
    t = np.linspace(0, 1, 9)
    path = PiecewiseLinearPath(t, (3.0 * t)[:, None])
    x = lift(path, 1)
    assert p_variation(x, 1.0, 0, 8) == pytest.approx(3.0, abs=1e-12)


def test_zigzag_two_variation_level_one():
    # 0 -> 1 -> 0: the full dissection wins with 1^2 + 1^2 = 2
    path = PiecewiseLinearPath(np.array([0.0, 0.5, 1.0]),
                               np.array([[0.0], [1.0], [0.0]]))
    x = lift(path, 2)
    total = p_variation(x, 2.0, 0, 2)
    level1_full = 1.0 ** 2 + 1.0 ** 2
    assert total >= level1_full - 1e-12
    # brute force agrees
    assert total == pytest.approx(brute_force_control(x, 2.0, 0, 2), abs=1e-12)


def test_dp_matches_enumeration_random_paths():
    rng = np.random.default_rng(0)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        p = float(rng.uniform(1.0, 3.9))
        x = random_lift(rng, n, d, max(int(np.floor(p)), 1), uniform_grid=False)
        got = p_variation(x, p, 0, n)
        want = brute_force_control(x, p, 0, n)
        assert got == pytest.approx(want, abs=1e-12)


def test_floor_p_above_level_rejected():
    rng = np.random.default_rng(1)
    x = random_lift(rng, 8, 2, 2)
    with pytest.raises(DimensionMismatchError):
        p_variation(x, 3.2, 0, 8)


def test_control_memo_determinism_and_diagonal():
    rng = np.random.default_rng(2)
    ctrl = control(random_lift(rng, 32, 2, 2), 2.5)
    assert ctrl.omega(7, 7) == 0.0
    v1 = ctrl.omega(3, 19)
    v2 = ctrl.omega(3, 19)
    assert v1 == v2


def test_control_concurrent_reads_identical():
    rng = np.random.default_rng(3)
    ctrl = control(random_lift(rng, 48, 2, 2), 2.5)
    out = [[None] * 8 for _ in range(4)]

    def reader(slot):
        for r in range(8):
            out[slot][r] = ctrl.omega(2 * slot, 40 + r)

    threads = [threading.Thread(target=reader, args=(s,)) for s in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    single = [[control(ctrl.path, 2.5).omega(2 * s, 40 + r) for r in range(8)]
              for s in range(4)]
    assert out == single


def test_superadditivity_no_violations():
    rng = np.random.default_rng(4)
    model = fbm_model(0.4, dim=2, n=64)
    x = lift(sample_path(model, 99, 0), 2)
    ctrl = control(x, 2.75)
    violations = 0
    for _ in range(10_000):
        i, j, k = np.sort(rng.integers(0, 65, size=3))
        if ctrl.omega(i, j) + ctrl.omega(j, k) > ctrl.omega(i, k) * (1 + 1e-12):
            violations += 1
    assert violations == 0


def test_monotone_under_interval_inclusion():
    rng = np.random.default_rng(5)
    ctrl = control(random_lift(rng, 40, 2, 2), 2.5)
    table = ctrl.omega_table()
    for _ in range(200):
        i2, i1 = np.sort(rng.integers(0, 41, size=2))
        j1, j2 = np.sort(rng.integers(0, 41, size=2))
        if i1 <= j1:
            assert table[i1, j1] <= table[i2, j2] + 1e-12


def test_omega_interval_matches_grid_queries():
    rng = np.random.default_rng(6)
    ctrl = control(random_lift(rng, 24, 2, 2), 2.5)
    t = ctrl.path.times
    for _ in range(20):
        i, j = np.sort(rng.integers(0, 25, size=2))
        if i == j:
            continue
        assert ctrl.omega_interval(t[i], t[j]) == pytest.approx(
            ctrl.omega(i, j), rel=1e-12)


def test_covariance_grid_validation():
    t = np.linspace(0, 1, 9)
    good = fbm_covariance(0.4, t[:, None], t[None, :])
    CovarianceGrid(t, good)
    from roughtail import NumericError
    with pytest.raises(NumericError):
        CovarianceGrid(t, good + np.triu(np.ones_like(good), 1))


def test_brownian_rho_variation_exact():
    # off-diagonal rectangular increments of min(s,t) vanish; diagonal sums to T
    for n in (8, 33, 100):
        t = np.linspace(0, 1, n + 1)
        cov = CovarianceGrid(t, np.minimum(t[:, None], t[None, :]))
        assert covariance_rho_variation(cov, 1.0) == pytest.approx(1.0, abs=1e-12)
    t = np.linspace(0, 2.5, 64)
    cov = CovarianceGrid(t, np.minimum(t[:, None], t[None, :]))
    assert covariance_rho_variation(cov, 1.0) == pytest.approx(2.5, abs=1e-12)


def test_zero_covariance():
    t = np.linspace(0, 1, 10)
    cov = CovarianceGrid(t, np.zeros((10, 10)))
    assert covariance_rho_variation(cov, 1.3) == 0.0


def test_rho_variation_out_of_range():
    t = np.linspace(0, 1, 5)
    cov = CovarianceGrid(t, np.minimum(t[:, None], t[None, :]))
    with pytest.raises(DimensionMismatchError):
        covariance_rho_variation(cov, 2.0)
    with pytest.raises(DimensionMismatchError):
        covariance_rho_variation(cov, 0.9)


def test_fbm_rho_variation_grid_convergence():
    # H = 0.4, rho = 1.25: grid values increase under refinement and the two
    # finest differ by under 5%
    vals = []
    for n in (64, 128, 256):
        model = fbm_model(0.4, n=n)
        vals.append(covariance_rho_variation(model.covariance_grid(), 1.25))
    assert vals[0] <= vals[1] <= vals[2]
    assert (vals[2] - vals[1]) / vals[2] < 0.05


def test_bm_rho_variation_refinement_monotone():
    prev = 0.0
    for n in (8, 16, 32, 64):
        t = np.linspace(0, 1, n + 1)
        cov = CovarianceGrid(t, np.minimum(t[:, None], t[None, :]))
        val = covariance_rho_variation(cov, 1.0)
        assert val >= prev - 1e-12
        prev = val


def test_full_table_point_cap():
    rng = np.random.default_rng(7)
    from roughtail import GridError
    big = random_lift(rng, 40, 1, 2)
    ctrl = ControlQuery(big, 2.5)
    with pytest.raises(GridError):
        ctrl.omega_table(point_cap=30)
