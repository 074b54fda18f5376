"""Direct and binned kernel estimators, oracle bandwidth, error metrics."""

import math
import warnings

import numpy as np
import pytest

from qhtomo.estimate import (
    DomainError,
    EstimateResult,
    InfeasibleBandwidthError,
    RadialRangeWarning,
    bin_dataset,
    direct_estimate,
    estimate_curve,
    grid_estimate,
    l2_error,
    oracle_bandwidth,
    relative_sup,
    sup_error,
)
from qhtomo.simulate import HomodyneDataset, NoiseModel, sample_homodyne
from qhtomo.states import StateSpec, WignerGrid, analytic_state
from qhtomo.tomography import GridMismatchError

VACUUM = StateSpec(kind="vacuum")
SINGLE = StateSpec(kind="single-photon")


def _dataset(z, phi, eta=0.9, seed=0, state=VACUUM):
    return HomodyneDataset(
        z=np.asarray(z, float), phi=np.asarray(phi, float), noise=NoiseModel(eta), seed=seed, state=state
    )


class TestDirectEstimate:
    def test_single_sample_origin_noisy(self):
        gamma, h = 1.0 / 36.0, 0.5
        data = _dataset([0.0], [0.3], eta=0.9)
        val = direct_estimate(data, h, [[0.0, 0.0]])[0]
        expect = (math.exp(gamma / h**2) - 1.0) / (4.0 * math.pi * gamma)
        assert val == pytest.approx(expect, rel=1e-6)

    def test_single_sample_origin_noiseless(self):
        h = 0.5
        data = _dataset([0.0], [1.1], eta=1.0)
        val = direct_estimate(data, h, [[0.0, 0.0]])[0]
        assert val == pytest.approx(1.0 / (4.0 * math.pi * h**2), rel=1e-6)

    def test_shift_equivariance_exact(self):
        # with phi = 0 the estimator depends on q - z only
        rng = np.random.default_rng(0)
        z = rng.normal(size=50)
        c = 0.7
        qs = np.linspace(-2, 2, 21)
        a = direct_estimate(_dataset(z, np.zeros(50)), 0.4, np.column_stack([qs, np.zeros(21)]))
        b = direct_estimate(
            _dataset(z + c, np.zeros(50)), 0.4, np.column_stack([qs + c, np.zeros(21)])
        )
        assert np.allclose(a, b, atol=1e-9)

    def test_linearity_in_samples(self):
        rng = np.random.default_rng(1)
        z1, p1 = rng.normal(size=30), rng.uniform(0, math.pi, 30)
        z2, p2 = rng.normal(size=70), rng.uniform(0, math.pi, 70)
        pts = np.column_stack([np.linspace(-2, 2, 15), np.linspace(1, -1, 15)])
        w1 = direct_estimate(_dataset(z1, p1), 0.4, pts)
        w2 = direct_estimate(_dataset(z2, p2), 0.4, pts)
        w = direct_estimate(_dataset(np.concatenate([z1, z2]), np.concatenate([p1, p2])), 0.4, pts)
        assert np.allclose(w, 0.3 * w1 + 0.7 * w2, atol=1e-12)

    def test_empty_dataset_rejected(self):
        data = _dataset([], [])
        with pytest.raises(DomainError):
            direct_estimate(data, 0.4, [[0.0, 0.0]])
        with pytest.raises(DomainError):
            grid_estimate(data, 0.4, 6.0, 32)

    def test_bandwidth_domain(self):
        from qhtomo.tomography import DomainError as KernelDomainError

        data = _dataset([0.0], [0.0])
        for h in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(KernelDomainError):
                direct_estimate(data, h, [[0.0, 0.0]])


class TestBinnedEstimate:
    def test_bin_masses(self):
        data = sample_homodyne(VACUUM, 5_000, 0.9, 2)
        sino = bin_dataset(data, 64, 512, 12.0)
        # each sample adds A/(n dx); total mass over all cells * dx = A
        assert sino.values.sum() * sino.radial_step == pytest.approx(64.0, rel=1e-12)

    def test_empty_angle_bins_are_fine(self):
        data = _dataset([0.1, -0.2], [0.5, 0.6])
        sino = bin_dataset(data, 128, 256, 6.0)
        assert np.count_nonzero(sino.values.sum(axis=1)) <= 2

    def test_radial_range_warning(self):
        data = sample_homodyne(VACUUM, 2_000, 0.9, 4)
        with pytest.warns(RadialRangeWarning):
            bin_dataset(data, 32, 64, 0.5)

    def test_binned_linearity(self):
        rng = np.random.default_rng(3)
        z1, p1 = rng.normal(size=40), rng.uniform(0, math.pi, 40)
        z2, p2 = rng.normal(size=60), rng.uniform(0, math.pi, 60)
        s1 = bin_dataset(_dataset(z1, p1), 32, 128, 8.0).values
        s2 = bin_dataset(_dataset(z2, p2), 32, 128, 8.0).values
        s = bin_dataset(_dataset(np.concatenate([z1, z2]), np.concatenate([p1, p2])), 32, 128, 8.0).values
        assert np.allclose(s, 0.4 * s1 + 0.6 * s2, atol=1e-12)

    def test_binned_matches_direct(self):
        data = sample_homodyne(SINGLE, 300, 0.9, 6)
        result = grid_estimate(data, 0.4, 6.0, 64)
        truth_geom = result.grid
        Q, P = truth_geom.meshgrid()
        pts = np.column_stack([Q.ravel(), P.ravel()])
        direct = direct_estimate(data, 0.4, pts).reshape(64, 64)
        dev = np.max(np.abs(result.grid.values - direct)) / np.max(np.abs(direct))
        assert dev < 0.05

    def test_estimate_curve_matches_single_estimates(self):
        from qhtomo.estimate import _default_n_radial

        data = sample_homodyne(VACUUM, 1_000, 0.9, 8)
        hs = (0.5, 0.3)
        hw = 6.0
        rhw = hw * math.sqrt(2.0) + 6.0
        n_radial = _default_n_radial(min(hs), rhw)
        curve = estimate_curve(data, hs, hw, 32)
        assert [r.h for r in curve] == list(hs)
        assert all(r.method == "binned-fbp" for r in curve)
        for r in curve:
            single = grid_estimate(data, r.h, hw, 32, n_radial=n_radial, radial_half_width=rhw)
            assert np.array_equal(r.grid.values, single.grid.values)

    def test_result_validation(self):
        grid = WignerGrid(6.0, 8, np.zeros((8, 8)))
        with pytest.raises(DomainError):
            EstimateResult(grid=grid, h=1.2, gamma=0.0, n=10, method="direct")
        with pytest.raises(DomainError):
            EstimateResult(grid=grid, h=0.5, gamma=0.0, n=10, method="magic")


class TestOracleBandwidth:
    def test_closed_form_r2(self):
        h = oracle_bandwidth(0.5, 2.0, 1.0 / 36.0, 100_000)
        assert h == pytest.approx(math.sqrt(2.0 * (0.5 + 1.0 / 36.0) / math.log(100_000)), rel=1e-15)
        assert h == pytest.approx(0.3027943041472541, abs=1e-12)

    def test_general_r_residual(self):
        for beta, r, gamma, n in ((0.5, 1.0, 1.0 / 36.0, 100_000), (1.2, 1.5, 0.0, 10_000)):
            h = oracle_bandwidth(beta, r, gamma, n)
            assert 0.0 < h < 1.0
            assert abs(gamma / h**2 + beta / h**r - 0.5 * math.log(n)) < 1e-12

    def test_infeasible(self):
        with pytest.raises(InfeasibleBandwidthError):
            oracle_bandwidth(10.0, 2.0, 1.0 / 36.0, 100)

    def test_domain(self):
        for args in ((0.0, 2.0, 0.0, 100), (0.5, 2.5, 0.0, 100), (0.5, 2.0, 0.0, 1)):
            with pytest.raises(DomainError):
                oracle_bandwidth(*args)


class TestErrorMetrics:
    def test_zero_on_equal(self):
        g = analytic_state(VACUUM, 6.0, 64)
        assert sup_error(g, g) == 0.0
        assert l2_error(g, g) == 0.0
        assert relative_sup(g, g) == 0.0

    def test_vacuum_vs_zero(self):
        truth = analytic_state(VACUUM, 6.0, 128)
        zero = WignerGrid(6.0, 128, np.zeros((128, 128)))
        # cell-centered grids never sample the origin peak exactly
        assert sup_error(zero, truth) == pytest.approx(1.0 / math.pi, rel=5e-3)
        assert relative_sup(zero, truth) == pytest.approx(1.0, rel=1e-12)
        # ||W||_2^2 = 1/(2 pi) for any pure state
        assert l2_error(zero, truth) == pytest.approx(math.sqrt(1.0 / (2.0 * math.pi)), rel=5e-3)

    def test_zero_reference_rejected(self):
        zero = WignerGrid(6.0, 16, np.zeros((16, 16)))
        with pytest.raises(DomainError):
            relative_sup(zero, zero)

    def test_grid_mismatch(self):
        a = WignerGrid(6.0, 16, np.zeros((16, 16)))
        b = WignerGrid(5.0, 16, np.zeros((16, 16)))
        for fn in (sup_error, l2_error, relative_sup):
            with pytest.raises(GridMismatchError):
                fn(a, b)


class TestStatisticalBehavior:
    def test_bias_grows_with_bandwidth(self):
        # at large n the error is bias-dominated, so a coarser bandwidth
        # reconstructs worse; majority vote over seeds guards against flukes
        truth = analytic_state(SINGLE, 6.0, 64)
        wins = 0
        for seed in range(5):
            data = sample_homodyne(SINGLE, 50_000, 0.9, seed)
            coarse = grid_estimate(data, 0.6, 6.0, 64).grid
            fine = grid_estimate(data, 0.2, 6.0, 64).grid
            if sup_error(coarse, truth) > sup_error(fine, truth):
                wins += 1
        assert wins >= 4

    def test_error_decreases_with_n(self):
        truth = analytic_state(SINGLE, 6.0, 64)
        errs = {}
        for n in (1_000, 100_000):
            h = oracle_bandwidth(0.5, 2.0, 1.0 / 36.0, n)
            seed_errs = [
                sup_error(grid_estimate(sample_homodyne(SINGLE, n, 0.9, s), h, 6.0, 64).grid, truth)
                for s in (11, 12, 13)
            ]
            errs[n] = float(np.median(seed_errs))
        assert errs[100_000] < errs[1_000]
