"""Radon transform, deconvolution filter, back-projection."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhtomo.simulate import conditional_density
from qhtomo.states import StateSpec, WignerGrid, analytic_state
from qhtomo.tomography import (
    CutoffUnresolvableWarning,
    DomainError,
    GridMismatchError,
    Sinogram,
    backproject,
    filter_sinogram,
    kernel_fourier,
    kernel_real,
    radon,
)


class TestSinogram:
    def test_midpoint_angles(self):
        s = Sinogram(4, 8, 6.0, np.zeros((4, 8)))
        assert np.allclose(s.angles, [math.pi / 8, 3 * math.pi / 8, 5 * math.pi / 8, 7 * math.pi / 8])

    def test_radial_axis_cell_centers(self):
        s = Sinogram(1, 4, 2.0, np.zeros((1, 4)))
        assert np.allclose(s.radial_axis, [-1.5, -0.5, 0.5, 1.5])

    def test_shape_mismatch(self):
        with pytest.raises(GridMismatchError):
            Sinogram(4, 8, 6.0, np.zeros((8, 4)))


class TestKernel:
    def test_fourier_profile(self):
        g, h = 1 / 36, 0.5
        assert kernel_fourier(0.0, g, h) == 0.0
        assert kernel_fourier(1.0, g, h) == pytest.approx(math.exp(g), rel=1e-14)
        assert kernel_fourier(2.0, g, h) == pytest.approx(2 * math.exp(4 * g), rel=1e-14)
        assert kernel_fourier(2.0 + 1e-12, g, h) == 0.0
        assert kernel_fourier(-1.5, g, h) == kernel_fourier(1.5, g, h)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            kernel_fourier(1.0, 0.3, 0.5)
        with pytest.raises(DomainError):
            kernel_real(1.0, 0.1, 1.5)
        with pytest.raises(DomainError):
            kernel_real(1.0, -0.01, 0.5)

    def test_real_kernel_origin_closed_forms(self):
        g, h = 1 / 36, 0.5
        assert kernel_real(0.0, g, h) == pytest.approx(
            (math.exp(g / h**2) - 1) / (2 * math.pi * g), rel=1e-12
        )
        assert kernel_real(0.0, 0.0, h) == pytest.approx(1 / (2 * math.pi * h**2), rel=1e-12)

    def test_ramp_kernel_closed_form(self):
        # gamma = 0: K(s) = (1/pi) [c sin(cs)/s + (cos(cs) - 1)/s^2], c = 1/h
        c = 1 / 0.4
        ss = np.array([0.3, 1.0, 2.7])
        expect = (c * np.sin(c * ss) / ss + (np.cos(c * ss) - 1) / ss**2) / math.pi
        assert np.allclose(kernel_real(ss, 0.0, 0.4), expect, rtol=1e-10)

    @given(st.floats(0.05, 5.0), st.floats(0.0, 0.24), st.floats(0.1, 0.9))
    @settings(max_examples=30, deadline=None)
    def test_evenness_and_peak(self, s, gamma, h):
        k_plus, k_minus = kernel_real(s, gamma, h), kernel_real(-s, gamma, h)
        assert k_plus == pytest.approx(k_minus, rel=1e-12, abs=1e-12)
        assert k_plus <= kernel_real(0.0, gamma, h) + 1e-9


class TestRadon:
    def test_row_masses_unit(self):
        for spec, hw in ((StateSpec(kind="vacuum"), 6.0), (StateSpec(kind="cat", q0=3.0), 8.0)):
            grid = analytic_state(spec, hw, 256)
            sino = radon(grid, 16, 300, hw * math.sqrt(2))
            assert np.max(np.abs(sino.row_masses() - 1.0)) < 1e-3

    def test_rows_match_closed_form_densities(self):
        # bilinear ray marching is second-order accurate in the cell size
        for spec, hw, tol in (
            (StateSpec(kind="vacuum"), 6.0, 5e-5),
            (StateSpec(kind="single-photon"), 6.0, 1e-4),
            (StateSpec(kind="cat", q0=3.0), 8.0, 5e-4),
        ):
            grid = analytic_state(spec, hw, 1024)
            sino = radon(grid, 8, 400, hw * math.sqrt(2), step_fraction=0.25)
            for a, phi in enumerate(sino.angles):
                exact = conditional_density(spec, phi, sino.radial_axis)
                assert np.max(np.abs(sino.values[a] - exact)) < tol

    def test_rotation_invariant_state_has_identical_rows(self):
        grid = analytic_state(StateSpec(kind="vacuum"), 6.0, 256)
        sino = radon(grid, 8, 128, 6 * math.sqrt(2))
        assert np.max(np.abs(sino.values - sino.values[0])) < 1e-6

    def test_rejects_nonfinite_grid(self):
        vals = np.zeros((8, 8))
        vals[3, 3] = np.nan
        from qhtomo.states import InvalidStateError

        with pytest.raises(InvalidStateError):
            radon(WignerGrid(2.0, 8, vals), 4, 16, 4.0)

    def test_rejects_short_radial_range(self):
        grid = analytic_state(StateSpec(kind="vacuum"), 6.0, 32)
        with pytest.raises(DomainError):
            radon(grid, 4, 16, 3.0)


class TestFilter:
    def _random_sinogram(self, n_angles=3, n_radial=128, hw=6.0, seed=0):
        rng = np.random.default_rng(seed)
        return Sinogram(n_angles, n_radial, hw, rng.normal(size=(n_angles, n_radial)))

    def test_fft_matches_direct_quadrature(self):
        sino = self._random_sinogram()
        for gamma, h in ((0.0, 0.5), (1 / 36, 0.3), (0.1, 0.45)):
            a = filter_sinogram(sino, gamma, h, method="fft")
            b = filter_sinogram(sino, gamma, h, method="direct")
            scale = np.max(np.abs(a.values))
            assert np.max(np.abs(a.values - b.values)) < 1e-9 * scale

    def test_delta_row_matches_periodized_kernel(self):
        # impulse response = dx * sum of kernel aliases (Poisson summation);
        # the 1/s tail makes the alias sum converge only like 1/M, so use the
        # gamma = 0 closed form and many aliases
        n, hw = 128, 6.0
        vals = np.zeros((1, n))
        vals[0, n // 2] = 1.0
        sino = Sinogram(1, n, hw, vals)
        dx = sino.radial_step
        h = 0.25
        c = 1.0 / h
        out = filter_sinogram(sino, 0.0, h, pad_factor=8).values[0]
        period = 8 * n * dx
        xs = sino.radial_axis - sino.radial_axis[n // 2]
        aliases = np.arange(-20000, 20001)
        pts = xs[:, None] + aliases[None, :] * period
        with np.errstate(invalid="ignore"):
            k = (c * np.sin(c * pts) / pts + (np.cos(c * pts) - 1.0) / pts**2) / math.pi
        k[np.abs(pts) < 1e-12] = c * c / (2.0 * math.pi)
        expect = k.sum(axis=1) * dx
        # aliases shift the peak only slightly relative to the bare kernel
        assert expect[n // 2] == pytest.approx(kernel_real(0.0, 0.0, h) * dx, rel=3e-2)
        assert np.max(np.abs(out - expect)) < 2e-6 * np.max(np.abs(expect))

    def test_cutoff_warning(self):
        sino = self._random_sinogram(n_radial=32)
        with pytest.warns(CutoffUnresolvableWarning):
            filter_sinogram(sino, 0.0, 0.01)

    def test_no_warning_when_resolved(self):
        sino = self._random_sinogram()
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            filter_sinogram(sino, 0.0, 0.5)

    def test_linearity(self):
        a = self._random_sinogram(seed=1)
        b = self._random_sinogram(seed=2)
        summed = Sinogram(a.n_angles, a.n_radial, a.radial_half_width, a.values + b.values)
        fa = filter_sinogram(a, 1 / 36, 0.4).values
        fb = filter_sinogram(b, 1 / 36, 0.4).values
        fs = filter_sinogram(summed, 1 / 36, 0.4).values
        assert np.max(np.abs(fs - fa - fb)) < 1e-10 * np.max(np.abs(fs))


class TestBackproject:
    def test_constant_rows_give_half_value(self):
        # (1/2pi) * (pi/A) * sum_a c = c/2 wherever all projections are in range
        sino = Sinogram(16, 256, 12.0, np.full((16, 256), 3.0))
        grid = backproject(sino, 4.0, 32)
        assert np.max(np.abs(grid.values - 1.5)) < 1e-12

    def test_fbp_roundtrip_vacuum(self):
        spec = StateSpec(kind="vacuum")
        truth = analytic_state(spec, 6.0, 256)
        sino = radon(truth, 256, 256, 6 * math.sqrt(2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutoffUnresolvableWarning)
            filtered = filter_sinogram(sino, 0.0, 1 / 64)
        rec = backproject(filtered, 6.0, 256)
        assert np.max(np.abs(rec.values - truth.values)) < 2e-3

    def test_fbp_roundtrip_single_photon(self):
        spec = StateSpec(kind="single-photon")
        truth = analytic_state(spec, 6.0, 256)
        sino = radon(truth, 256, 256, 6 * math.sqrt(2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutoffUnresolvableWarning)
            filtered = filter_sinogram(sino, 0.0, 1 / 64)
        rec = backproject(filtered, 6.0, 256)
        assert np.max(np.abs(rec.values - truth.values)) < 5e-3

    def test_deterministic_accumulation(self):
        rng = np.random.default_rng(5)
        sino = Sinogram(32, 128, 9.0, rng.normal(size=(32, 128)))
        a = backproject(sino, 6.0, 64).values
        b = backproject(sino, 6.0, 64).values
        assert np.array_equal(a, b)
