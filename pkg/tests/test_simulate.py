"""Noise model, conditional densities, and homodyne sampling."""

import math

import numpy as np
import pytest
from scipy import stats

from qhtomo.simulate import (
    DomainError,
    HomodyneDataset,
    NoiseModel,
    conditional_density,
    gamma_from_eta,
    sample_homodyne,
)
from qhtomo.states import RAW_CLOSED_FORM, DensityMatrix, InvalidStateError, StateSpec


class TestNoiseModel:
    def test_gamma_examples(self):
        assert gamma_from_eta(0.9) == pytest.approx(1.0 / 36.0, rel=1e-15)
        assert gamma_from_eta(1.0) == 0.0
        assert gamma_from_eta(0.8) == pytest.approx(1.0 / 16.0, rel=1e-15)

    @pytest.mark.parametrize("eta", [0.5, 0.4, 0.0, 1.2, -1.0])
    def test_eta_domain(self, eta):
        with pytest.raises(DomainError):
            gamma_from_eta(eta)

    def test_noise_model_derives_gamma(self):
        nm = NoiseModel(0.9)
        assert nm.gamma == pytest.approx(1.0 / 36.0, rel=1e-15)
        with pytest.raises(Exception):
            nm.eta = 0.8  # frozen

    def test_dataset_shape_check(self):
        with pytest.raises(DomainError):
            HomodyneDataset(
                z=np.zeros(3),
                phi=np.zeros(4),
                noise=NoiseModel(0.9),
                seed=0,
                state=StateSpec(kind="vacuum"),
            )


class TestConditionalDensity:
    def test_vacuum_closed_form(self):
        x = np.linspace(-4, 4, 101)
        dens = conditional_density(StateSpec(kind="vacuum"), 0.3, x)
        assert np.allclose(dens, np.exp(-x * x) / math.sqrt(math.pi), rtol=1e-14)

    def test_phase_invariant_states(self):
        x = np.linspace(-5, 5, 201)
        for spec in (StateSpec(kind="single-photon"), StateSpec(kind="fock", k=3)):
            a = conditional_density(spec, 0.1, x)
            b = conditional_density(spec, 2.7, x)
            assert np.array_equal(a, b)

    def test_single_photon_closed_form(self):
        x = np.linspace(-5, 5, 201)
        dens = conditional_density(StateSpec(kind="single-photon"), 1.0, x)
        assert np.allclose(dens, 2 * x * x * np.exp(-x * x) / math.sqrt(math.pi), rtol=1e-13)

    def test_coherent_mean_shift(self):
        x = np.linspace(-8, 8, 3201)
        alpha = 2.0 + 0.5j
        for phi in (0.0, 0.7, 2.2):
            dens = conditional_density(StateSpec(kind="coherent", alpha=alpha), phi, x)
            mean = np.trapezoid(x * dens, x)
            expect = math.sqrt(2.0) * (alpha * np.exp(-1j * phi)).real
            assert mean == pytest.approx(expect, abs=1e-10)

    def test_unit_mass_all_kinds(self):
        x = np.linspace(-12, 12, 8001)
        specs = [
            StateSpec(kind="vacuum"),
            StateSpec(kind="single-photon"),
            StateSpec(kind="fock", k=4),
            StateSpec(kind="coherent", alpha=1.5 - 1.0j),
            StateSpec(kind="cat", q0=3.0),
            StateSpec(kind="matrix", matrix=DensityMatrix.fock(2)),
        ]
        for spec in specs:
            for phi in (0.2, 1.4):
                mass = np.trapezoid(conditional_density(spec, phi, x), x)
                assert mass == pytest.approx(1.0, abs=1e-6), spec.kind

    def test_matrix_vacuum_matches_closed_form(self):
        x = np.linspace(-5, 5, 401)
        spec = StateSpec(kind="matrix", matrix=DensityMatrix.vacuum())
        dens = conditional_density(spec, 0.9, x)
        assert np.max(np.abs(dens - np.exp(-x * x) / math.sqrt(math.pi))) < 1e-10

    def test_requires_unit_mass_normalization(self):
        spec = StateSpec(kind="vacuum", normalization=RAW_CLOSED_FORM)
        with pytest.raises(InvalidStateError):
            conditional_density(spec, 0.0, np.linspace(-4, 4, 11))

    def test_nonnegative(self):
        x = np.linspace(-9, 9, 2001)
        dens = conditional_density(StateSpec(kind="cat", q0=3.0), 1.3, x)
        assert dens.min() >= 0.0


class TestSampling:
    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            sample_homodyne(StateSpec(kind="vacuum"), 0, 0.9, 1)

    def test_deterministic_and_seed_sensitive(self):
        spec = StateSpec(kind="single-photon")
        a = sample_homodyne(spec, 500, 0.9, 7)
        b = sample_homodyne(spec, 500, 0.9, 7)
        c = sample_homodyne(spec, 500, 0.9, 8)
        assert np.array_equal(a.z, b.z) and np.array_equal(a.phi, b.phi)
        assert not np.array_equal(a.z, c.z)

    def test_noise_is_additive_on_shared_draws(self):
        # eta = 1 and eta < 1 at the same seed share phi, u, xi, so the
        # difference isolates the Gaussian noise term
        spec = StateSpec(kind="vacuum")
        clean = sample_homodyne(spec, 50_000, 1.0, 11)
        noisy = sample_homodyne(spec, 50_000, 0.9, 11)
        assert np.array_equal(clean.phi, noisy.phi)
        xi = (noisy.z - clean.z) / math.sqrt(2.0 / 36.0)
        assert abs(xi.mean()) < 3.0 / math.sqrt(xi.size)
        assert xi.var() == pytest.approx(1.0, abs=3.0 * math.sqrt(2.0 / xi.size))

    def test_phi_uniform(self):
        data = sample_homodyne(StateSpec(kind="vacuum"), 20_000, 0.9, 3)
        assert data.phi.min() >= 0.0 and data.phi.max() <= math.pi
        p = stats.kstest(data.phi / math.pi, "uniform").pvalue
        assert p > 1e-4

    def test_vacuum_moments(self):
        n = 200_000
        data = sample_homodyne(StateSpec(kind="vacuum"), n, 0.9, 5)
        var_expect = 0.5 + 2.0 / 36.0
        assert abs(data.z.mean()) < 3.0 * math.sqrt(var_expect / n)
        assert data.z.var() == pytest.approx(var_expect, abs=3.0 * var_expect * math.sqrt(2.0 / n))

    def test_characteristic_function_noise_factor(self):
        # E exp(itZ) = E exp(itX) * exp(-gamma t^2) for vacuum: exp(-(1/4+gamma) t^2)
        n = 200_000
        gamma = 1.0 / 36.0
        data = sample_homodyne(StateSpec(kind="vacuum"), n, 0.9, 9)
        for t in (1.0, 2.0, 4.0):
            emp = np.exp(1j * t * data.z).mean()
            expect = math.exp(-(0.25 + gamma) * t * t)
            se = math.sqrt(max(1.0 - expect * expect, 1e-12) / n)
            assert abs(emp - expect) < 5.0 * se + 5e-4

    def test_coherent_mean_tracks_angle(self):
        alpha = 2.0
        data = sample_homodyne(StateSpec(kind="coherent", alpha=alpha), 100_000, 1.0, 13)
        edges = np.linspace(0.0, math.pi, 9)
        for lo, hi in zip(edges[:-1], edges[1:]):
            mask = (data.phi >= lo) & (data.phi < hi)
            phis = data.phi[mask]
            expect = math.sqrt(2.0) * alpha * np.cos(phis).mean()
            se = 1.0 / math.sqrt(2.0 * mask.sum())
            # the cos average varies inside the bin; allow for that spread too
            spread = math.sqrt(2.0) * alpha * np.cos(phis).std() / math.sqrt(mask.sum())
            assert abs(data.z[mask].mean() - expect) < 4.0 * (se + spread) + 0.02

    def test_single_photon_density_goodness_of_fit(self):
        # phase-invariant state: Z has density (p(.|phi) * N(0, 2 gamma))(z),
        # independent of phi; chi-square on equal-probability bins
        n = 100_000
        gamma = 1.0 / 36.0
        data = sample_homodyne(StateSpec(kind="single-photon"), n, 0.9, 17)
        xs = np.linspace(-9.0, 9.0, 6001)
        dens = conditional_density(StateSpec(kind="single-photon"), 0.0, xs)
        sd = math.sqrt(2.0 * gamma)
        kern = stats.norm.pdf(xs, scale=sd)
        dx = xs[1] - xs[0]
        conv = np.convolve(dens, kern, mode="same") * dx
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (conv[1:] + conv[:-1]) * dx)))
        cdf /= cdf[-1]
        n_bins = 40
        edges = np.interp(np.linspace(0.0, 1.0, n_bins + 1), cdf, xs)
        counts, _ = np.histogram(data.z, bins=edges)
        assert counts.sum() == n
        p = stats.chisquare(counts, np.full(n_bins, n / n_bins)).pvalue
        assert p > 1e-3

    def test_cat_symmetry(self):
        # the even cat state has a symmetric quadrature law at every angle
        data = sample_homodyne(StateSpec(kind="cat", q0=3.0), 100_000, 0.9, 21)
        assert abs(data.z.mean()) < 0.05
        assert abs(stats.skew(data.z)) < 0.05
