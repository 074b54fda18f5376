"""Sampling of noisy homodyne measurements (Z, Phi).

The measurement at local-oscillator phase phi follows the quadrature law
p(x | phi) (the Radon transform of the Wigner function); detector losses at
efficiency eta add independent Gaussian noise so the recorded, rescaled value
is Z = X + sqrt(2 gamma) xi with gamma = (1 - eta) / (4 eta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .states import StateSpec, UNIT_MASS, InvalidStateError, fock_eval, joint_density

N_PHI_BINS = 512
N_CDF_POINTS = 4096


class DomainError(ValueError):
    """Parameter outside its admissible range."""


class DensityClampWarning(UserWarning):
    """A tabulated conditional density dipped below zero and was clamped."""


def gamma_from_eta(eta):
    """Noise variance parameter gamma = (1 - eta) / (4 eta)."""
    if not 0.5 < eta <= 1.0:
        raise DomainError(f"eta must lie in (1/2, 1], got {eta}")
    return (1.0 - eta) / (4.0 * eta)


@dataclass(frozen=True)
class NoiseModel:
    """Detection efficiency and the induced Gaussian noise level."""

    eta: float
    gamma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", gamma_from_eta(self.eta))


@dataclass(frozen=True)
class HomodyneDataset:
    """n i.i.d. noisy quadrature records (z_l, phi_l)."""

    z: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    noise: NoiseModel
    seed: int
    state: StateSpec

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if z.ndim != 1 or z.shape != phi.shape:
            raise DomainError("z and phi must be 1-d vectors of equal length")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self):
        return self.z.size


def _quadrature_half_width(state: StateSpec):
    """x-range wide enough that the quadrature density tail is negligible."""
    if state.kind == "fock":
        return math.sqrt(4.0 * state.k + 2.0) + 4.0
    if state.kind == "single-photon":
        return math.sqrt(6.0) + 4.0
    if state.kind == "vacuum":
        return 5.0
    if state.kind == "coherent":
        return math.sqrt(2.0) * abs(state.alpha) + 5.0
    if state.kind == "cat":
        return state.q0 + 5.0
    if state.kind == "matrix":
        return math.sqrt(4.0 * (state.matrix.dim - 1) + 2.0) + 4.0
    raise InvalidStateError(f"unknown state kind {state.kind!r}")


def conditional_density(state: StateSpec, phi, x_grid):
    """Quadrature density p(x | phi) tabulated on x_grid.

    Closed forms where available (Fock states are phase-invariant with
    density psi_k(x)^2; coherent and cat states are Gaussian mixtures plus,
    for the cat, an oscillatory interference term); density-matrix states
    fall back to the numeric joint density. Values below -1e-12 are clamped
    to zero and the table renormalized, with a DensityClampWarning.
    """
    if state.normalization != UNIT_MASS:
        raise InvalidStateError("conditional_density requires unit-mass normalization")
    x = np.asarray(x_grid, dtype=float)
    if state.kind == "vacuum" or (state.kind == "fock" and state.k == 0):
        vals = np.exp(-x * x) / math.sqrt(math.pi)
    elif state.kind == "single-photon" or (state.kind == "fock" and state.k == 1):
        vals = 2.0 * x * x * np.exp(-x * x) / math.sqrt(math.pi)
    elif state.kind == "fock":
        psi = fock_eval(state.k, x)
        vals = psi * psi
    elif state.kind == "coherent":
        mu = math.sqrt(2.0) * (state.alpha * np.exp(-1j * phi)).real
        vals = np.exp(-((x - mu) ** 2)) / math.sqrt(math.pi)
    elif state.kind == "cat":
        q0, c, s = state.q0, math.cos(phi), math.sin(phi)
        rt = math.sqrt(math.pi)
        vals = (
            0.5 * rt * np.exp(-((x - q0 * c) ** 2))
            + 0.5 * rt * np.exp(-((x + q0 * c) ** 2))
            + rt * math.exp(-(q0 * c) ** 2) * np.cos(2.0 * q0 * s * x) * np.exp(-x * x)
        ) / (math.pi * (1.0 + math.exp(-q0 * q0)))
    elif state.kind == "matrix":
        vals = math.pi * joint_density(state.matrix, x, phi)
    else:
        raise InvalidStateError(f"unknown state kind {state.kind!r}")
    if vals.min() < 0.0:
        if vals.min() < -1e-12:
            warnings.warn(
                f"conditional density clamped: min {vals.min():.3e} at phi={phi:.4f}",
                DensityClampWarning,
                stacklevel=2,
            )
        vals = np.clip(vals, 0.0, None)
        mass = np.trapezoid(vals, x)
        if mass > 0.0:
            vals = vals / mass
    return vals


class _SamplingTable:
    """Per-angle-bin inverse-CDF tables for a state's quadrature law."""

    def __init__(self, state: StateSpec):
        self.state = state
        hw = _quadrature_half_width(state)
        self.xs = np.linspace(-hw, hw, N_CDF_POINTS)
        dx = self.xs[1] - self.xs[0]
        phase_invariant = state.kind in ("vacuum", "single-photon", "fock")
        n_rows = 1 if phase_invariant else N_PHI_BINS
        self.cdfs = np.empty((n_rows, N_CDF_POINTS))
        for b in range(n_rows):
            phi_b = math.pi * (b + 0.5) / N_PHI_BINS
            dens = conditional_density(state, phi_b, self.xs)
            cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * dx)))
            self.cdfs[b] = cdf / cdf[-1]
        self.phase_invariant = phase_invariant

    def draw(self, phi, u):
        bins = np.minimum((phi * (N_PHI_BINS / math.pi)).astype(np.int64), N_PHI_BINS - 1)
        if self.phase_invariant:
            return np.interp(u, self.cdfs[0], self.xs)
        x = np.empty_like(u)
        for b in np.unique(bins):
            mask = bins == b
            x[mask] = np.interp(u[mask], self.cdfs[b], self.xs)
        return x


_TABLE_CACHE: dict[str, _SamplingTable] = {}


def _table_for(state: StateSpec):
    if state.kind == "matrix":
        return _SamplingTable(state)
    key = state.to_json()
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = _SamplingTable(state)
    return _TABLE_CACHE[key]


def sample_homodyne(state: StateSpec, n, eta, seed):
    """Draw n noisy homodyne records, reproducible from seed.

    Phi ~ Uniform[0, pi]; X from the per-angle-bin inverse-CDF table of
    p(x | phi); Z = X + sqrt(2 gamma) xi. The counter-based generator and the
    fixed draw order (phi, u, xi as whole vectors) make the dataset a pure
    function of (state, n, eta, seed).
    """
    if n < 1:
        raise DomainError(f"need n >= 1 samples, got {n}")
    noise = NoiseModel(eta)
    table = _table_for(state)
    rng = np.random.Generator(np.random.Philox(np.uint64(seed)))
    phi = rng.uniform(0.0, math.pi, n)
    u = rng.random(n)
    xi = rng.standard_normal(n)
    x = table.draw(phi, u)
    z = x + math.sqrt(2.0 * noise.gamma) * xi
    return HomodyneDataset(z=z, phi=phi, noise=noise, seed=int(seed), state=state)
