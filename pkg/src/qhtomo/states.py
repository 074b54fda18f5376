"""Fock-basis machinery and the analytic test states.

Everything phase-space related lives on square grids centered at the origin
(`WignerGrid`); density matrices are truncated to a finite Fock dimension and
validated (Hermitian, unit trace, Gershgorin lower bounds as a cheap PSD
surrogate).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_FOCK_ORDER = 512
DEFAULT_TRUNCATION = 64

_HERMITIAN_TOL = 0.0          # stored entries must match conj-transpose exactly
_TRACE_TOL = 1e-9
_GERSHGORIN_TOL = 1e-9
_IMAG_RESIDUE_TOL = 1e-9


class UnsupportedOrderError(ValueError):
    """Fock order outside the guarded range."""


class NonHermitianInputError(ValueError):
    """Matrix input whose imaginary residue exceeds tolerance."""


class InvalidStateError(ValueError):
    """Object violating a density-matrix / density invariant."""


class ResolutionError(ValueError):
    """Tabulated input too coarse for the requested operation."""


# ---------------------------------------------------------------------------
# Fock functions and polynomials


def fock_eval(j, xs):
    """Evaluate the j-th Hermite-Gaussian basis function at the given points.

    Uses the normalized three-term recurrence
    ``psi_{j+1} = (sqrt(2) x psi_j - sqrt(j) psi_{j-1}) / sqrt(j+1)``
    starting from ``psi_0(x) = pi**-0.25 * exp(-x**2 / 2)``, which stays
    finite for all supported orders (no explicit factorials).
    """
    return fock_eval_all(j, xs)[-1]


def fock_eval_all(jmax, xs):
    """All basis functions up to order `jmax`, shape (jmax+1, len(xs))."""
    if jmax < 0:
        raise UnsupportedOrderError(f"Fock order must be >= 0, got {jmax}")
    if jmax > MAX_FOCK_ORDER:
        raise UnsupportedOrderError(
            f"Fock order {jmax} exceeds supported maximum {MAX_FOCK_ORDER}"
        )
    x = np.asarray(xs, dtype=float)
    out = np.empty((jmax + 1,) + x.shape, dtype=float)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if jmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(1, jmax):
        out[j + 1] = (math.sqrt(2.0) * x * out[j] - math.sqrt(j) * out[j - 1]) / math.sqrt(j + 1)
    return out


def genlaguerre_eval(k, alpha, x):
    """Generalized Laguerre polynomial L_k^alpha via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if k == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = 1.0 + alpha - x
    for i in range(1, k):
        prev, cur = cur, ((2 * i + 1 + alpha - x) * cur - (i + alpha) * prev) / (i + 1)
    return cur


def _ratio_sqrt_factorial(k, j):
    """sqrt(k! / j!) for j >= k, computed multiplicatively."""
    out = 1.0
    for m in range(k + 1, j + 1):
        out /= math.sqrt(m)
    return out


# ---------------------------------------------------------------------------
# Wigner basis functions


def wigner_basis(j, k, q, p):
    """Wigner transform of the Fock-basis dyad |j><k| at a phase-space point.

    For j >= k:
    ``W_{j,k}(q,p) = ((-1)^j / pi) sqrt(k!/j!) (sqrt(2)(ip - q))^{j-k}
    exp(-(q^2+p^2)) L_k^{j-k}(2 q^2 + 2 p^2)``; for j < k the value is the
    conjugate with the indices swapped.
    """
    if j < 0 or k < 0:
        raise UnsupportedOrderError("indices must be non-negative")
    if j < k:
        return np.conj(wigner_basis(k, j, q, p))
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    d = j - k
    r2 = q * q + p * p
    pref = ((-1) ** j / np.pi) * _ratio_sqrt_factorial(k, j)
    poly = genlaguerre_eval(k, d, 2.0 * r2)
    val = np.asarray(pref * (math.sqrt(2.0) * (1j * p - q)) ** d * np.exp(-r2) * poly, dtype=complex)
    if d == 0:
        val = val.real + 0j
    return complex(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# Pattern functions


def pattern_fourier(j, k, t):
    """Fourier transform of the pattern function f_{j,k}; symmetric in (j,k)."""
    if j < 0 or k < 0:
        raise UnsupportedOrderError("indices must be non-negative")
    if j < k:
        j, k = k, j
    t = np.asarray(t, dtype=float)
    d = j - k
    pref = np.pi * (-1j) ** d * 2.0 ** (-0.5 * d) * _ratio_sqrt_factorial(k, j)
    val = pref * np.abs(t) * t ** d * np.exp(-0.25 * t * t) * genlaguerre_eval(k, d, 0.5 * t * t)
    if val.ndim == 0:
        return complex(val)
    return val


def l_jk(j, k, t):
    """Radial envelope of W_{j,k}: value of |W_{j,k}| at radius t, t >= 0."""
    if j < k:
        j, k = k, j
    t = np.asarray(t, dtype=float)
    d = j - k
    pref = 2.0 ** (0.5 * d) / np.pi * _ratio_sqrt_factorial(k, j)
    val = pref * t ** d * np.exp(-t * t) * np.abs(genlaguerre_eval(k, d, 2.0 * t * t))
    return float(val) if val.ndim == 0 else val


@lru_cache(maxsize=256)
def _pattern_position_fine(j, k):
    """Pattern function f_{j,k} on a fine uniform x-grid, via inverse FFT.

    The Fourier-domain form is sampled on |t| <= 40 with step 1/512 and
    zero-padded so the output spacing resolves the fastest oscillation.
    Returns (x_grid, values).
    """
    dt = 1.0 / 512.0
    t_half = 40.0
    m = int(round(t_half / dt))
    n_fft = 1 << 21  # zero-padded; output spacing 2*pi/(n_fft*dt) ~ 1.5e-3
    t = (np.arange(n_fft) - n_fft // 2) * dt
    ft = np.zeros(n_fft, dtype=complex)
    sel = slice(n_fft // 2 - m, n_fft // 2 + m + 1)
    ft[sel] = pattern_fourier(j, k, t[sel])
    # f(x) = (1/2pi) * integral f~(t) exp(+i t x) dt; the sign pairs with the
    # exp(+i (j-k) phi) phase in reconstruct_rho_entry and is fixed by the
    # coherent-state round-trip test.
    spec = np.fft.ifft(np.fft.ifftshift(ft)) * n_fft * dt / (2.0 * np.pi)
    x = np.fft.fftfreq(n_fft, d=dt) * 2.0 * np.pi
    order = np.argsort(x)
    x, spec = x[order], spec[order]
    keep = np.abs(x) <= 15.0  # pattern functions decay; cache only the useful window
    return x[keep], spec[keep]


def pattern_position(j, k, xs):
    """Position-space pattern function f_{j,k}(x), real for all (j,k)."""
    grid = _pattern_position_fine(j, k)
    x_fine, f_fine = grid
    xs = np.asarray(xs, dtype=float)
    re = np.interp(xs, x_fine, f_fine.real)
    im = np.interp(xs, x_fine, f_fine.imag)
    return re + 1j * im


# ---------------------------------------------------------------------------
# Density matrices


@dataclass(frozen=True)
class DensityMatrix:
    """Truncated density matrix in the Fock basis."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=complex)
        if ent.shape != (self.dim, self.dim):
            raise InvalidStateError(f"entries must be {self.dim}x{self.dim}")
        object.__setattr__(self, "entries", ent)
        if not np.array_equal(ent, ent.conj().T):
            raise NonHermitianInputError("density matrix must be Hermitian as stored")
        tr = float(np.trace(ent).real)
        if abs(tr - 1.0) > _TRACE_TOL:
            raise InvalidStateError(f"trace {tr} deviates from 1 beyond {_TRACE_TOL}")
        # Cheap PSD surrogate first; the Gershgorin bound is loose for states
        # with broad off-diagonal support (e.g. coherent states), so fall back
        # to the exact eigenvalue check before rejecting.
        if gershgorin_margin(ent) < -_GERSHGORIN_TOL:
            if float(np.linalg.eigvalsh(ent).min()) < -_GERSHGORIN_TOL:
                raise InvalidStateError("density matrix is not positive semi-definite")

    @staticmethod
    def _hermitize(mat):
        mat = np.asarray(mat, dtype=complex)
        sym = 0.5 * (mat + mat.conj().T)
        return sym / np.trace(sym).real

    @classmethod
    def vacuum(cls, dim=DEFAULT_TRUNCATION):
        ent = np.zeros((dim, dim), dtype=complex)
        ent[0, 0] = 1.0
        return cls(dim, ent)

    @classmethod
    def fock(cls, k, dim=None):
        if k < 0:
            raise UnsupportedOrderError("photon number must be >= 0")
        if dim is None:
            dim = max(DEFAULT_TRUNCATION, k + 1)
        if k >= dim:
            raise InvalidStateError(f"fock({k}) does not fit in dimension {dim}")
        ent = np.zeros((dim, dim), dtype=complex)
        ent[k, k] = 1.0
        return cls(dim, ent)

    @classmethod
    def coherent(cls, alpha, dim=None):
        """Coherent state rho_{j,k} = exp(-|a|^2) a^j conj(a)^k / sqrt(j! k!).

        Truncation picked so the dropped Poisson tail mass is below 1e-10,
        then the trace is renormalized.
        """
        alpha = complex(alpha)
        mean = abs(alpha) ** 2
        if dim is None:
            dim = DEFAULT_TRUNCATION
            while _poisson_tail(mean, dim) > 1e-10:
                dim += 16
        j = np.arange(dim)
        log_amp = -0.5 * mean + j * np.log(abs(alpha)) - 0.5 * _log_factorial(j) if mean > 0 else None
        if mean == 0:
            return cls.vacuum(dim)
        amp = np.exp(log_amp) * np.exp(1j * np.angle(alpha) * j)
        # exact symmetrization: the outer product is Hermitian analytically
        # but not always bit-for-bit in floating point
        ent = cls._hermitize(np.outer(amp, amp.conj()))
        return cls(dim, ent)


def _log_factorial(n):
    from scipy.special import gammaln

    return gammaln(np.asarray(n, dtype=float) + 1.0)


def _poisson_tail(mean, n):
    """P(N >= n) for N ~ Poisson(mean)."""
    from scipy.stats import poisson

    return float(poisson.sf(n - 1, mean))


def gershgorin_margin(mat):
    """Worst-case Gershgorin lower bound rho_jj - sum_{k != j} |rho_jk|."""
    mat = np.asarray(mat, dtype=complex)
    diag = np.diag(mat).real
    offsums = np.abs(mat).sum(axis=1) - np.abs(np.diag(mat))
    return float(np.min(diag - offsums))


# ---------------------------------------------------------------------------
# State specifications and phase-space grids

RAW_CLOSED_FORM = "raw-closed-form"
UNIT_MASS = "unit-mass"

_CLOSED_FORM_KINDS = ("vacuum", "fock", "coherent", "single-photon", "cat")


@dataclass(frozen=True)
class StateSpec:
    """Target state of a tomography run.

    kind is one of vacuum | fock | coherent | single-photon | cat | matrix.
    The raw-closed-form normalization keeps the textbook closed forms
    literally; unit-mass divides by their plane integral so the Wigner
    function integrates to 1.
    """

    kind: str
    k: int | None = None
    alpha: complex | None = None
    q0: float | None = None
    matrix: DensityMatrix | None = None
    normalization: str = UNIT_MASS

    def __post_init__(self):
        if self.kind not in _CLOSED_FORM_KINDS + ("matrix",):
            raise InvalidStateError(f"unknown state kind {self.kind!r}")
        if self.normalization not in (RAW_CLOSED_FORM, UNIT_MASS):
            raise InvalidStateError(f"unknown normalization {self.normalization!r}")
        if self.kind == "fock" and (self.k is None or self.k < 0):
            raise InvalidStateError("fock state requires k >= 0")
        if self.kind == "cat" and (self.q0 is None or self.q0 <= 0):
            raise InvalidStateError("cat state requires q0 > 0")
        if self.kind == "coherent" and self.alpha is None:
            raise InvalidStateError("coherent state requires alpha")
        if self.kind == "matrix" and self.matrix is None:
            raise InvalidStateError("matrix state requires a DensityMatrix")

    def to_json(self):
        obj = {"kind": self.kind, "normalization": self.normalization}
        if self.kind == "fock":
            obj["k"] = int(self.k)
        elif self.kind == "coherent":
            obj["alpha"] = [self.alpha.real, self.alpha.imag]
        elif self.kind == "cat":
            obj["q0"] = float(self.q0)
        elif self.kind == "matrix":
            raise InvalidStateError("matrix states serialize via their own file format")
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text) if isinstance(text, str) else dict(text)
        kind = obj["kind"]
        kwargs = {"normalization": obj.get("normalization", UNIT_MASS)}
        if kind == "fock":
            kwargs["k"] = int(obj["k"])
        elif kind == "coherent":
            re, im = obj["alpha"]
            kwargs["alpha"] = complex(re, im)
        elif kind == "cat":
            kwargs["q0"] = float(obj["q0"])
        return cls(kind=kind, **kwargs)


@dataclass(frozen=True)
class WignerGrid:
    """Square real field over phase space, sampled at cell centers."""

    half_width: float
    n_points: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.n_points, self.n_points):
            raise InvalidStateError("values must be a square n_points x n_points array")
        object.__setattr__(self, "values", vals)
        if self.half_width <= 0 or self.n_points < 1:
            raise InvalidStateError("grid must have positive extent and size")

    @property
    def axis(self):
        step = 2.0 * self.half_width / self.n_points
        return -self.half_width + (np.arange(self.n_points) + 0.5) * step

    @property
    def step(self):
        return 2.0 * self.half_width / self.n_points

    def meshgrid(self):
        q = self.axis
        return np.meshgrid(q, q, indexing="ij")

    def integral(self):
        """Trapezoid integral over the cell-center lattice."""
        ax = self.axis
        return float(np.trapezoid(np.trapezoid(self.values, ax, axis=1), ax))

    def same_geometry(self, other):
        return self.n_points == other.n_points and math.isclose(self.half_width, other.half_width)


def grid_from_function(fn, half_width, n_points):
    g = WignerGrid(half_width, n_points, np.zeros((n_points, n_points)))
    Q, P = g.meshgrid()
    return WignerGrid(half_width, n_points, np.asarray(fn(Q, P), dtype=float))


# Plane integrals of the raw closed forms; used by the unit-mass
# variants and pinned by quadrature oracles in the tests.
def single_photon_mass():
    return np.pi


def cat_mass(q0):
    return np.pi * (1.0 + np.exp(-q0 * q0))


def analytic_wigner(spec: StateSpec, q, p):
    """Closed-form Wigner function of `spec` at (q, p) arrays."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    r2 = q * q + p * p
    if spec.kind == "vacuum":
        return np.exp(-r2) / np.pi
    if spec.kind == "fock":
        k = spec.k
        return ((-1) ** k / np.pi) * genlaguerre_eval(k, 0, 2.0 * r2) * np.exp(-r2)
    if spec.kind == "coherent":
        q0 = math.sqrt(2.0) * spec.alpha.real
        p0 = math.sqrt(2.0) * spec.alpha.imag
        return np.exp(-((q - q0) ** 2 + (p - p0) ** 2)) / np.pi
    if spec.kind == "single-photon":
        w = -(1.0 - 2.0 * r2) * np.exp(-r2)
        return w / single_photon_mass() if spec.normalization == UNIT_MASS else w
    if spec.kind == "cat":
        q0 = spec.q0
        w = (
            0.5 * np.exp(-((q - q0) ** 2) - p * p)
            + 0.5 * np.exp(-((q + q0) ** 2) - p * p)
            + np.cos(2.0 * q0 * p) * np.exp(-r2)
        )
        return w / cat_mass(q0) if spec.normalization == UNIT_MASS else w
    raise InvalidStateError(f"no closed form for kind {spec.kind!r}")


def analytic_state(spec: StateSpec, half_width, n_points):
    """Wigner grid of a closed-form state; matrix specs route to wigner_from_matrix."""
    if spec.kind == "matrix":
        return wigner_from_matrix(spec.matrix, half_width, n_points)
    return grid_from_function(lambda q, p: analytic_wigner(spec, q, p), half_width, n_points)


def wigner_from_matrix(rho: DensityMatrix, half_width, n_points):
    """W(q,p) = sum_{j,k} rho_{j,k} W_{j,k}(q,p) on the grid.

    Grouped by the diagonal offset d = j - k so each offset needs one Laguerre
    recurrence sweep over the grid.
    """
    g = WignerGrid(half_width, n_points, np.zeros((n_points, n_points)))
    Q, P = g.meshgrid()
    r2 = Q * Q + P * P
    b = math.sqrt(2.0) * (1j * P - Q)
    expf = np.exp(-r2)
    n = rho.dim
    total = np.zeros((n_points, n_points), dtype=complex)
    x = 2.0 * r2
    for d in range(n):
        coeffs = np.array([rho.entries[k + d, k] for k in range(n - d)])
        if not np.any(coeffs):
            continue
        # Laguerre recurrence in k for fixed order d, accumulating as we go.
        acc = np.zeros_like(total)
        prev = np.ones_like(r2)
        cur = 1.0 + d - x
        for k in range(n - d):
            poly = prev if k == 0 else cur
            if coeffs[k] != 0:
                j = k + d
                pref = ((-1) ** j / np.pi) * _ratio_sqrt_factorial(k, j)
                acc += coeffs[k] * pref * poly
            if k >= 1:
                i = k
                prev, cur = cur, ((2 * i + 1 + d - x) * cur - (i + d) * prev) / (i + 1)
        term = acc * (b ** d) * expf
        total += term if d == 0 else term + np.conj(term)
    resid = float(np.max(np.abs(total.imag)))
    if resid > _IMAG_RESIDUE_TOL:
        raise NonHermitianInputError(f"imaginary residue {resid:.3e} exceeds tolerance")
    return WignerGrid(half_width, n_points, total.real)


# ---------------------------------------------------------------------------
# Joint density of (X, Phi) and matrix reconstruction


def joint_density(rho: DensityMatrix, x, phi):
    """Joint density p_rho(x, phi) of an ideal quadrature measurement.

    ``p = (1/pi) sum_{j,k} rho_{j,k} psi_j(x) psi_k(x) exp(-i (j-k) phi)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = fock_eval_all(rho.dim - 1, x)
    total = np.zeros(x.shape, dtype=complex)
    for d in range(rho.dim):
        coeffs = np.array([rho.entries[k + d, k] for k in range(rho.dim - d)])
        if not np.any(coeffs):
            continue
        gsum = np.einsum("k,kx,kx->x", coeffs, psi[d:], psi[: rho.dim - d])
        term = gsum * np.exp(-1j * d * phi)
        total += term if d == 0 else term + np.conj(term)
    resid = float(np.max(np.abs(total.imag)))
    if resid > _IMAG_RESIDUE_TOL:
        raise NonHermitianInputError(f"imaginary residue {resid:.3e} exceeds tolerance")
    dens = total.real / np.pi
    if float(np.min(dens)) < -_IMAG_RESIDUE_TOL:
        raise InvalidStateError("joint density negative beyond tolerance")
    return dens


@dataclass(frozen=True)
class JointDensityTable:
    """Tabulated joint density over an (x, phi) product grid."""

    x: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # shape (len(phi), len(x))


def tabulate_joint_density(rho: DensityMatrix, x_grid, phi_grid):
    x_grid = np.asarray(x_grid, dtype=float)
    phi_grid = np.asarray(phi_grid, dtype=float)
    vals = np.stack([joint_density(rho, x_grid, phi) for phi in phi_grid])
    return JointDensityTable(x_grid, phi_grid, vals)


def reconstruct_rho_entry(table: JointDensityTable, j, k):
    """Quadrature of rho_{j,k} = int p(x,phi) f_{j,k}(x) exp(i (j-k) phi) dx dphi."""
    x, phi = table.x, table.phi
    if x.min() > -10.0 + 1e-9 or x.max() < 10.0 - 1e-9 or np.max(np.diff(x)) > 0.01 + 1e-9:
        raise ResolutionError("x table must cover |x| <= 10 with step <= 0.01")
    if len(phi) < 180:
        raise ResolutionError("phi table must have at least 180 nodes on [0, pi]")
    f = pattern_position(j, k, x)
    inner = np.trapezoid(table.values * f[None, :], x, axis=1)
    val = np.trapezoid(inner * np.exp(1j * (j - k) * phi), phi)
    return complex(val)


# ---------------------------------------------------------------------------
# Smoothness-class membership


def matrix_class_margin(rho: DensityMatrix, C, B, r):
    """Entrywise check |rho_{m,n}| <= C exp(-B (m+n)^{r/2}).

    Returns (member, margin) where margin is the worst-case bound minus
    entry magnitude (negative when the check fails).
    """
    m, n = np.meshgrid(np.arange(rho.dim), np.arange(rho.dim), indexing="ij")
    bound = C * np.exp(-B * (m + n).astype(float) ** (r / 2.0))
    margin = float(np.min(bound - np.abs(rho.entries)))
    return margin >= 0.0, margin


def wigner_class_margin(grid: WignerGrid, beta, r, L):
    """Fourier-side check int |f~|^2 exp(2 beta |.|^r) <= (2 pi)^2 L.

    The transform is approximated by an FFT quadrature of the grid; only the
    magnitude of the transform enters, so grid phase offsets are irrelevant.
    """
    n = grid.n_points
    step = grid.step
    ft = np.fft.fft2(grid.values) * step * step
    u = 2.0 * np.pi * np.fft.fftfreq(n, d=step)
    U, V = np.meshgrid(u, u, indexing="ij")
    w = np.sqrt(U * U + V * V)
    du = u[1] - u[0] if n > 1 else 1.0
    # Work in log space: the weight explodes where the transform magnitude
    # underflows, and 0 * inf must resolve to 0, not nan.
    mag = np.abs(ft)
    # Transform magnitudes below double-precision resolution are quadrature
    # noise, not signal; the exponential weight would amplify that floor into
    # garbage, so they are treated as exact zeros.
    floor = 1e-12 * float(mag.max())
    mag = np.where(mag > floor, mag, 0.0)
    with np.errstate(divide="ignore"):
        log_term = 2.0 * np.log(mag) + 2.0 * beta * w ** r
    integral = float(np.sum(np.exp(np.minimum(log_term, 700.0))) * du * du)
    margin = (2.0 * np.pi) ** 2 * L - integral
    return margin >= 0.0, margin
