"""Characteristic functions F(mu, nu) = Tr(rho exp(i mu q + i nu p)).

Two independent evaluations are provided: from Fock-basis matrix elements of
the displacement operator, and from the position-space kernel rho(x, y) via
F(mu, nu) = int exp(i mu x) rho(x + nu/2, x - nu/2) dx.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.linalg import eigh
from scipy.special import gammaln

from .fock import DensityMatrix, quadrature_ops


class DomainError(ValueError):
    pass


class NumericalDerivativeError(ArithmeticError):
    pass


# ---------------------------------------------------------------- kernels

def hermite_functions(nmax: int, x) -> np.ndarray:
    """Normalized oscillator eigenfunctions psi_0..psi_{nmax-1} on x, shape (nmax, len(x))."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


@dataclass(frozen=True, eq=False)
class PositionKernel:
    """Density matrix rho(x, y) sampled on a uniform grid x."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (x.size, x.size):
            raise ValueError(f"kernel shape {v.shape} does not match grid of {x.size}")
        steps = np.diff(x)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("kernel grid must be uniform")
        herm = np.max(np.abs(v - v.conj().T))
        if herm > 1e-10:
            raise ValueError(f"kernel not Hermitian (deviation {herm:.3e})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def trace(self) -> float:
        return float(np.trapezoid(np.diag(self.values).real, self.x))

    @cached_property
    def _splines(self):
        kw = dict(kx=5, ky=5)
        return (RectBivariateSpline(self.x, self.x, self.values.real, **kw),
                RectBivariateSpline(self.x, self.x, self.values.imag, **kw))

    def __call__(self, x, y) -> np.ndarray:
        """Quintic-spline interpolation of rho(x, y) at scattered points."""
        sr, si = self._splines
        return sr.ev(x, y) + 1j * si.ev(x, y)


def kernel_from_fock(rho: DensityMatrix, x_min=-10.0, x_max=10.0, n_x=1281) -> PositionKernel:
    x = np.linspace(x_min, x_max, n_x)
    psi = hermite_functions(rho.dim, x)
    k = psi.T @ rho.matrix @ psi
    return PositionKernel(x, 0.5 * (k + k.conj().T))


# ---------------------------------------------------------------- Fock route

def displacement_radial(r, N: int) -> np.ndarray:
    """<m|D(r)|n> for real r >= 0, shape (N, N, len(r)).

    D(beta e^{i theta}) has elements <m|D(r)|n> e^{i (m-n) theta}; the real
    radial part is built from generalized Laguerre polynomials with a
    three-term recurrence and log-space prefactors.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = r**2
    out = np.zeros((N, N, r.size))
    logr = np.log(np.where(r > 0, r, 1.0))
    alphas = np.arange(N)[:, None]
    # L_k^(alpha)(x) for all alpha at once, advancing in k
    Lprev = np.zeros((N, r.size))
    Lcur = np.ones((N, r.size))
    for k in range(N):
        if k > 0:
            Lnext = ((2 * k - 1 + alphas - x) * Lcur - (k - 1 + alphas) * Lprev) / k
            Lprev, Lcur = Lcur, Lnext
        for alpha in range(N - k):
            m = k + alpha
            logpref = 0.5 * (gammaln(k + 1) - gammaln(m + 1)) - 0.5 * x
            if alpha:
                logpref = logpref + alpha * logr
                val = np.where(r > 0, np.exp(logpref) * Lcur[alpha], 0.0)
            else:
                val = np.exp(logpref) * Lcur[0]
            out[m, k] = val
            if alpha:
                out[k, m] = (-1) ** alpha * val
    return out


def _diagonal_sums(rho_m: np.ndarray, K: np.ndarray) -> np.ndarray:
    """c_d(r) = sum_{m-n=d} rho_{nm} K_{mn}(r), d = -(N-1)..N-1; shape (2N-1, P)."""
    N = rho_m.shape[0]
    prod = rho_m.T[:, :, None] * K  # [m, n] -> rho_{nm} K_{mn}
    out = np.empty((2 * N - 1, K.shape[2]), dtype=complex)
    for d in range(-(N - 1), N):
        out[d + N - 1] = np.trace(prod, offset=-d, axis1=0, axis2=1)
    return out


def _fock_charfunc(rho_m, mu, nu, chunk=2048):
    mu, nu = np.broadcast_arrays(np.asarray(mu, float), np.asarray(nu, float))
    shape = mu.shape
    # e^{i mu q + i nu p} = D(beta) with beta = (-nu + i mu)/sqrt(2)
    beta = ((-nu + 1j * mu) / np.sqrt(2)).ravel()
    # symmetric grids repeat radii many times; evaluate each radius once
    r, inv = np.unique(np.abs(beta), return_inverse=True)
    N = rho_m.shape[0]
    c = np.empty((2 * N - 1, r.size), dtype=complex)
    for s in range(0, r.size, chunk):
        sl = slice(s, s + chunk)
        c[:, sl] = _diagonal_sums(rho_m, displacement_radial(r[sl], N))
    c = c[:, inv]
    theta = np.angle(beta)
    out = np.zeros(beta.size, dtype=complex)
    for k, d in enumerate(range(-(N - 1), N)):
        out += c[k] * np.exp(1j * d * theta)
    return out.reshape(shape)


def _expm_charfunc(rho_m, mu, nu, pad=40):
    N = rho_m.shape[0]
    big = N + pad
    q, p = (o.entries for o in quadrature_ops(big))
    rho_big = np.zeros((big, big), dtype=complex)
    rho_big[:N, :N] = rho_m
    mu, nu = np.broadcast_arrays(np.asarray(mu, float), np.asarray(nu, float))
    out = np.empty(mu.shape, dtype=complex)
    for idx in np.ndindex(mu.shape):
        lam, V = eigh(mu[idx] * q + nu[idx] * p)
        U = (V * np.exp(1j * lam)) @ V.conj().T
        out[idx] = np.sum(rho_big * U.T)
    return out


def charfunc_from_fock(rho: DensityMatrix, mu, nu, method: str = "displacement"):
    """Tr(rho exp(i mu q + i nu p)).

    method="displacement" uses closed-form displacement matrix elements, exact
    for a state supported on the truncation. method="expm" exponentiates the
    Hermitian matrix mu q + nu p on a padded truncation; it is accurate only
    while |mu|, |nu| stay well inside what the padding resolves.
    """
    if method == "displacement":
        out = _fock_charfunc(rho.matrix, mu, nu)
    elif method == "expm":
        out = _expm_charfunc(rho.matrix, mu, nu)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- kernel route

def charfunc_from_kernel(k: PositionKernel, mu, nu, margin: int = 8):
    mu, nu = np.broadcast_arrays(np.asarray(mu, float), np.asarray(nu, float))
    a, b = k.x[0], k.x[-1]
    dx = k.dx
    limit = (b - a) - 2 * margin * dx
    if np.any(np.abs(nu) > limit):
        raise DomainError(f"|nu| must be <= {limit:.4g} for kernel grid [{a}, {b}]")
    out = np.empty(mu.shape, dtype=complex)
    for idx in np.ndindex(mu.shape):
        half = 0.5 * abs(nu[idx])
        lo, hi = a + half, b - half
        n_pts = int(np.floor((hi - lo) / dx)) + 1
        xs = lo + dx * np.arange(n_pts)
        vals = k(xs + 0.5 * nu[idx], xs - 0.5 * nu[idx])
        out[idx] = np.trapezoid(np.exp(1j * mu[idx] * xs) * vals, xs)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- CharFunction

class CharFunction:
    """F(mu, nu) of a DensityMatrix or PositionKernel source."""

    def __init__(self, source):
        if not isinstance(source, (DensityMatrix, PositionKernel)):
            raise TypeError("source must be a DensityMatrix or PositionKernel")
        self.source = source
        self._grid_cache = {}

    def on_grid(self, grid) -> np.ndarray:
        """F on the square tensor grid grid x grid (indexing mu, nu), cached."""
        g = np.asarray(grid, float)
        key = g.tobytes()
        if key not in self._grid_cache:
            M, Nu = np.meshgrid(g, g, indexing="ij")
            self._grid_cache[key] = self(M, Nu)
        return self._grid_cache[key]

    def __call__(self, mu, nu):
        if isinstance(self.source, DensityMatrix):
            return charfunc_from_fock(self.source, mu, nu)
        return charfunc_from_kernel(self.source, mu, nu)

    def ray(self, t, phi) -> np.ndarray:
        """F(t cos phi, t sin phi) on the outer grid t x phi, shape (len(t), len(phi))."""
        t = np.asarray(t, float)
        phi = np.asarray(phi, float)
        if not isinstance(self.source, DensityMatrix):
            return self(t[:, None] * np.cos(phi), t[:, None] * np.sin(phi))
        # beta = i t e^{i phi}/sqrt(2): the radial part depends on |t| only
        rho_m = self.source.matrix
        N = rho_m.shape[0]
        d = np.arange(-(N - 1), N)
        at, inv = np.unique(np.abs(t), return_inverse=True)
        c = np.empty((2 * N - 1, at.size), dtype=complex)
        for s in range(0, at.size, 2048):
            sl = slice(s, s + 2048)
            c[:, sl] = _diagonal_sums(rho_m, displacement_radial(at[sl] / np.sqrt(2), N))
        c = c[:, inv]  # (2N-1, T)
        sign = np.where(t >= 0, 1j, -1j)
        phase = sign[None, :] ** d[:, None]  # (2N-1, T)
        return (c * phase).T @ np.exp(1j * d[:, None] * phi[None, :])


# ---------------------------------------------------------------- Parseval

# spacing 1/16; wide enough that |F| < 1e-6 at the edge for squeezing r <= 0.5
PARSEVAL_GRID = np.linspace(-14.0, 14.0, 449)


@dataclass(frozen=True)
class ParsevalResult:
    value: complex
    boundary_max: float
    insufficient_domain: bool


def parseval_pair(F1: CharFunction, F2: CharFunction, grid=None) -> ParsevalResult:
    """Tensor-trapezoid quadrature of F1 * conj(F2) over a square (mu, nu) grid."""
    if grid is None:
        grid = PARSEVAL_GRID
    g = np.asarray(grid, float)
    f1 = F1.on_grid(g)
    f2 = F2.on_grid(g)
    edge = np.concatenate([f1[0], f1[-1], f1[:, 0], f1[:, -1],
                           f2[0], f2[-1], f2[:, 0], f2[:, -1]])
    bmax = float(np.max(np.abs(edge)))
    val = np.trapezoid(np.trapezoid(f1 * f2.conj(), g, axis=1), g)
    return ParsevalResult(complex(val), bmax, bmax > 1e-6)


# ---------------------------------------------------------------- derivatives

def central_weights(order: int, accuracy: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and exact central finite-difference weights for d^order/dx^order."""
    if order == 0:
        return np.array([0]), np.array([1.0])
    half = (2 * ((order + 1) // 2) - 1 + accuracy) // 2
    offsets = list(range(-half, half + 1))
    n = len(offsets)
    # solve sum_j w_j s_j^k = order! delta_{k,order}, k = 0..n-1, exactly
    A = [[Fraction(s) ** k for s in offsets] + [Fraction(_fact(order) if k == order else 0)]
         for k in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [vr - f * vc for vr, vc in zip(A[r], A[col])]
    return np.array(offsets), np.array([float(A[k][n]) for k in range(n)])


def _fact(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _mixed_derivative(F, m, n, h, accuracy):
    om, wm = central_weights(m, accuracy)
    on, wn = central_weights(n, accuracy)
    M, Nu = np.meshgrid(om * h, on * h, indexing="ij")
    vals = np.asarray(F(M, Nu))
    return complex(wm @ vals @ wn) / h ** (m + n)


def moment_from_charfunc(F, m: int, n: int, h: float = 0.1, accuracy: int = 6,
                         tol: float = 1e-3) -> float:
    """Symmetrized moment (-i)^(m+n) d^(m+n) F / dmu^m dnu^n at the origin.

    Central differences at steps h and h/2 are combined by one Richardson step.
    """
    if m < 0 or n < 0 or m + n > 8:
        raise ValueError("need 0 <= m + n <= 8")
    if not 0 < h <= 0.5:
        raise ValueError("step h must lie in (0, 0.5]")
    if m + n == 0:
        val = complex(F(0.0, 0.0))
    else:
        d1 = _mixed_derivative(F, m, n, h, accuracy)
        d2 = _mixed_derivative(F, m, n, h / 2, accuracy)
        val = (2**accuracy * d2 - d1) / (2**accuracy - 1)
        if abs(val - d2) > tol * max(1.0, abs(val)):
            raise NumericalDerivativeError(
                f"Richardson step disagrees by {abs(val - d2):.3e} at order ({m}, {n})")
        val *= (-1j) ** (m + n)
    if abs(val.imag) > 1e-6:
        raise NumericalDerivativeError(f"moment has imaginary residue {val.imag:.3e}")
    return float(val.real)
