"""Wigner functions and optical tomograms.

Forward routes: the Fourier route w(X, phi) = (1/2pi) int exp(-itX) F(t cos phi, t sin phi) dt
(reference) and the Radon transform of the Wigner function (cross-check).
The inverse Radon transform is filtered back-projection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .charfunc import CharFunction, DomainError, PositionKernel, hermite_functions, kernel_from_fock
from .fock import DensityMatrix

# odd point counts keep 0 on the X and q/p grids, so X -> -X maps the grid onto itself
X_GRID = np.linspace(-10.0, 10.0, 641)
T_GRID = np.linspace(-40.0, 40.0, 4097)
QP_GRID = np.linspace(-10.0, 10.0, 321)
N_PHASES = 128


def phase_grid(M: int = N_PHASES) -> np.ndarray:
    return 2 * np.pi * np.arange(M) / M


class DecayError(ValueError):
    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


@dataclass(frozen=True, eq=False)
class WignerGrid:
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray  # W[iq, ip]
    meta: dict = field(default_factory=dict)

    @property
    def normalization(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.q))

    def at(self, q, p) -> float:
        """Value at the nearest grid node."""
        i = int(np.argmin(np.abs(self.q - q)))
        j = int(np.argmin(np.abs(self.p - p)))
        return float(self.values[i, j])


@dataclass(frozen=True, eq=False)
class Tomogram:
    X: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # w[iX, iphi]
    meta: dict = field(default_factory=dict)

    def norms(self) -> np.ndarray:
        return np.trapezoid(self.values, self.X, axis=0)

    def normalization_residual(self) -> float:
        return float(np.max(np.abs(self.norms() - 1.0)))

    def min_value(self) -> float:
        return float(np.min(self.values))

    def pi_shift_residual(self) -> float:
        """max |w(X, phi + pi) - w(-X, phi)| over on-grid phase pairs."""
        M = self.phi.size
        if M % 2 or not np.allclose(self.X, -self.X[::-1]):
            raise ValueError("pi-shift check needs an even phase count and a symmetric X grid")
        shifted = np.roll(self.values, -M // 2, axis=1)
        return float(np.max(np.abs(shifted - self.values[::-1, :])))

    def invariants(self) -> dict:
        return {
            "normalization": self.normalization_residual(),
            "min_value": self.min_value(),
            "pi_shift": self.pi_shift_residual(),
        }


# ---------------------------------------------------------------- Wigner

def wigner_from_kernel(k: PositionKernel, q=None, p=None) -> WignerGrid:
    """W(q, p) = (1/2pi) int exp(-ipx) rho(q + x/2, q - x/2) dx by quadrature in x.

    When every q lies on the kernel grid, kernel samples are used directly with
    x-step 2 dx; otherwise the kernel is spline-interpolated with x-step dx.
    """
    q = QP_GRID if q is None else np.asarray(q, float)
    p = QP_GRID if p is None else np.asarray(p, float)
    a, b = k.x[0], k.x[-1]
    if q.min() < a - 1e-12 or q.max() > b + 1e-12:
        raise DomainError(f"q range [{q.min()}, {q.max()}] exceeds kernel grid [{a}, {b}]")
    dx = k.dx
    idx = (q - a) / dx
    aligned = np.allclose(idx, np.round(idx), atol=1e-7)
    n = k.x.size
    if aligned:
        i = np.round(idx).astype(int)
        J = n - 1
        j = np.arange(-J, J + 1)
        rows = i[:, None] + j[None, :]
        cols = i[:, None] - j[None, :]
        ok = (rows >= 0) & (rows < n) & (cols >= 0) & (cols < n)
        S = np.where(ok, k.values[np.clip(rows, 0, n - 1), np.clip(cols, 0, n - 1)], 0.0)
        x = 2 * dx * j
        step = 2 * dx
    else:
        J = int(np.floor((b - a) / dx))
        j = np.arange(-J, J + 1)
        x = dx * j
        Q, Xs = np.meshgrid(q, x, indexing="ij")
        u, v = Q + Xs / 2, Q - Xs / 2
        ok = (u >= a) & (u <= b) & (v >= a) & (v <= b)
        S = np.zeros(Q.shape, dtype=complex)
        S[ok] = k(u[ok], v[ok])
        step = dx
    E = np.exp(-1j * np.outer(x, p))
    W = (S @ E) * step / (2 * np.pi)
    imag = float(np.max(np.abs(W.imag)))
    if imag > 1e-10:
        raise ValueError(f"Wigner function has imaginary residue {imag:.3e}")
    return WignerGrid(q, p, W.real.copy(), {"route": "kernel", "imag_residue": imag})


def wigner_from_fock(rho: DensityMatrix, q=None, p=None, kernel_range=(-12.0, 12.0),
                     n_kernel=1537) -> WignerGrid:
    k = kernel_from_fock(rho, kernel_range[0], kernel_range[1], n_kernel)
    W = wigner_from_kernel(k, q, p)
    W.meta["route"] = "fock"
    return W


# ---------------------------------------------------------------- tomograms

def _fourier_matrix(X, t_half):
    dt = t_half[1] - t_half[0]
    wt = np.full(t_half.size, dt)
    wt[0] = dt / 2
    return np.exp(-1j * np.outer(X, t_half)) * wt


def tomogram_from_charfunc(F: CharFunction, X=None, phi=None, t=None,
                           decay_tol: float = 1e-10) -> Tomogram:
    """Discrete Fourier inversion of F along rays, one column per phase.

    F(-t) = conj F(t) on every ray, so only t >= 0 is sampled and the
    trapezoid sum over the symmetric t-grid is folded onto it.
    """
    X = X_GRID if X is None else np.asarray(X, float)
    phi = phase_grid() if phi is None else np.asarray(phi, float)
    t = T_GRID if t is None else np.asarray(t, float)
    if not np.allclose(t, -t[::-1]) or t.size % 2 == 0:
        raise ValueError("t grid must be symmetric with an odd point count")
    t_half = t[t.size // 2:]
    G = F.ray(t_half, phi)
    edge = float(np.max(np.abs(G[-1])))
    if edge > decay_tol:
        raise DecayError(f"|F| = {edge:.3e} at t_max = {t_half[-1]}; widen the t range", edge)
    w = (_fourier_matrix(X, t_half) @ G).real / np.pi
    return Tomogram(X, phi, w, {"route": "fourier", "edge_decay": edge})


def tomogram_direct(rho: DensityMatrix, X=None, phi=None) -> Tomogram:
    """<X|U^dag rho U|X> with U = exp(i phi n) and Hermite-function position states."""
    X = X_GRID if X is None else np.asarray(X, float)
    phi = phase_grid() if phi is None else np.asarray(phi, float)
    psi = hermite_functions(rho.dim, X)  # (N, nX)
    n = np.arange(rho.dim)
    out = np.empty((X.size, phi.size))
    for c, ph in enumerate(phi):
        ph_vec = np.exp(-1j * ph * n)
        r = ph_vec[:, None] * rho.matrix * ph_vec.conj()[None, :]
        out[:, c] = np.einsum("jx,jk,kx->x", psi, r, psi).real
    return Tomogram(X, phi, out, {"route": "direct"})


def tomogram_radon(W: WignerGrid, X=None, phi=None, order: int = 5,
                   decay_tol: float = 1e-10) -> Tomogram:
    """Line integrals of W along X = q cos phi + p sin phi.

    W is interpolated with B-splines of the given order (1 = bilinear; the
    quintic default keeps the route error near 1e-9 on the default grids) and
    sampled at the W-grid spacing along each line.
    """
    X = X_GRID if X is None else np.asarray(X, float)
    phi = phase_grid() if phi is None else np.asarray(phi, float)
    vals = W.values
    edge = max(np.abs(vals[0]).max(), np.abs(vals[-1]).max(),
               np.abs(vals[:, 0]).max(), np.abs(vals[:, -1]).max())
    if edge > decay_tol:
        raise DecayError(f"Wigner grid has |W| = {edge:.3e} at its boundary", edge)
    hq = W.q[1] - W.q[0]
    hp = W.p[1] - W.p[0]
    h = min(hq, hp)
    S = np.hypot(max(abs(W.q[0]), abs(W.q[-1])), max(abs(W.p[0]), abs(W.p[-1])))
    s = np.arange(-np.ceil(S / h), np.ceil(S / h) + 1) * h
    coeffs = ndimage.spline_filter(vals, order=order) if order > 1 else vals
    out = np.empty((X.size, phi.size))
    Xs, Ss = np.meshgrid(X, s, indexing="ij")
    for c, ph in enumerate(phi):
        cq, sq = np.cos(ph), np.sin(ph)
        qq = Xs * cq - Ss * sq
        pp = Xs * sq + Ss * cq
        coords = np.array([(qq - W.q[0]) / hq, (pp - W.p[0]) / hp])
        line = ndimage.map_coordinates(coeffs, coords, order=order, mode="constant",
                                       cval=0.0, prefilter=False)
        out[:, c] = line.sum(axis=1) * h
    return Tomogram(X, phi, out, {"route": "radon", "order": order})


def symplectic_tomogram(F: CharFunction, X, mu: float, nu: float, t=None):
    """w(X, mu, nu) = (1/2pi) int exp(-iXt) F(t mu, t nu) dt."""
    s = np.hypot(mu, nu)
    if s == 0:
        raise DomainError("symplectic tomogram needs (mu, nu) != (0, 0)")
    if t is None:
        t = T_GRID / s
    t = np.asarray(t, float)
    X = np.asarray(X, float)
    t_half = t[t.size // 2:]
    g = np.asarray(F(t_half * mu, t_half * nu))
    val = (_fourier_matrix(np.atleast_1d(X), t_half) @ g).real / np.pi
    return float(val[0]) if X.ndim == 0 else val


# ---------------------------------------------------------------- inverse Radon

def ramp_kernel(offsets: np.ndarray, dX: float) -> np.ndarray:
    """int_{-T}^{T} |t| exp(-itu) dt at u = k dX with T = pi/dX (Nyquist cutoff)."""
    k = np.asarray(offsets)
    out = np.where(k % 2 == 1, -4.0 / (np.maximum(np.abs(k), 1) * dX) ** 2, 0.0)
    return np.where(k == 0, (np.pi / dX) ** 2, out)


def wigner_from_tomogram(w: Tomogram, q=None, p=None, min_phases: int = 64) -> WignerGrid:
    """Filtered back-projection.

    W(q, p) = 1/(8 pi^2) int_0^{2pi} dphi h_phi(q cos phi + p sin phi), where
    h_phi = w(., phi) convolved with the ramp filter |t| cut off at the X-grid
    Nyquist frequency; the convolution uses the exact band-limited kernel.
    """
    q = QP_GRID if q is None else np.asarray(q, float)
    p = QP_GRID if p is None else np.asarray(p, float)
    warnings = []
    M = w.phi.size
    if M < min_phases:
        warnings.append(f"only {M} phases; reconstruction may be under-resolved")
    X = w.X
    dX = X[1] - X[0]
    reach = np.hypot(np.abs(q).max(), np.abs(p).max())
    n_reach = int(np.ceil(reach / dX)) + 2
    # extended output nodes aligned with the input X grid
    start = int(np.round(X[0] / dX))
    ext = np.arange(min(start, -n_reach), max(start + X.size - 1, n_reach) + 1)
    Xe = ext * dX
    K = ramp_kernel(ext[:, None] - (start + np.arange(X.size))[None, :], dX)
    H = (K @ w.values) * dX  # (len(Xe), M)
    coeffs = ndimage.spline_filter1d(H, order=3, axis=0)
    Q, P = np.meshgrid(q, p, indexing="ij")
    acc = np.zeros(Q.shape)
    for c, ph in enumerate(w.phi):
        pos = (Q * np.cos(ph) + P * np.sin(ph) - Xe[0]) / dX
        acc += ndimage.map_coordinates(coeffs[:, c], pos.ravel()[None, :], order=3,
                                       mode="constant", cval=0.0,
                                       prefilter=False).reshape(Q.shape)
    Wv = acc * (2 * np.pi / M) / (8 * np.pi**2)
    return WignerGrid(q, p, Wv, {"route": "inverse_radon", "warnings": warnings})
