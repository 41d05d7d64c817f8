"""Truncated Fock-basis operator algebra.

Conventions (used by every module in the package): hbar = 1,
q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), so [q, p] = i and the
vacuum Wigner function is exp(-q^2 - p^2)/pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import gammainc, gammaln

DEFAULT_TAIL_TOL = 1e-10


class InvalidDimensionError(ValueError):
    pass


class TruncationError(ValueError):
    """Raised when the truncated space cannot faithfully hold a state or product."""

    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass


@dataclass(frozen=True, eq=False)
class FockOperator:
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"operator must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.hermitian:
            dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if dev > 1e-12:
                raise ValueError(f"operator flagged hermitian but |A - A^dag| = {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.entries.conj().T, self.hermitian)

    def embed(self, dim: int) -> "FockOperator":
        """Zero-pad into a larger truncation."""
        if dim < self.dim:
            raise InvalidDimensionError(f"cannot embed dim {self.dim} into {dim}")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.entries
        return FockOperator(out, self.hermitian)

    def __add__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return FockOperator(self.entries + other.entries, self.hermitian and other.hermitian)

    def __sub__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return FockOperator(self.entries - other.entries, self.hermitian and other.hermitian)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return FockOperator(self.entries * scalar, self.hermitian and np.isreal(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, FockOperator):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return FockOperator(self.entries @ other.entries)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    op: FockOperator
    tail_mass: float = 0.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        m = self.op.entries
        herm = np.max(np.abs(m - m.conj().T))
        if herm > 1e-12:
            raise ValueError(f"density matrix not Hermitian (deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {tr!r} differs from 1")
        lam = np.linalg.eigvalsh(m)
        if lam[0] < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
        if self.tail_mass < 0:
            raise ValueError("tail_mass must be nonnegative")

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    @property
    def purity(self) -> float:
        m = self.matrix
        return float(np.real(np.vdot(m.conj().T, m)))

    @classmethod
    def from_matrix(cls, matrix, tail_mass=0.0, label=""):
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        m = m / np.trace(m).real
        return cls(FockOperator(m, hermitian=True), float(tail_mass), label)

    @classmethod
    def from_ket(cls, psi, tail_mass=0.0, label=""):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls.from_matrix(np.outer(psi, psi.conj()), tail_mass, label)


def _check_dims(d1, d2):
    if d1 != d2:
        raise InvalidDimensionError(f"dimension mismatch: {d1} vs {d2}")


def ladder_ops(N: int) -> tuple[FockOperator, FockOperator]:
    """Annihilation and creation operators on span{|0>, ..., |N-1>}."""
    if N < 2:
        raise InvalidDimensionError(f"truncation must be >= 2, got {N}")
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1).astype(complex)
    return FockOperator(a), FockOperator(a.conj().T)


def quadrature_ops(N: int) -> tuple[FockOperator, FockOperator]:
    a, ad = ladder_ops(N)
    q = (a.entries + ad.entries) / np.sqrt(2)
    p = (a.entries - ad.entries) / (1j * np.sqrt(2))
    return FockOperator(q, hermitian=True), FockOperator(p, hermitian=True)


def number_op(N: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(N, dtype=complex)), hermitian=True)


def sym_product(m: int, n: int, N: int) -> FockOperator:
    """Symmetrized product 2^-n sum_k C(n,k) p^k q^m p^(n-k).

    The products are formed in a space padded by m + n levels and then
    cropped, so every returned entry equals the untruncated matrix element.
    """
    if m < 0 or n < 0:
        raise ValueError("orders must be nonnegative")
    if m + n + 2 > N:
        raise TruncationError(f"order {m + n} needs N >= {m + n + 2}, got N={N}")
    big = N + m + n
    q, p = (o.entries for o in quadrature_ops(big))
    qm = np.linalg.matrix_power(q, m)
    ppow = [np.eye(big, dtype=complex)]
    for _ in range(n):
        ppow.append(ppow[-1] @ p)
    acc = np.zeros((big, big), dtype=complex)
    for k in range(n + 1):
        acc += comb(n, k) * (ppow[k] @ qm @ ppow[n - k])
    acc = acc[:N, :N] / 2**n
    # products of Hermitian matrices: restore exact Hermiticity lost to rounding
    acc = 0.5 * (acc + acc.conj().T)
    return FockOperator(acc, hermitian=True)


def _coherent_ket(alpha, N):
    psi = np.zeros(N, dtype=complex)
    if alpha == 0:
        psi[0] = 1.0
        return psi
    n = np.arange(N)
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def _squeezed_ket(r, theta, N):
    # <2k|S(xi)|0> for S(xi) = exp((xi* a^2 - xi a^dag^2)/2), xi = r e^{i theta}
    psi = np.zeros(N, dtype=complex)
    psi[0] = 1.0
    if r != 0:
        k = np.arange(1, (N + 1) // 2)
        logmag = (k * np.log(abs(np.tanh(r))) + 0.5 * gammaln(2 * k + 1)
                  - k * np.log(2.0) - gammaln(k + 1))
        psi[2 * k] = np.exp(logmag) * (-np.exp(1j * theta) * np.sign(r)) ** k
    return psi / np.sqrt(np.cosh(r))


def make_state(kind: str, N: int, tol: float = DEFAULT_TAIL_TOL, **params) -> DensityMatrix:
    """Build a fixture state on an N-level truncation.

    kinds and parameters:
      fock      n
      coherent  alpha (complex)
      thermal   nbar >= 0
      squeezed  r (real), theta (default 0)
      cat       alpha, parity (+1 even, -1 odd)
    """
    if N < 2:
        raise InvalidDimensionError(f"truncation must be >= 2, got {N}")
    label = f"{kind}(" + ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(params.items())) + ")"
    if kind == "fock":
        n = int(params.get("n", 0))
        if not 0 <= n < N:
            raise TruncationError(f"Fock level {n} outside truncation N={N}", tail_mass=1.0)
        psi = np.zeros(N, dtype=complex)
        psi[n] = 1.0
        return DensityMatrix.from_ket(psi, 0.0, label)
    if kind == "coherent":
        alpha = complex(params.get("alpha", 0.0))
        tail = float(gammainc(N, abs(alpha) ** 2)) if alpha != 0 else 0.0
        _check_tail(tail, tol, label)
        return DensityMatrix.from_ket(_coherent_ket(alpha, N), tail, label)
    if kind == "thermal":
        nbar = float(params.get("nbar", 0.0))
        if nbar < 0:
            raise ValueError("thermal nbar must be >= 0")
        ratio = nbar / (nbar + 1.0)
        tail = ratio**N
        _check_tail(tail, tol, label)
        probs = ratio ** np.arange(N) / (nbar + 1.0)
        return DensityMatrix.from_matrix(np.diag(probs), tail, label)
    if kind == "squeezed":
        r = float(params.get("r", 0.0))
        theta = float(params.get("theta", 0.0))
        psi = _squeezed_ket(r, theta, N)
        tail = max(0.0, 1.0 - float(np.sum(np.abs(psi) ** 2)))
        _check_tail(tail, tol, label)
        return DensityMatrix.from_ket(psi, tail, label)
    if kind == "cat":
        alpha = complex(params.get("alpha", 1.0))
        parity = int(params.get("parity", 1))
        if parity not in (1, -1):
            raise ValueError("cat parity must be +1 or -1")
        c = _coherent_ket(alpha, N)
        psi = c + parity * _coherent_ket(-alpha, N)
        norm_inf = 2.0 * (1.0 + parity * np.exp(-2 * abs(alpha) ** 2))
        if norm_inf <= 0:
            raise ValueError("odd cat with alpha = 0 is not a state")
        tail = max(0.0, 1.0 - float(np.sum(np.abs(psi) ** 2)) / norm_inf)
        _check_tail(tail, tol, label)
        return DensityMatrix.from_ket(psi, tail, label)
    raise ValueError(f"unknown state kind {kind!r}")


def _fmt(v):
    if isinstance(v, complex):
        if v.imag == 0:
            return f"{v.real:g}"
        return f"{v.real:g}{v.imag:+g}j" if v.real else f"{v.imag:g}j"
    return f"{v:g}" if isinstance(v, float) else str(v)


def _check_tail(tail, tol, label):
    if tail > tol:
        raise TruncationError(f"{label}: truncated tail mass {tail:.3e} exceeds {tol:.1e}", tail)


def trace_pair(rho, A) -> complex:
    """Tr(rho A). Accepts DensityMatrix/FockOperator or raw arrays."""
    r = rho.matrix if isinstance(rho, DensityMatrix) else getattr(rho, "entries", rho)
    a = A.matrix if isinstance(A, DensityMatrix) else getattr(A, "entries", A)
    r = np.asarray(r)
    a = np.asarray(a)
    _check_dims(r.shape[0], a.shape[0])
    # Tr(RA) = sum_ij R_ij A_ji
    return complex(np.sum(r * a.T))
