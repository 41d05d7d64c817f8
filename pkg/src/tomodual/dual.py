"""Dual symbols a(X, phi) paired with tomograms.

Two constructions: closed-form polynomial symbols trig(phi) X^(m+n) for the
symmetrized products, and the resolvent symbol
a(z, phi) = -2 pi Tr(A (z - cos(phi) q - sin(phi) p)^-2) for bounded A.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.linalg import eigh

from .charfunc import CharFunction
from .fock import DensityMatrix, FockOperator, make_state, quadrature_ops, sym_product, trace_pair
from .tomogram import T_GRID, Tomogram, phase_grid, tomogram_from_charfunc
from .trigpoly import MAX_DEGREE, TrigPolynomial, biorthogonal_Q


class CalibrationRequiredError(RuntimeError):
    pass


class CalibrationError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConditioningError(ArithmeticError):
    pass


class ContinuationError(ArithmeticError):
    pass


class GridDecayError(ValueError):
    pass


# ---------------------------------------------------------------- polynomial symbols

INDEX_RULES = ("m", "n")
PHASE_RULES = ("m", "n", "m+n")


def _rule_value(rule: str, m: int, n: int) -> int:
    return {"m": m, "n": n, "m+n": m + n}[rule]


@dataclass
class ConventionReport:
    """Outcome of calibrating which Q_{m+n}^j pairs with {q^m p^n}_s.

    index_rule: j as a function of (m, n).
    phase_rule: exponent e for which the pairing equals (-i)^e d^(m+n)F/dmu^m dnu^n at 0.
    residuals: max residual of every candidate (index_rule, phase_rule).
    """

    index_rule: str | None
    phase_rule: str | None
    residuals: dict
    evidence: list = field(default_factory=list)
    tolerance: float = 1e-5
    max_order: int = 0

    @property
    def calibrated(self) -> bool:
        return self.index_rule is not None

    def index(self, m: int, n: int) -> int:
        if not self.calibrated:
            raise CalibrationRequiredError("convention has not been calibrated")
        return _rule_value(self.index_rule, m, n)

    def to_json(self) -> dict:
        return {
            "index_rule": self.index_rule,
            "phase_rule": self.phase_rule,
            "tolerance": self.tolerance,
            "max_order": self.max_order,
            "residuals": [{"index_rule": j, "phase_rule": p, "max_residual": r}
                          for (j, p), r in sorted(self.residuals.items())],
            "evidence": self.evidence,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConventionReport":
        res = {(d["index_rule"], d["phase_rule"]): d["max_residual"] for d in data["residuals"]}
        return cls(data["index_rule"], data["phase_rule"], res, data.get("evidence", []),
                   data.get("tolerance", 1e-5), data.get("max_order", 0))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class DualSymbol:
    m: int
    n: int
    trig: TrigPolynomial

    def __post_init__(self):
        if self.trig.degree != self.m + self.n:
            raise ValueError("trig degree must equal m + n")

    def __call__(self, X, phi):
        X = np.asarray(X, float)
        phi = np.asarray(phi, float)
        return self.trig(phi) * X ** (self.m + self.n)


def dual_symbol_poly(m: int, n: int, convention: ConventionReport | None) -> DualSymbol:
    if m < 0 or n < 0 or m + n > MAX_DEGREE:
        raise ValueError(f"need 0 <= m + n <= {MAX_DEGREE}")
    if convention is None or not convention.calibrated:
        raise CalibrationRequiredError("dual symbols need a calibrated ConventionReport")
    return DualSymbol(m, n, biorthogonal_Q(m + n)[convention.index(m, n)])


def pair_with_tomogram(w: Tomogram, trig: TrigPolynomial, power: int) -> float:
    """int_0^{2pi} int w(X, phi) trig(phi) X^power dX dphi.

    Trapezoid in X, rectangle rule in phi (the phase grid is uniform and periodic).
    """
    radial = np.trapezoid(w.values * (w.X ** power)[:, None], w.X, axis=0)
    dphi = 2 * np.pi / w.phi.size
    return float(np.sum(radial * trig(w.phi)) * dphi)


def default_calibration_states(N: int = 40) -> list[DensityMatrix]:
    return [
        make_state("fock", N, n=0),
        make_state("coherent", N, alpha=1.0),
        make_state("coherent", N, alpha=1j),
        make_state("squeezed", N, r=0.5),
    ]


def calibrate_convention(N: int = 40, states=None, max_order: int = 3, tol: float = 1e-5,
                         tomograms=None) -> ConventionReport:
    """Pick the (index rule, phase rule) reproducing Tr(rho {q^m p^n}_s).

    Candidate (j, e) predicts int int w Q_{m+n}^j X^(m+n) = i^(m+n-e) Tr(rho {q^m p^n}_s),
    the value of (-i)^e d^(m+n)F at the origin. Exactly one candidate must stay
    below tol over every state and every order 1 <= m + n <= max_order.
    """
    states = default_calibration_states(N) if states is None else list(states)
    if tomograms is None:
        tomograms = [tomogram_from_charfunc(CharFunction(s)) for s in states]
    Q = {k: biorthogonal_Q(k) for k in range(max_order + 1)}
    residuals = {(j, e): 0.0 for j in INDEX_RULES for e in PHASE_RULES}
    evidence = []
    for rho, w in zip(states, tomograms):
        for order in range(max_order + 1):
            for m in range(order + 1):
                n = order - m
                target = trace_pair(rho, sym_product(m, n, rho.dim)).real
                for j in INDEX_RULES:
                    val = pair_with_tomogram(w, Q[order][_rule_value(j, m, n)], order)
                    for e in PHASE_RULES:
                        pred = 1j ** (order - _rule_value(e, m, n)) * target
                        r = abs(val - pred)
                        residuals[(j, e)] = max(residuals[(j, e)], r)
                        evidence.append({"state": rho.label, "m": m, "n": n, "index_rule": j,
                                         "phase_rule": e, "pairing": val,
                                         "target": [pred.real, pred.imag], "residual": r})
    ok = [key for key, r in residuals.items() if r < tol]
    report = ConventionReport(None, None, residuals, evidence, tol, max_order)
    if len(ok) != 1:
        raise CalibrationError(f"{len(ok)} candidate conventions within {tol:g}: {residuals}",
                               report)
    report.index_rule, report.phase_rule = ok[0]
    return report


# ---------------------------------------------------------------- resolvent symbols

@dataclass(frozen=True)
class ResolventQuery:
    X: float
    eps: float
    phi: float
    N: int | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be > 0")


def _operator(A, N=None) -> np.ndarray:
    m = A.matrix if isinstance(A, DensityMatrix) else getattr(A, "entries", A)
    m = np.asarray(m, dtype=complex)
    if N is not None and N > m.shape[0]:
        big = np.zeros((N, N), dtype=complex)
        big[: m.shape[0], : m.shape[0]] = m
        m = big
    return m


def rotated_quadrature(N: int, phi: float) -> np.ndarray:
    q, p = quadrature_ops(N)
    return np.cos(phi) * q.entries + np.sin(phi) * p.entries


def dual_symbol_resolvent(A, rq: ResolventQuery, method: str = "solve",
                          cond_max: float = 1e10) -> complex:
    """-2 pi Tr(A B^-2) with B = z - cos(phi) q - sin(phi) p and z = X + i eps."""
    Am = _operator(A, rq.N)
    N = Am.shape[0]
    x = rotated_quadrature(N, rq.phi)
    z = rq.X + 1j * rq.eps
    lam, V = eigh(x)
    # B is normal, so its condition number is max|z - lam| / min|z - lam|
    gaps = np.abs(z - lam)
    cond = gaps.max() / gaps.min()
    if cond > cond_max:
        raise ConditioningError(f"resolvent condition {cond:.3e} at eps={rq.eps}, N={N}")
    if method == "solve":
        B = z * np.eye(N) - x
        Y = np.linalg.solve(B, Am)
        Z = np.linalg.solve(B, Y)  # B^-2 A
        return complex(-2 * np.pi * np.trace(Z))
    if method == "eig":
        c = np.einsum("ik,ij,jk->k", V.conj(), Am, V)
        return complex(-2 * np.pi * np.sum(c / (z - lam) ** 2))
    raise ValueError(f"unknown method {method!r}")


class _Spectral:
    """Eigen-data of cos(phi) q + sin(phi) p and the diagonal of A in that basis.

    cos(phi) q + sin(phi) p = U q U^dag with U = diag(exp(i phi n)), so one
    diagonalization of q serves every phase.
    """

    def __init__(self, A, N=None):
        self.A = _operator(A, N)
        self.N = self.A.shape[0]
        q, _ = quadrature_ops(self.N)
        self.lam, self.V = eigh(q.entries)

    def weights(self, phi: float) -> np.ndarray:
        u = np.exp(1j * phi * np.arange(self.N))
        Vp = u[:, None] * self.V
        return np.einsum("ik,ij,jk->k", Vp.conj(), self.A, Vp)


def resolvent_symbol_grid(A, X, eps: float, phi: float, N=None) -> np.ndarray:
    """a(X + i eps, phi) for an array of X (eps may be negative)."""
    sp = _Spectral(A, N)
    c = sp.weights(phi)
    z = np.asarray(X, float)[:, None] + 1j * eps
    return -2 * np.pi * np.sum(c / (z - sp.lam) ** 2, axis=1)


def resolvent_fourier_check(A, t: float, phi: float, eps: float, X=None,
                            decay_tol: float = 1e-8, n_asymptotic: int = 4,
                            shift: float = 1.0) -> tuple[complex, complex]:
    """lhs = t Tr(A exp(i t x_phi)); rhs = (2 pi)^-2 int exp(itX) a(X - i eps, phi) dX.

    With w = X - i b (b = max(eps, shift)), a(X - i eps) = -2 pi sum_j (j + 1) m_j w^-(j+2)
    for large |X|, m_j = Tr(A (x_phi - i(b - eps))^j). The first n_asymptotic terms
    are transformed in closed form; the remainder decays like X^-(n_asymptotic+2)
    and is integrated on the grid. Keeping their pole at distance b from the axis
    keeps the grid quadrature of the high-order terms accurate.
    """
    if X is None:
        # trapezoid error for poles at distance eps is ~exp(-2 pi eps / h)
        h = min(0.02, eps / 5)
        X = np.linspace(-200.0, 200.0, 2 * int(np.ceil(200.0 / h)) + 1)
    X = np.asarray(X, float)
    sp = _Spectral(A)
    c = sp.weights(phi)
    lhs = complex(t * np.sum(c * np.exp(1j * t * sp.lam)))
    b = max(eps, shift)
    mom = [np.sum(c * (sp.lam - 1j * (b - eps)) ** j) for j in range(n_asymptotic)]
    a = -2 * np.pi * np.sum(c / (X[:, None] - 1j * eps - sp.lam) ** 2, axis=1)
    w = X - 1j * b
    rem = a.copy()
    for j, mj in enumerate(mom):
        rem += 2 * np.pi * (j + 1) * mj / w ** (j + 2)
    edge = max(abs(rem[0]), abs(rem[-1]))
    if edge > decay_tol:
        raise GridDecayError(f"integrand remainder {edge:.3e} at the X boundary; widen the grid")
    numeric = np.trapezoid(np.exp(1j * t * X) * rem, X)
    closed = 0.0
    if t > 0:
        # int exp(itX) (X - i b)^-k dX = 2 pi i (it)^(k-1) exp(-t b) / (k-1)!
        for j, mj in enumerate(mom):
            closed += (-2 * np.pi * (j + 1) * mj) * 2j * np.pi * (1j * t) ** (j + 1) \
                / factorial(j + 1) * np.exp(-t * b)
    rhs = complex((numeric + closed) / (2 * np.pi) ** 2)
    return lhs, rhs


PAIRING_X_GRID = np.linspace(-10.0, 10.0, 2001)


def regularized_pairing(rho: DensityMatrix, A, eps: float, X=None, phi=None, t=None,
                        N: int | None = None, decay_tol: float = 1e-10) -> complex:
    """int_0^{2pi} int w(X + i eps, phi) a(X + i eps, phi) dX dphi.

    w is continued off the real axis through its Fourier representation,
    w(X + i eps) = (1/2pi) int exp(-it(X + i eps)) F(t cos phi, t sin phi) dt,
    which converges for the Gaussian-decaying F of the fixture states.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    X = PAIRING_X_GRID if X is None else np.asarray(X, float)
    phi = phase_grid(64) if phi is None else np.asarray(phi, float)
    t = T_GRID if t is None else np.asarray(t, float)
    t_half = t[t.size // 2:]
    G = CharFunction(rho).ray(t_half, phi)  # (T, M)
    up = np.exp(t_half * eps)[:, None]
    growth = float(np.max(np.abs(G[-1]) * up[-1, 0]))
    if growth > decay_tol or not np.isfinite(growth):
        raise ContinuationError(
            f"continued tomogram of {rho.label or 'state'} does not converge: "
            f"|F| e^(t eps) = {growth:.3e} at t_max")
    dt = t_half[1] - t_half[0]
    wt = np.full(t_half.size, dt)
    wt[0] = dt / 2
    E = np.exp(-1j * np.outer(X, t_half)) * wt
    # t >= 0 half plus the mirrored t < 0 half, F(-t) = conj F(t)
    wc = (E @ (up * G) + E.conj() @ (G.conj() / up)) / (2 * np.pi)  # (nX, M)
    sp = _Spectral(A, N or rho.dim)
    z = X[:, None] + 1j * eps
    total = 0.0
    for c_idx, ph in enumerate(phi):
        cw = sp.weights(ph)
        a = -2 * np.pi * np.sum(cw / (z - sp.lam) ** 2, axis=1)
        total += np.trapezoid(wc[:, c_idx] * a, X)
    return complex(total * 2 * np.pi / phi.size)
