"""Biorthogonal trigonometric polynomials in exact rational arithmetic.

Basis for degree n: b_k(phi) = sin^k(phi) cos^(n-k)(phi), k = 0..n (k counts
sine powers). The dual system Qt_n^m satisfies int_0^{2pi} b_k Qt_n^m dphi = delta_km
and Q_n^m = Qt_n^m / C(n, m). Every integral of the basis is a rational multiple
of pi, so the construction is carried out with fractions and pi kept symbolic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

MAX_DEGREE = 12


class SingularGramError(ArithmeticError):
    pass


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def trig_monomial_integral(a: int, b: int) -> Fraction:
    """int_0^{2pi} sin^a cos^b dphi, returned as a rational multiple of 2pi."""
    if a < 0 or b < 0:
        raise ValueError("powers must be nonnegative")
    if a % 2 or b % 2:
        return Fraction(0)
    return Fraction(_double_factorial(a - 1) * _double_factorial(b - 1), _double_factorial(a + b))


@dataclass(frozen=True)
class TrigPolynomial:
    """(1/pi) * sum_k coeffs[k] sin^k(phi) cos^(degree-k)(phi)."""

    degree: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ValueError(f"degree {self.degree} needs {self.degree + 1} coefficients")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    def __call__(self, phi):
        phi = np.asarray(phi, float)
        s, c = np.sin(phi), np.cos(phi)
        n = self.degree
        total = sum(float(ck) * s**k * c ** (n - k) for k, ck in enumerate(self.coeffs))
        return total / np.pi

    def horner(self, phi):
        phi = np.asarray(phi, float)
        s, c = np.sin(phi), np.cos(phi)
        n = self.degree
        acc = np.full(phi.shape, float(self.coeffs[n]))
        for k in range(n - 1, -1, -1):
            acc = acc * s + float(self.coeffs[k]) * c ** (n - k)
        return acc / np.pi

    def integral_against(self, k: int) -> Fraction:
        """Exact int_0^{2pi} sin^k cos^(n-k) * self dphi (a pure rational)."""
        n = self.degree
        # (1/pi) * 2pi * sum_j c_j I(k+j, 2n-k-j)
        return 2 * sum(cj * trig_monomial_integral(k + j, 2 * n - k - j)
                       for j, cj in enumerate(self.coeffs))

    def scaled(self, factor) -> "TrigPolynomial":
        return TrigPolynomial(self.degree, tuple(Fraction(factor) * c for c in self.coeffs))

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "basis": "sin^k cos^(degree-k), k = index",
            "coeffs": [[c.numerator, c.denominator] for c in self.coeffs],
            "pi_power": -1,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrigPolynomial":
        if data.get("pi_power", -1) != -1:
            raise ValueError("only pi_power = -1 is supported")
        return cls(int(data["degree"]), tuple(Fraction(a, b) for a, b in data["coeffs"]))

    def __str__(self):
        n = self.degree
        terms = []
        for k, ck in enumerate(self.coeffs):
            if ck == 0:
                continue
            mono = "*".join(x for x in (_pow("sin", k), _pow("cos", n - k)) if x) or "1"
            terms.append(f"{ck}*{mono}")
        return "(" + (" + ".join(terms) or "0") + ")/pi"


def _pow(name, k):
    if k == 0:
        return ""
    return name if k == 1 else f"{name}^{k}"


@dataclass(frozen=True)
class GramMatrix:
    """G[k][k'] = int b_k b_k' dphi, stored as rational multiples of 2pi."""

    n: int
    entries: tuple

    def as_float(self) -> np.ndarray:
        return 2 * np.pi * np.array([[float(v) for v in row] for row in self.entries])

    def determinant(self) -> Fraction:
        return _gauss_jordan([list(r) for r in self.entries])[1]


def _check_degree(n):
    if not 0 <= n <= MAX_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_DEGREE}], got {n}")


def gram_matrix(n: int) -> GramMatrix:
    _check_degree(n)
    rows = tuple(tuple(trig_monomial_integral(k + j, 2 * n - k - j) for j in range(n + 1))
                 for k in range(n + 1))
    G = GramMatrix(n, rows)
    if G.determinant() == 0:
        raise SingularGramError(f"Gram matrix of degree {n} is singular")
    return G


def _gauss_jordan(A):
    """Exact inverse and determinant of a square Fraction matrix (inverse None if singular)."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A)]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None, Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        pv = M[col][col]
        det *= pv
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M], det


def biorthogonal_Qtilde(n: int) -> list[TrigPolynomial]:
    G = gram_matrix(n)
    inv, _ = _gauss_jordan([list(r) for r in G.entries])
    # G = 2pi R, Qt = (1/pi) sum_j c_j b_j  =>  c = R^-1 / 2 (row m gives Qt^m)
    return [TrigPolynomial(n, tuple(v / 2 for v in inv[m])) for m in range(n + 1)]


def biorthogonal_Q(n: int) -> list[TrigPolynomial]:
    return [qt.scaled(Fraction(1, comb(n, m))) for m, qt in enumerate(biorthogonal_Qtilde(n))]


# Published low-order table, same basis and 1/pi factor as TrigPolynomial.
REFERENCE_TABLE = {
    (0, 0): (Fraction(1, 2),),
    (1, 0): (Fraction(1), Fraction(0)),
    (1, 1): (Fraction(0), Fraction(1)),
    (2, 0): (Fraction(-1, 2), Fraction(0), Fraction(3, 2)),
    (2, 1): (Fraction(0), Fraction(2), Fraction(0)),
    (2, 2): (Fraction(3, 2), Fraction(0), Fraction(-1, 2)),
}


@dataclass(frozen=True)
class TableReport:
    permutations: dict  # n -> tuple, constructed index m matches table index perm[m]
    swap_detected: dict  # n -> True when the match needs m <-> n - m
    matched: bool
    rows: tuple  # (n, m, constructed, table entry it matches)

    def summary(self) -> str:
        lines = []
        for n, perm in sorted(self.permutations.items()):
            if perm is None:
                lines.append(f"n={n}: no index permutation reproduces the table")
            elif perm == tuple(range(n + 1)):
                lines.append(f"n={n}: exact match, identity permutation")
            else:
                pairs = ", ".join(f"Q_{n}^{m} = table Q_{n}^{j}" for m, j in enumerate(perm) if m != j)
                kind = " (m <-> n-m swap)" if self.swap_detected[n] else ""
                lines.append(f"n={n}: match after permutation{kind}: {pairs}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "matched": self.matched,
            "permutations": {str(n): list(p) if p is not None else None
                             for n, p in self.permutations.items()},
            "swap_detected": {str(n): v for n, v in self.swap_detected.items()},
            "rows": [{"n": n, "m": m, "constructed": c, "table_index": j}
                     for n, m, c, j in self.rows],
            "summary": self.summary(),
        }


def verify_reference_table() -> TableReport:
    perms, swaps, rows = {}, {}, []
    degrees = sorted({n for n, _ in REFERENCE_TABLE})
    for n in degrees:
        built = biorthogonal_Q(n)
        perm = []
        for m, poly in enumerate(built):
            hit = [j for j in range(n + 1) if REFERENCE_TABLE[(n, j)] == poly.coeffs]
            perm.append(hit[0] if hit else None)
            rows.append((n, m, str(poly), hit[0] if hit else None))
        ok = None not in perm and sorted(perm) == list(range(n + 1))
        perms[n] = tuple(perm) if ok else None
        swaps[n] = ok and n > 0 and perm == list(range(n, -1, -1)) and perm != list(range(n + 1))
    return TableReport(perms, swaps, all(p is not None for p in perms.values()), tuple(rows))
