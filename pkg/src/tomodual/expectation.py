"""Mean values of symmetrized products by independent routes.

trace        Tr(rho {q^m p^n}_s) on the truncated space (the oracle)
tomographic  int int w(X, phi) a_mn(X, phi) dX dphi
wigner       int int W(q, p) q^m p^n dq dp
charderiv    (-i)^(m+n) d^(m+n) F / dmu^m dnu^n at the origin
sampled      2 pi * mean of a_mn over simulated homodyne outcomes
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .charfunc import CharFunction, moment_from_charfunc
from .dual import ConventionReport, dual_symbol_poly, pair_with_tomogram
from .fock import DensityMatrix, make_state, sym_product, trace_pair
from .tomogram import (N_PHASES, QP_GRID, T_GRID, X_GRID, DecayError, Tomogram, WignerGrid,
                       phase_grid, tomogram_from_charfunc, wigner_from_fock)

DETERMINISTIC_ROUTES = ("trace", "tomographic", "wigner", "charderiv")
DETERMINISTIC_TOL = 1e-5
SAMPLED_SIGMAS = 4.0
MOMENT_DECAY_TOL = 1e-10
CSV_HEADER = ("state", "m", "n", "route", "value", "deviation", "flag")


class MomentOverflowError(DecayError):
    pass


class NormalizationError(ValueError):
    pass


def _state_label(rho) -> str:
    return rho.label if isinstance(rho, DensityMatrix) and rho.label else "state"


def expect_trace(rho: DensityMatrix, m: int, n: int) -> float:
    v = trace_pair(rho, sym_product(m, n, rho.dim))
    if abs(v.imag) > 1e-8:
        raise ValueError(f"trace route has imaginary residue {v.imag:.3e}")
    return float(v.real)


def _required_range(L: float, edge: float, k: int, tol: float) -> float:
    # treat the tail as Gaussian exp(-x^2 / 2s^2) fitted through the boundary value
    if edge <= 0:
        return L
    logw = np.log(edge) - k * np.log(L)
    if logw >= 0:
        return float("inf")
    s2 = L**2 / (-2 * logw)
    x = L
    for _ in range(50):
        x = np.sqrt(2 * s2 * (k * np.log(max(x, 1.0)) - np.log(tol)))
    return float(x)


def expect_tomographic(w: Tomogram, m: int, n: int, convention: ConventionReport,
                       decay_tol: float = MOMENT_DECAY_TOL) -> float:
    k = m + n
    L = float(max(abs(w.X[0]), abs(w.X[-1])))
    edge = float(max(np.max(np.abs(w.values[0])) * abs(w.X[0]) ** k,
                     np.max(np.abs(w.values[-1])) * abs(w.X[-1]) ** k))
    if edge > decay_tol:
        need = _required_range(L, edge / L**k, k, decay_tol)
        raise MomentOverflowError(
            f"X^{k} w = {edge:.3e} at |X| = {L:g}; an X range of about +-{need:.1f} is required",
            edge)
    a = dual_symbol_poly(m, n, convention)
    return pair_with_tomogram(w, a.trig, k)


def expect_wigner(W: WignerGrid, m: int, n: int, decay_tol: float = MOMENT_DECAY_TOL) -> float:
    qm = W.q ** m
    pn = W.p ** n
    f = W.values * qm[:, None] * pn[None, :]
    edge = float(max(np.max(np.abs(f[0])), np.max(np.abs(f[-1])),
                     np.max(np.abs(f[:, 0])), np.max(np.abs(f[:, -1]))))
    if edge > decay_tol:
        raise MomentOverflowError(
            f"q^{m} p^{n} W = {edge:.3e} at the phase-space boundary; widen the (q, p) grid", edge)
    return float(np.trapezoid(np.trapezoid(f, W.p, axis=1), W.q))


def expect_charderiv(rho, m: int, n: int, **kwargs) -> float:
    F = rho if isinstance(rho, CharFunction) else CharFunction(rho)
    return moment_from_charfunc(F, m, n, **kwargs)


# ---------------------------------------------------------------- sampling

@dataclass(frozen=True)
class HomodyneSample:
    phi: float
    X: float
    seed: int
    index: int


@dataclass(frozen=True, eq=False)
class HomodyneSamples:
    """Simulated homodyne record stored column-wise.

    Sample i came from the Philox stream keyed by `seed` at draw position i.
    """

    phi: np.ndarray
    X: np.ndarray
    seed: int
    n_phases: int

    def __len__(self):
        return self.X.size

    def __getitem__(self, i) -> HomodyneSample:
        i = int(i)
        return HomodyneSample(float(self.phi[i]), float(self.X[i]), self.seed, i)

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def sample_homodyne(source, shots: int, seed: int = 0, M: int = N_PHASES,
                    norm_tol: float = 1e-6) -> HomodyneSamples:
    """phi ~ U[0, 2pi); X by inverse-CDF interpolation of the nearest computed phase column."""
    if int(shots) < 1:
        raise ValueError("shots must be >= 1")
    shots = int(shots)
    w = source if isinstance(source, Tomogram) else tomogram_from_charfunc(
        CharFunction(source), phi=phase_grid(M))
    M = w.phi.size
    res = w.normalization_residual()
    if res > norm_tol:
        raise NormalizationError(f"tomogram column normalization off by {res:.3e}")
    rng = np.random.Generator(np.random.Philox(seed))
    phi = rng.uniform(0.0, 2 * np.pi, shots)
    u = rng.uniform(0.0, 1.0, shots)
    col = np.rint(phi / (2 * np.pi / M)).astype(int) % M
    X = np.empty(shots)
    dens = np.clip(w.values, 0.0, None)
    for j in np.unique(col):
        cdf = cumulative_trapezoid(dens[:, j], w.X, initial=0.0)
        cdf /= cdf[-1]
        sel = col == j
        X[sel] = np.interp(u[sel], cdf, w.X)
    return HomodyneSamples(phi, X, int(seed), M)


def expect_from_samples(samples: HomodyneSamples, m: int, n: int,
                        convention: ConventionReport) -> tuple[float, float]:
    if len(samples) == 0:
        raise ValueError("no samples")
    a = dual_symbol_poly(m, n, convention)(samples.X, samples.phi)
    est = 2 * np.pi * float(np.mean(a))
    sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    return est, 2 * np.pi * sd / np.sqrt(a.size)


# ---------------------------------------------------------------- reports

@dataclass
class ExpectationReport:
    state: str
    m: int
    n: int
    values: dict = field(default_factory=dict)
    stderr: float | None = None
    errors: dict = field(default_factory=dict)
    max_pairwise_deviation: float = 0.0
    flags: list = field(default_factory=list)

    def finalize(self, tol: float = DETERMINISTIC_TOL, sigmas: float = SAMPLED_SIGMAS):
        det = [v for r, v in self.values.items() if r in DETERMINISTIC_ROUTES]
        self.max_pairwise_deviation = float(max((abs(a - b) for a, b in
                                                 itertools.combinations(det, 2)), default=0.0))
        flags = []
        if "trace" not in self.values:
            flags.append("trace:missing")
        for r, a_ in self.values.items():
            if r == "sampled" or r not in DETERMINISTIC_ROUTES:
                continue
            for r2, b in self.values.items():
                if r2 in DETERMINISTIC_ROUTES and r < r2 and abs(a_ - b) > tol:
                    flags.append(f"{r}-{r2}:deviation")
        if "sampled" in self.values and "trace" in self.values:
            # constant estimators have zero stderr; allow for rounding in the mean
            band = max(sigmas * (self.stderr or 0.0), 1e-12 * max(1.0, abs(self.values["trace"])))
            if abs(self.values["sampled"] - self.values["trace"]) > band:
                flags.append("sampled:outside")
        flags += [f"{r}:error" for r in self.errors]
        self.flags = flags
        return self

    @property
    def ok(self) -> bool:
        return not self.flags

    def rows(self):
        ref = self.values.get("trace")
        for route, v in self.values.items():
            dev = abs(v - ref) if ref is not None else float("nan")
            if route == "sampled":
                flag = "outside" if "sampled:outside" in self.flags else "ok"
            else:
                flag = "deviation" if any(f.endswith(":deviation") and route in f.split(":")[0].split("-")
                                          for f in self.flags) else "ok"
            yield (self.state, self.m, self.n, route, v, dev, flag)
        for route, msg in self.errors.items():
            yield (self.state, self.m, self.n, route, float("nan"), float("nan"), "error")

    def to_json(self) -> dict:
        return {"state": self.state, "m": self.m, "n": self.n, "values": self.values,
                "stderr": self.stderr, "errors": self.errors,
                "max_pairwise_deviation": self.max_pairwise_deviation, "flags": self.flags}

    @classmethod
    def from_json(cls, d: dict) -> "ExpectationReport":
        return cls(d["state"], d["m"], d["n"], d["values"], d.get("stderr"), d.get("errors", {}),
                   d.get("max_pairwise_deviation", 0.0), d.get("flags", []))


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in reports:
        for row in r.rows():
            wr.writerow([row[0], row[1], row[2], row[3], repr(row[4]), repr(row[5]), row[6]])
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True)


@dataclass(frozen=True, eq=False)
class RouteGrids:
    X: np.ndarray = field(default_factory=lambda: X_GRID)
    phi: np.ndarray = field(default_factory=lambda: phase_grid(N_PHASES))
    t: np.ndarray = field(default_factory=lambda: T_GRID)
    qp: np.ndarray = field(default_factory=lambda: QP_GRID)


def resolve_state(state) -> DensityMatrix:
    """A DensityMatrix, or a descriptor dict {kind, N, **params}."""
    if isinstance(state, DensityMatrix):
        return state
    d = dict(state)
    kind = d.pop("kind")
    N = int(d.pop("N", 40))
    return make_state(kind, N, **d)


def cross_validate(state, max_order: int, convention: ConventionReport, grids: RouteGrids | None = None,
                   shots: int = 0, seed: int = 0, routes=DETERMINISTIC_ROUTES) -> list[ExpectationReport]:
    """Every (m, n) with m + n <= max_order through every route.

    A failing route is recorded in the report's errors and flags; the sweep continues.
    """
    rho = resolve_state(state)
    grids = grids or RouteGrids()
    label = _state_label(rho)
    F = CharFunction(rho)
    cache = {}

    def lazy(name, build):
        if name not in cache:
            try:
                cache[name] = build()
            except Exception as exc:  # reported per order below
                cache[name] = exc
        return cache[name]

    builders = {
        "tomographic": lambda: tomogram_from_charfunc(F, grids.X, grids.phi, grids.t),
        "wigner": lambda: wigner_from_fock(rho, grids.qp, grids.qp),
        "sampled": lambda: sample_homodyne(lazy("tomographic", builders["tomographic"]), shots, seed),
    }
    reports = []
    for order in range(max_order + 1):
        for m in range(order, -1, -1):
            n = order - m
            rep = ExpectationReport(label, m, n)
            todo = list(routes) + (["sampled"] if shots else [])
            for route in todo:
                try:
                    if route == "trace":
                        rep.values[route] = expect_trace(rho, m, n)
                    elif route == "charderiv":
                        rep.values[route] = expect_charderiv(F, m, n)
                    else:
                        obj = lazy(route, builders[route])
                        if isinstance(obj, Exception):
                            raise obj
                        if route == "tomographic":
                            rep.values[route] = expect_tomographic(obj, m, n, convention)
                        elif route == "wigner":
                            rep.values[route] = expect_wigner(obj, m, n)
                        else:
                            rep.values[route], rep.stderr = expect_from_samples(obj, m, n, convention)
                except Exception as exc:
                    rep.errors[route] = f"{type(exc).__name__}: {exc}"
            reports.append(rep.finalize())
    return reports
