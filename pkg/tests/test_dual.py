import json

import numpy as np
import pytest

from tomodual.dual import (CalibrationError, CalibrationRequiredError, ConditioningError,
                           ContinuationError, ConventionReport, GridDecayError, ResolventQuery,
                           calibrate_convention, dual_symbol_poly, dual_symbol_resolvent,
                           pair_with_tomogram, regularized_pairing, resolvent_fourier_check,
                           resolvent_symbol_grid, rotated_quadrature)
from tomodual.fock import FockOperator, make_state, sym_product, trace_pair
from tomodual.trigpoly import biorthogonal_Q

EPS = (0.4, 0.2, 0.1)


@pytest.fixture(scope="module")
def vac64():
    return make_state("fock", 64, n=0)


def test_calibration_selects_unique_rule(convention):
    assert (convention.index_rule, convention.phase_rule) == ("n", "m+n")
    assert len(convention.residuals) == 6
    assert convention.residuals[("n", "m+n")] < 1e-5
    others = [r for k, r in convention.residuals.items() if k != ("n", "m+n")]
    assert min(others) > 1e-2
    assert convention.index(1, 0) == 0 and convention.index(0, 1) == 1


def test_calibration_evidence(convention):
    rows = [e for e in convention.evidence if (e["m"], e["n"]) == (0, 0)]
    assert all(e["residual"] < 1e-8 for e in rows)
    row = next(e for e in convention.evidence
               if e["state"].startswith("coherent(alpha=1)") and (e["m"], e["n"]) == (1, 0)
               and e["index_rule"] == "n" and e["phase_rule"] == "m+n")
    assert row["target"][0] == pytest.approx(np.sqrt(2), abs=1e-10)
    assert row["pairing"] == pytest.approx(np.sqrt(2), abs=1e-8)
    sq = [e for e in convention.evidence if e["state"].startswith("squeezed")
          and (e["m"], e["n"]) == (2, 1) and e["index_rule"] == "n" and e["phase_rule"] == "m+n"]
    assert sq and sq[0]["residual"] < 1e-5


def test_calibration_json_roundtrip(convention):
    back = ConventionReport.from_json(json.loads(convention.dumps()))
    assert back.index_rule == "n" and back.residuals == convention.residuals


def test_calibration_fails_with_impossible_tolerance(states, tomograms):
    keys = ["vacuum", "coherent_1"]
    with pytest.raises(CalibrationError) as ei:
        calibrate_convention(40, [states[k] for k in keys], 1, tol=1e-30,
                             tomograms=[tomograms[k] for k in keys])
    assert ei.value.report is not None and len(ei.value.report.residuals) == 6


def test_calibration_ambiguous_without_odd_moments(states, tomograms):
    keys = ["vacuum", "thermal"]
    with pytest.raises(CalibrationError):
        calibrate_convention(40, [states[k] for k in keys], 2,
                             tomograms=[tomograms[k] for k in keys])


def test_dual_symbol_poly(convention, tomograms):
    phi = np.linspace(0, 2 * np.pi, 9)
    a00 = dual_symbol_poly(0, 0, convention)
    assert np.allclose(a00(1.7, phi), 1 / (2 * np.pi))
    assert np.allclose(dual_symbol_poly(1, 0, convention)(2.0, phi), 2 * np.cos(phi) / np.pi)
    assert np.allclose(dual_symbol_poly(0, 1, convention)(2.0, phi), 2 * np.sin(phi) / np.pi)
    for w in tomograms.values():
        assert pair_with_tomogram(w, a00.trig, 0) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(CalibrationRequiredError):
        dual_symbol_poly(1, 0, None)
    with pytest.raises(CalibrationRequiredError):
        dual_symbol_poly(1, 0, ConventionReport(None, None, {}))
    with pytest.raises(ValueError):
        dual_symbol_poly(7, 6, convention)


def test_poly_pairing_up_to_order_six(states, tomograms, convention):
    for k in ("coherent_i", "squeezed"):
        rho, w = states[k], tomograms[k]
        for m, n in [(3, 3), (6, 0), (1, 5), (2, 3)]:
            a = dual_symbol_poly(m, n, convention)
            ref = trace_pair(rho, sym_product(m, n, rho.dim)).real
            assert abs(pair_with_tomogram(w, a.trig, m + n) - ref) < 1e-5


def test_resolvent_routes_agree(vac64):
    rq = ResolventQuery(0.0, 1.0, 0.0)
    a_solve = dual_symbol_resolvent(vac64, rq, "solve")
    a_eig = dual_symbol_resolvent(vac64, rq, "eig")
    assert abs(a_solve - a_eig) < 1e-10
    # independent: eigenvectors of q from scipy directly, weights |<0|v_k>|^2
    x = rotated_quadrature(64, 0.0)
    lam, V = np.linalg.eigh(x)
    ref = -2 * np.pi * np.sum(np.abs(V[0]) ** 2 / (1j - lam) ** 2)
    assert abs(a_solve - ref) < 1e-10
    for X, eps, phi in [(0.3, 0.1, 0.7), (-2.0, 0.05, 2.0)]:
        rq = ResolventQuery(X, eps, phi)
        assert abs(dual_symbol_resolvent(vac64, rq) - dual_symbol_resolvent(vac64, rq, "eig")) < 1e-8


def test_resolvent_linearity(vac64):
    rq = ResolventQuery(0.5, 0.2, 1.0)
    assert dual_symbol_resolvent(np.zeros((64, 64)), rq) == 0
    coh = make_state("coherent", 64, alpha=0.5)
    a1 = dual_symbol_resolvent(vac64, rq)
    a2 = dual_symbol_resolvent(FockOperator(2 * vac64.matrix), rq)
    assert abs(a2 - 2 * a1) < 1e-12 * abs(a1)
    a3 = dual_symbol_resolvent(FockOperator(vac64.matrix + coh.matrix), rq)
    assert abs(a3 - a1 - dual_symbol_resolvent(coh, rq)) < 1e-12 * abs(a3)


def test_resolvent_grid_matches_pointwise(vac64):
    X = np.array([-1.0, 0.0, 2.5])
    g = resolvent_symbol_grid(vac64, X, 0.3, 0.4)
    pts = [dual_symbol_resolvent(vac64, ResolventQuery(x, 0.3, 0.4)) for x in X]
    assert np.allclose(g, pts, atol=1e-10)


def test_resolvent_conditioning(vac64):
    with pytest.raises(ConditioningError):
        dual_symbol_resolvent(vac64, ResolventQuery(0.0, 0.05, 0.0), cond_max=10.0)
    with pytest.raises(ValueError):
        ResolventQuery(0.0, 0.0, 0.0)


def test_resolvent_fourier_trend(vac64):
    coh = make_state("coherent", 64, alpha=1.0)
    for A, t, phi in [(vac64, 1.0, 0.0), (coh, 0.5, 0.0), (coh, 2.0, np.pi / 3)]:
        errs = []
        for eps in EPS:
            lhs, rhs = resolvent_fourier_check(A, t, phi, eps)
            errs.append(abs(lhs - rhs))
            # closed form of the regularized transform: rhs = lhs * exp(-t eps)
            assert abs(rhs - lhs * np.exp(-t * eps)) < 1e-8
        assert all(b < 0.9 * a for a, b in zip(errs, errs[1:]))


def test_resolvent_fourier_negative_t(vac64):
    _, rhs = resolvent_fourier_check(vac64, -1.0, 0.0, 0.1)
    assert abs(rhs) < 1e-3


def test_resolvent_fourier_grid_decay(vac64):
    with pytest.raises(GridDecayError):
        resolvent_fourier_check(vac64, 1.0, 0.0, 0.1, X=np.linspace(-3, 3, 301))


def test_pairing_linear_and_eps_independent(vac64):
    coh = make_state("coherent", 64, alpha=1.0)
    zero = np.zeros((64, 64))
    assert regularized_pairing(vac64, zero, 0.2) == 0
    vals = [regularized_pairing(coh, vac64, eps) for eps in EPS]
    # the continued integrand is analytic in the strip, so every eps gives one value,
    # (2 pi)^2 Tr(rho A) in these normalizations
    target = 4 * np.pi**2 * trace_pair(coh, vac64).real
    assert max(abs(v - target) for v in vals) < 1e-8


def test_pairing_continuation_error(vac64):
    with pytest.raises(ContinuationError):
        regularized_pairing(vac64, vac64, 0.4, t=np.linspace(-4, 4, 401))
    with pytest.raises(ValueError):
        regularized_pairing(vac64, vac64, 0.0)


def test_symbol_trig_degree_guard(convention):
    from tomodual.dual import DualSymbol
    with pytest.raises(ValueError):
        DualSymbol(1, 1, biorthogonal_Q(1)[0])
