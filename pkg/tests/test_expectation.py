import csv
import io
import json

import numpy as np
import pytest

from tomodual.expectation import (CSV_HEADER, ExpectationReport, MomentOverflowError,
                                  NormalizationError, RouteGrids, cross_validate, expect_charderiv,
                                  expect_from_samples, expect_tomographic, expect_trace,
                                  expect_wigner, reports_to_csv, reports_to_json,
                                  sample_homodyne)
from tomodual.fock import make_state
from tomodual.tomogram import Tomogram, wigner_from_fock


def test_trace_examples():
    vac = make_state("fock", 16, n=0)
    assert expect_trace(vac, 0, 0) == 1
    assert expect_trace(vac, 2, 0) == pytest.approx(0.5)
    assert expect_trace(make_state("fock", 16, n=1), 2, 0) == pytest.approx(1.5)


def test_tomographic_examples(tomograms, convention):
    for w in tomograms.values():
        assert expect_tomographic(w, 0, 0, convention) == pytest.approx(1.0, abs=1e-8)
    assert expect_tomographic(tomograms["vacuum"], 2, 0, convention) == pytest.approx(0.5, abs=1e-6)
    assert expect_tomographic(tomograms["coherent_1"], 1, 0, convention) == pytest.approx(
        np.sqrt(2), abs=1e-6)


def test_tomographic_overflow(states, convention):
    from tomodual.charfunc import CharFunction
    from tomodual.tomogram import tomogram_from_charfunc
    w = tomogram_from_charfunc(CharFunction(states["squeezed"]), X=np.linspace(-4, 4, 257))
    with pytest.raises(MomentOverflowError, match="X range of about"):
        expect_tomographic(w, 3, 3, convention)


def test_wigner_examples(states):
    W = wigner_from_fock(states["vacuum"])
    assert abs(expect_wigner(W, 1, 1)) < 1e-12
    assert expect_wigner(W, 2, 0) == pytest.approx(0.5, abs=1e-6)
    Ws = wigner_from_fock(states["squeezed"])
    assert expect_wigner(Ws, 2, 0) == pytest.approx(np.exp(-1) / 2, abs=1e-5)
    assert expect_wigner(Ws, 2, 0) == pytest.approx(expect_trace(states["squeezed"], 2, 0), abs=1e-8)
    small = wigner_from_fock(states["coherent_1"], np.linspace(-3, 3, 97), np.linspace(-3, 3, 97))
    with pytest.raises(MomentOverflowError):
        expect_wigner(small, 2, 0)


def test_charderiv_examples(states):
    assert expect_charderiv(states["vacuum"], 0, 0) == 1
    assert expect_charderiv(states["vacuum"], 2, 0) == pytest.approx(0.5, abs=1e-6)
    assert abs(expect_charderiv(states["coherent_1"], 1, 1)) < 1e-6


@pytest.fixture(scope="module")
def vac_samples(tomograms):
    return sample_homodyne(tomograms["vacuum"], 100_000, seed=7)


def test_sampling_statistics(vac_samples):
    X = vac_samples.X
    n = X.size
    assert abs(X.mean()) < 4 * np.sqrt(0.5 / n)
    # Var(X^2) = E X^4 - (E X^2)^2 = 3/4 - 1/4 for variance 1/2
    assert abs(X.var() - 0.5) < 4 * np.sqrt(0.5 / n)
    assert np.all((vac_samples.phi >= 0) & (vac_samples.phi < 2 * np.pi))


def test_sampling_determinism(tomograms, vac_samples):
    again = sample_homodyne(tomograms["vacuum"], 100_000, seed=7)
    assert np.array_equal(again.X, vac_samples.X) and np.array_equal(again.phi, vac_samples.phi)
    other = sample_homodyne(tomograms["vacuum"], 100_000, seed=8)
    assert not np.array_equal(other.X, vac_samples.X)
    s = vac_samples[3]
    assert s.seed == 7 and s.index == 3 and s.X == vac_samples.X[3]
    assert len(list(iter(sample_homodyne(tomograms["vacuum"], 5, seed=1)))) == 5


def test_sampling_errors(tomograms):
    w = tomograms["vacuum"]
    with pytest.raises(ValueError):
        sample_homodyne(w, 0)
    bad = Tomogram(w.X, w.phi, 2 * w.values)
    with pytest.raises(NormalizationError):
        sample_homodyne(bad, 10)


def test_estimates_from_samples(tomograms, convention, vac_samples):
    est, err = expect_from_samples(vac_samples, 0, 0, convention)
    assert est == pytest.approx(1.0, abs=1e-12) and err < 1e-12
    big = sample_homodyne(tomograms["coherent_1"], 1_000_000, seed=3)
    est, err = expect_from_samples(big, 1, 0, convention)
    assert abs(est - np.sqrt(2)) < 4 * err
    bigv = sample_homodyne(tomograms["vacuum"], 1_000_000, seed=4)
    est, err = expect_from_samples(bigv, 2, 0, convention)
    assert abs(est - 0.5) < 4 * err


def test_cross_validate_examples(states, convention):
    reps = cross_validate(states["vacuum"], 2, convention)
    assert len(reps) == 6 and all(r.ok for r in reps)
    reps = cross_validate(states["coherent_1"], 4, convention)
    assert len(reps) == 15 and all(r.ok for r in reps)
    r10 = next(r for r in cross_validate(states["fock1"], 1, convention) if (r.m, r.n) == (1, 0))
    assert all(abs(v) < 1e-5 for v in r10.values.values())
    assert set(r10.values) == {"trace", "tomographic", "wigner", "charderiv"}


def test_cross_validate_captures_route_errors(convention):
    grids = RouteGrids(X=np.linspace(-3, 3, 193))
    reps = cross_validate({"kind": "squeezed", "N": 40, "r": 0.5}, 6, convention, grids)
    assert len(reps) == 28
    assert any("tomographic" in r.errors for r in reps)
    assert all("trace" in r.values for r in reps)
    flagged = [r for r in reps if "tomographic:error" in r.flags]
    assert flagged


def test_report_serialization(states, convention):
    reps = cross_validate(states["vacuum"], 1, convention, shots=1000, seed=2)
    text = reports_to_csv(reps)
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 3 * 5
    back = [ExpectationReport.from_json(d) for d in json.loads(reports_to_json(reps))]
    assert [b.values for b in back] == [r.values for r in reps]
    assert reports_to_csv(cross_validate(states["vacuum"], 1, convention, shots=1000, seed=2)) == text


def test_report_flags():
    r = ExpectationReport("s", 1, 0, {"trace": 1.0, "wigner": 1.1, "sampled": 2.0}, stderr=0.1)
    r.finalize()
    assert "trace-wigner:deviation" in r.flags and "sampled:outside" in r.flags
    assert r.max_pairwise_deviation == pytest.approx(0.1)
    flags = {row[3]: row[6] for row in r.rows()}
    assert flags == {"trace": "deviation", "wigner": "deviation", "sampled": "outside"}
