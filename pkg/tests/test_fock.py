import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tomodual.fock import (DensityMatrix, FockOperator, InvalidDimensionError, TruncationError,
                           ladder_ops, make_state, number_op, quadrature_ops, sym_product,
                           trace_pair)


def test_ladder_small():
    a, ad = ladder_ops(2)
    assert np.count_nonzero(a.entries) == 1 and a.entries[0, 1] == 1
    a4, _ = ladder_ops(4)
    assert a4.entries[2, 3] == pytest.approx(np.sqrt(3))


def test_ladder_commutator_block():
    a, ad = (o.entries for o in ladder_ops(16))
    c = a @ ad - ad @ a
    assert np.allclose(c[:15, :15], np.eye(15), atol=1e-12)
    assert c[15, 15] == pytest.approx(-15)


def test_quadratures():
    q, p = (o.entries for o in quadrature_ops(8))
    c = q @ p - p @ q
    assert np.allclose(c[:7, :7], 1j * np.eye(7), atol=1e-12)
    assert (q @ q)[0, 0].real == pytest.approx(0.5)
    q2, _ = quadrature_ops(2)
    assert q2.entries[0, 1] == pytest.approx(1 / np.sqrt(2))


def test_invalid_dimension():
    with pytest.raises(InvalidDimensionError):
        ladder_ops(1)
    with pytest.raises(InvalidDimensionError):
        FockOperator(np.zeros((2, 3)))


def _padded(N, extra):
    q, p = (o.entries for o in quadrature_ops(N + extra))
    return q, p


def test_sym_product_low_orders():
    assert np.allclose(sym_product(0, 0, 6).entries, np.eye(6))
    N = 10
    q, p = _padded(N, 4)
    ref = ((q @ p + p @ q) / 2)[:N, :N]
    assert np.allclose(sym_product(1, 1, N).entries, ref, atol=1e-12)


def test_sym_product_three_orderings():
    N = 10
    q, p = _padded(N, 5)
    ref = ((p @ q @ q + q @ p @ q + q @ q @ p) / 3)[:N, :N]
    assert np.allclose(sym_product(2, 1, N).entries, ref, atol=1e-12)


def test_sym_product_needs_room():
    with pytest.raises(TruncationError):
        sym_product(4, 4, 9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4))
def test_sym_product_hermitian(m, n):
    S = sym_product(m, n, 14).entries
    assert np.allclose(S, S.conj().T, atol=1e-12)


def test_make_state_examples():
    vac = make_state("fock", 16, n=0)
    assert np.allclose(vac.matrix, np.diag([1] + [0] * 15))
    coh = make_state("coherent", 24, alpha=1.0)
    assert trace_pair(coh, number_op(24)).real == pytest.approx(1.0, abs=1e-8)
    th = make_state("thermal", 24, nbar=0.5)
    d = np.diag(th.matrix).real
    assert np.allclose(d[1:] / d[:-1], 1 / 3)
    assert th.purity == pytest.approx(0.5, abs=1e-6)


def test_squeezed_variance():
    sq = make_state("squeezed", 40, r=0.5)
    assert trace_pair(sq, sym_product(2, 0, 40)).real == pytest.approx(np.exp(-1) / 2, abs=1e-10)
    assert trace_pair(sq, sym_product(0, 2, 40)).real == pytest.approx(np.exp(1) / 2, abs=1e-9)


def test_cat_parity():
    cat = make_state("cat", 30, alpha=1.0, parity=-1)
    odd = np.diag(cat.matrix).real[1::2].sum()
    assert odd == pytest.approx(1.0, abs=1e-12)


def test_truncation_errors():
    with pytest.raises(TruncationError) as ei:
        make_state("coherent", 8, alpha=3.0)
    assert ei.value.tail_mass > 1e-10
    with pytest.raises(TruncationError):
        make_state("fock", 4, n=4)
    with pytest.raises(ValueError):
        make_state("unknown", 4)


def test_density_validation():
    with pytest.raises(ValueError):
        DensityMatrix(FockOperator(np.array([[0.5, 1], [0, 0.5]])))
    with pytest.raises(ValueError):
        DensityMatrix(FockOperator(np.diag([0.5, 0.6])))
    with pytest.raises(ValueError):
        DensityMatrix(FockOperator(np.diag([1.5, -0.5])))


def test_trace_pair_examples():
    rho = make_state("thermal", 24, nbar=0.3)
    assert trace_pair(rho, np.eye(24)) == pytest.approx(1.0)
    assert trace_pair(make_state("fock", 8, n=0), sym_product(2, 0, 8)).real == pytest.approx(0.5)
    vals = [trace_pair(make_state("coherent", N, alpha=1.0), sym_product(1, 0, N)).real
            for N in (24, 32)]
    assert vals[0] == pytest.approx(np.sqrt(2), abs=1e-10)
    assert abs(vals[0] - vals[1]) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_coherent_mean_field(re, im):
    alpha = complex(re, im)
    rho = make_state("coherent", 40, alpha=alpha)
    a, _ = ladder_ops(40)
    assert abs(trace_pair(rho, a) - alpha) < 1e-8


def test_operator_algebra():
    q, p = quadrature_ops(6)
    s = q + p
    assert s.hermitian
    assert np.allclose((2 * q).entries, q.entries * 2)
    assert np.allclose(q.embed(8).entries[:6, :6], q.entries)
    with pytest.raises(InvalidDimensionError):
        q + quadrature_ops(7)[0]
    assert not (q @ p).hermitian
