import numpy as np
import pytest
from scipy.integrate import quad

from tomodual.charfunc import CharFunction, DomainError, hermite_functions, kernel_from_fock
from tomodual.fock import make_state
from tomodual.tomogram import (X_GRID, DecayError, phase_grid, symplectic_tomogram,
                               tomogram_direct, tomogram_from_charfunc, tomogram_radon,
                               wigner_from_fock, wigner_from_kernel, wigner_from_tomogram)


@pytest.fixture(scope="module")
def wigners(states):
    return {k: wigner_from_fock(rho) for k, rho in states.items()}


def test_vacuum_wigner():
    vac = make_state("fock", 40, n=0)
    g = np.linspace(-4, 4, 33)
    W = wigner_from_kernel(kernel_from_fock(vac), g, g)
    Q, P = np.meshgrid(g, g, indexing="ij")
    assert np.max(np.abs(W.values - np.exp(-Q**2 - P**2) / np.pi)) < 1e-6


def test_fock1_negativity_by_quadrature():
    f1 = make_state("fock", 40, n=1)
    W = wigner_from_fock(f1)
    assert W.at(0, 0) == pytest.approx(-1 / np.pi, abs=1e-8)
    # defining integral with psi_1(x) = sqrt(2) pi^(-1/4) x exp(-x^2/2)
    psi1 = lambda x: np.sqrt(2) * np.pi**-0.25 * x * np.exp(-x**2 / 2)  # noqa: E731
    brute = quad(lambda x: psi1(x / 2) * psi1(-x / 2), -20, 20)[0] / (2 * np.pi)
    assert W.at(0, 0) == pytest.approx(brute, abs=1e-8)


def test_wigner_normalization_and_peaks(wigners):
    for W in wigners.values():
        assert W.normalization == pytest.approx(1.0, abs=1e-8)
    W = wigners["coherent_1"]
    i, j = np.unravel_index(np.argmax(W.values), W.values.shape)
    h = W.q[1] - W.q[0]
    assert abs(W.q[i] - np.sqrt(2)) <= h and abs(W.p[j]) <= h
    assert wigners["thermal"].at(0, 0) == pytest.approx(1 / (2 * np.pi), abs=1e-8)


def test_vacuum_tomogram(tomograms):
    w = tomograms["vacuum"]
    ref = np.exp(-w.X**2) / np.sqrt(np.pi)
    assert np.max(np.abs(w.values - ref[:, None])) < 1e-8


def test_fock1_tomogram(tomograms):
    w = tomograms["fock1"]
    ref = 2 * w.X**2 / np.sqrt(np.pi) * np.exp(-w.X**2)
    assert np.max(np.abs(w.values - ref[:, None])) < 1e-8


def test_invariants(tomograms):
    for w in tomograms.values():
        inv = w.invariants()
        assert inv["normalization"] < 1e-6
        assert inv["min_value"] >= -1e-8
        assert inv["pi_shift"] < 1e-8


def test_direct_route_agrees(states, tomograms):
    for k in ("fock1", "coherent_i", "squeezed"):
        d = tomogram_direct(states[k])
        assert np.max(np.abs(d.values - tomograms[k].values)) < 1e-10


def test_radon_route(wigners, tomograms):
    phi = phase_grid(16)
    for k in ("vacuum", "fock1", "squeezed"):
        r = tomogram_radon(wigners[k], phi=phi)
        ref = tomograms[k].values[:, ::8]
        assert np.max(np.abs(r.values - ref)) < 1e-5
    r = tomogram_radon(wigners["vacuum"], phi=phi)
    assert np.max(np.abs(r.values - r.values[:, :1])) < 1e-8


def test_radon_rejects_truncated_wigner(states):
    W = wigner_from_fock(states["coherent_1"], np.linspace(-2, 2, 65), np.linspace(-2, 2, 65))
    with pytest.raises(DecayError):
        tomogram_radon(W)


def test_short_t_grid_raises(states):
    with pytest.raises(DecayError):
        tomogram_from_charfunc(CharFunction(states["vacuum"]), t=np.linspace(-3, 3, 101))
    with pytest.raises(ValueError):
        tomogram_from_charfunc(CharFunction(states["vacuum"]), t=np.linspace(-3, 4, 101))


def test_symplectic(states, tomograms):
    F = CharFunction(states["squeezed"])
    w = tomograms["squeezed"]
    for c in (0, 5, 40):
        ph = w.phi[c]
        val = symplectic_tomogram(F, w.X[::40], np.cos(ph), np.sin(ph))
        assert np.max(np.abs(val - w.values[::40, c])) < 1e-10
    Fv = CharFunction(states["vacuum"])
    assert symplectic_tomogram(Fv, 0.0, 2.0, 0.0) == pytest.approx(1 / (2 * np.sqrt(np.pi)), abs=1e-12)
    with pytest.raises(DomainError):
        symplectic_tomogram(Fv, 0.0, 0.0, 0.0)


def test_symplectic_position_marginal(states):
    rho = states["coherent_i"]
    x = np.linspace(-4, 4, 17)
    psi = hermite_functions(rho.dim, x)
    dens = np.einsum("jx,jk,kx->x", psi, rho.matrix, psi).real
    val = symplectic_tomogram(CharFunction(rho), x, 1.0, 0.0)
    assert np.max(np.abs(val - dens)) < 1e-10


def test_inverse_radon(tomograms, wigners):
    W = wigner_from_tomogram(tomograms["vacuum"])
    Q, P = np.meshgrid(W.q, W.p, indexing="ij")
    assert np.max(np.abs(W.values - np.exp(-Q**2 - P**2) / np.pi)) < 1e-3
    assert wigner_from_tomogram(tomograms["fock1"]).at(0, 0) < 0
    back = tomogram_radon(W, decay_tol=1e-5)
    assert np.max(np.abs(back.values - tomograms["vacuum"].values)) < 1e-3


def test_inverse_radon_warns_on_few_phases(tomograms):
    w = tomograms["vacuum"]
    from tomodual.tomogram import Tomogram
    sparse = Tomogram(w.X, w.phi[::4], w.values[:, ::4])
    W = wigner_from_tomogram(sparse, np.linspace(-2, 2, 5), np.linspace(-2, 2, 5))
    assert W.meta["warnings"]


def test_default_grid_contains_zero():
    assert np.any(X_GRID == 0.0)
