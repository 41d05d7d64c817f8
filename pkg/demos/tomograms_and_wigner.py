"""
Tomograms of fixture states, three ways
=======================================

Build a few states, compute their optical tomograms through the Fourier,
direct and Radon routes, and reconstruct a Wigner function back from a
tomogram by filtered back-projection.
"""
import numpy as np

from tomodual import (CharFunction, make_state, tomogram_direct, tomogram_from_charfunc,
                      tomogram_radon, wigner_from_fock, wigner_from_tomogram)

# states live on a 40-level truncation; the tail mass left outside is tiny
states = {
    "vacuum": make_state("fock", 40, n=0),
    "fock 1": make_state("fock", 40, n=1),
    "coherent 1+0.5j": make_state("coherent", 40, alpha=1 + 0.5j),
    "squeezed r=0.5": make_state("squeezed", 40, r=0.5),
}
for name, rho in states.items():
    print(f"{name:16s} purity {rho.purity:.6f}  tail {rho.tail_mass:.1e}")

# %% Fourier route, checked against the direct Hermite-function formula
print("\nroute comparison (max |difference| over the 641 x 128 grid)")
tomos = {}
for name, rho in states.items():
    w = tomogram_from_charfunc(CharFunction(rho))
    tomos[name] = w
    d = tomogram_direct(rho)
    inv = w.invariants()
    print(f"{name:16s} direct {np.abs(w.values - d.values).max():.1e}   "
          f"normalization {inv['normalization']:.1e}   min {inv['min_value']:.1e}")

# %% the Radon transform of the Wigner function gives the same columns
phi = np.linspace(0, np.pi, 5)
for name in ("fock 1", "squeezed r=0.5"):
    W = wigner_from_fock(states[name])
    r = tomogram_radon(W, phi=phi)
    f = tomogram_from_charfunc(CharFunction(states[name]), phi=phi)
    print(f"{name:16s} radon vs fourier {np.abs(r.values - f.values).max():.1e}")

# %% a quick look at the squeezed columns: width grows from phi = 0 to pi/2
w = tomos["squeezed r=0.5"]
for c in (0, 16, 32):
    var = np.trapezoid(w.X**2 * w.values[:, c], w.X)
    print(f"phi = {w.phi[c]:.3f}: <X^2> = {var:.6f}")

# %% back to phase space: filtered back-projection
W = wigner_from_tomogram(tomos["fock 1"])
print(f"\nreconstructed Fock-1 W(0, 0) = {W.at(0, 0):+.6f}  (exact {-1 / np.pi:+.6f})")
Wv = wigner_from_tomogram(tomos["vacuum"])
Q, P = np.meshgrid(Wv.q, Wv.p, indexing="ij")
print(f"vacuum reconstruction error {np.abs(Wv.values - np.exp(-Q**2 - P**2) / np.pi).max():.1e}")
