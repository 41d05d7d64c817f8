"""
Mean values of symmetrized products by five routes
==================================================

trace (the oracle), tomographic pairing with the dual symbol, the Wigner
integral of q^m p^n, derivatives of the characteristic function, and the
sample mean over simulated homodyne records.
"""
import numpy as np

from tomodual import calibrate_convention, cross_validate, make_state

conv = calibrate_convention(40)
rho = make_state("squeezed", 40, r=0.5, theta=0.6)

reports = cross_validate(rho, 3, conv, shots=200_000, seed=11)
routes = ("trace", "tomographic", "wigner", "charderiv", "sampled")
print(f"{'(m,n)':6s}" + "".join(f"{r:>14s}" for r in routes) + f"{'stderr':>10s}")
for r in reports:
    vals = "".join(f"{r.values.get(k, np.nan):14.8f}" for k in routes)
    print(f"({r.m},{r.n})  {vals}{r.stderr:10.1e}" + ("  " + ",".join(r.flags) if r.flags else ""))

print("\nlargest deviation among the deterministic routes:",
      f"{max(r.max_pairwise_deviation for r in reports):.1e}")
