"""
Resolvent symbols and their epsilon behaviour
=============================================

For a bounded observable the dual symbol is -2 pi Tr(A (z - x_phi)^-2).
Its Fourier transform along X - i eps reproduces t F_A(t) damped by
exp(-t eps), and its pairing with the continued tomogram is evaluated for a
few offsets.
"""
import numpy as np

from tomodual import (ResolventQuery, dual_symbol_resolvent, make_state, regularized_pairing,
                      resolvent_fourier_check, trace_pair)

A = make_state("fock", 64, n=0)  # vacuum projector as the observable

# two linear-algebra routes for the same symbol value
rq = ResolventQuery(X=0.0, eps=1.0, phi=0.0)
print("solve:", dual_symbol_resolvent(A, rq, "solve"))
print("eig:  ", dual_symbol_resolvent(A, rq, "eig"))

# lhs = t Tr(A e^{itx_phi}); rhs is the regularized transform
print(f"\n{'t':>4s} {'eps':>5s} {'|lhs - rhs|':>12s} {'|lhs|(1-e^-t eps)':>18s}")
for t in (0.5, 1.0, 2.0):
    for eps in (0.4, 0.2, 0.1):
        lhs, rhs = resolvent_fourier_check(A, t, np.pi / 3, eps)
        print(f"{t:4.1f} {eps:5.2f} {abs(lhs - rhs):12.6f} {abs(lhs) * (1 - np.exp(-t * eps)):18.6f}")
_, rhs = resolvent_fourier_check(A, -1.0, 0.0, 0.1)
print(f"t = -1: |rhs| = {abs(rhs):.1e}")

# pairing of the analytically continued tomogram with the symbol
print()
for rho in (make_state("fock", 64, n=0), make_state("coherent", 64, alpha=1.0)):
    tr = trace_pair(rho, A).real
    for eps in (0.4, 0.1):
        P = regularized_pairing(rho, A, eps).real
        print(f"{rho.label:18s} eps={eps:.1f} pairing {P:10.6f}  Tr(rho A) {tr:.6f}  "
              f"ratio {P / tr:.6f}  (4 pi^2 = {4 * np.pi**2:.6f})")
