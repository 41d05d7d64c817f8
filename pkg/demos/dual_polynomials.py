"""
Biorthogonal trigonometric polynomials and the symbol convention
================================================================

The polynomial dual symbols are trig(phi) * X^(m+n) with trig drawn from a
biorthogonal family built in exact rational arithmetic. Which member goes
with which symmetrized product is settled by calibration against the trace.
"""
from tomodual import biorthogonal_Q, calibrate_convention, gram_matrix, verify_reference_table

# Gram matrix of sin^k cos^(n-k), in units of 2 pi
G = gram_matrix(3)
for row in G.entries:
    print("  ".join(f"{str(v):>6s}" for v in row))
print("det =", G.determinant())

# every member integrates exactly to a Kronecker delta against the basis
for n in (2, 5):
    for m, q in enumerate(biorthogonal_Q(n)):
        print(f"Q_{n}^{m} = {q}")

# comparison with the published low-order list
rep = verify_reference_table()
print()
print(rep.summary())

# calibration: two index rules times three phase rules, one survives
conv = calibrate_convention(40)
print()
for (j, e), r in sorted(conv.residuals.items()):
    mark = "<-" if (j, e) == (conv.index_rule, conv.phase_rule) else ""
    print(f"index j = {j:<3s} phase power {e:<4s} max residual {r:9.2e} {mark}")
