"""Optical tomograms, dual symbols and tomographic mean values on a truncated Fock space."""
from .charfunc import CharFunction, moment_from_charfunc, parseval_pair
from .dual import (ConventionReport, DualSymbol, ResolventQuery, calibrate_convention,
                   dual_symbol_poly, dual_symbol_resolvent, regularized_pairing,
                   resolvent_fourier_check)
from .expectation import (ExpectationReport, cross_validate, expect_charderiv, expect_from_samples,
                          expect_tomographic, expect_trace, expect_wigner, sample_homodyne)
from .fock import (DensityMatrix, FockOperator, ladder_ops, make_state, number_op, quadrature_ops,
                   sym_product, trace_pair)
from .tomogram import (Tomogram, WignerGrid, symplectic_tomogram, tomogram_direct,
                       tomogram_from_charfunc, tomogram_radon, wigner_from_fock,
                       wigner_from_tomogram)
from .trigpoly import (TrigPolynomial, biorthogonal_Q, biorthogonal_Qtilde, gram_matrix,
                       verify_reference_table)

__all__ = [name for name in dir() if not name.startswith("_")]
