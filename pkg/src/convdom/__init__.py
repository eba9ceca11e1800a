"""Convolution-dominated matrices over finitely generated groups.

Matrices are stored by side-diagonals and manipulated as elements of a
twisted convolution algebra; finite sections give dense views for
inversion and operator-norm experiments.
"""
from .algebra import (CDMatrix, CertifiedRegion, DenseSection, SupportOverflow, VectorSection,
                      add, adjoint, apply, cd_norm, cd_norm_w, compose, envelope_of, from_dense,
                      identity, multiplication, product_region, random_cdmatrix, scale,
                      section_operator, shift, star_power, to_dense, toeplitz)
from .envelopes import (Envelope, TruncationError, Weight, convolve, grs_diagnostic,
                        induced_weight_v, l1_norm, l1w_norm, ratio_condition, sphere_sums,
                        ugrs_diagnostic)
from .groups import (F2, H3, Ball, GroupError, GroupMismatch, GroupSpec, HypothesisViolation,
                     OutOfRadius, ResourceLimit, Z, ball, growth_fit, parse_group)
from .inversion import (InversionReport, NotContractive, SingularSection, TestMatrixSpec,
                        envelope_convergence_study, finite_section_inverse,
                        lp_condition_experiment, make_test_matrix, neumann_inverse,
                        weighted_inverse_check)
from .representations import (BiVectorSection, SpectralEstimate, R_omega_apply,
                              check_intertwining, check_normid, lambda_D_apply, opnorm_estimate,
                              shear_S, shear_S_inv, single_diag_opnorm_check, specrad_L_estimate)

__version__ = "0.1.0"
