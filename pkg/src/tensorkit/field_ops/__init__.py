"""Differential operators on fields and the identity / integral-theorem harness."""

from .curvilinear import OPS, SYSTEMS, builtin_scale_factors, curvilinear_op
from .differential import (FIRST_DERIVATIVE, SECOND_DERIVATIVE, FDScheme, adotnabla, as_field,
                           curl, curl_rank2, div, div_rank2, grad, grad_vec, laplacian, partial,
                           second_partial)
from .expression import evaluate_field_expression
from .fields import (ConstantField, FieldSet, PolynomialField, position_field,
                     random_field_set, random_polynomial_field, random_symmetric_rank2_field)
from .identities import (CASE_IDS, CASES, SECOND_DERIVATIVE_CASES, IdentityCase, get_case,
                         verify_all, verify_identity)
from .integrals import Rectangle, convergence_ratios, divergence_theorem_check, stokes_check
