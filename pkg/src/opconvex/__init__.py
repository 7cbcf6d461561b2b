"""Operator concavity and convexity of functions of several variables, checked numerically."""

from .certify import CertificationReport, MapSpec, build_map, certify, concavity_trial, crosscheck
from .errors import (
    ArityMismatch,
    BadParameter,
    DimensionMismatch,
    DomainViolation,
    NoIntegralForm,
    NonConvergence,
    NotCommuting,
    NotHermitian,
    OpConvexError,
    SingularDifferential,
    UnknownCheck,
    UnknownMap,
)
from .frechet import (
    PowerFunction,
    divided_difference,
    frechet_apply,
    frechet_inverse_apply,
    frechet_trace_form,
    loewner_matrix,
)
from .funcalc import CommutingTuple, joint_diagonalize, lr_apply, multivariate_apply, trace_form
from .kernels import QuadratureRule, ScalarKernel, gauss_legendre, kernel_eval, kernel_integral
from .matcore import (
    PdSamplerSpec,
    congruence_half,
    hermitian,
    loewner_margin,
    matrix_function,
    random_pd,
    spectral_decompose,
)
from .perspective import f1_map, f2_map, perspective_apply, pf2_apply

__version__ = "0.1.0"
