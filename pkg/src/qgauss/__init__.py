"""One-mode quantum Gaussian states on truncated Fock space.

Submodules
----------
fock
    Ladder, Weyl and squeezing operators; Hermite-function position grids.
gaussian
    Closed-form ``(w, S)`` parameters, channel laws and Gaussian moments.
states
    Truncated density matrices and the textual state grammar.
fourier
    Quantum Fourier transform, Weyl transform and phase-plane quadratures.
moments
    Yosida, finite-difference and closed-form moments; uncertainty; gaussianity test.
qms
    Monte Carlo and matrix-level Gaussian channels and the Brownian Weyl semigroup.
verify, cli
    Self-checks and the ``qgauss`` command line.
"""

from .errors import (
    AccuracyWarning,
    DomainError,
    InadmissibleCovarianceError,
    InvalidDimensionError,
    PrecisionWarning,
    QGaussError,
    ShapeError,
    TailClipWarning,
)
from .fock import canonical_operators, coherent_vector, ladder, squeeze_matrix, weyl_matrix
from .fourier import QuadratureGrid, inversion_error, parseval_check, qft, weyl_transform
from .gaussian import GaussianParams, NoiseMatrix, char_fn, make_gaussian
from .moments import (
    EpsSchedule,
    annihilation_observable,
    estimate_wS,
    gaussianity_test,
    moment_by_derivative,
    moment_by_yosida,
    moment_report,
)
from .qms import McConfig, bosonic_mc, qms_exact, qms_mc, semigroup_mc_check
from .states import parse_state

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "DomainError",
    "EpsSchedule",
    "GaussianParams",
    "InadmissibleCovarianceError",
    "InvalidDimensionError",
    "McConfig",
    "NoiseMatrix",
    "PrecisionWarning",
    "QGaussError",
    "QuadratureGrid",
    "ShapeError",
    "TailClipWarning",
    "annihilation_observable",
    "bosonic_mc",
    "canonical_operators",
    "char_fn",
    "coherent_vector",
    "estimate_wS",
    "gaussianity_test",
    "inversion_error",
    "ladder",
    "make_gaussian",
    "moment_by_derivative",
    "moment_by_yosida",
    "moment_report",
    "parse_state",
    "parseval_check",
    "qft",
    "qms_exact",
    "qms_mc",
    "semigroup_mc_check",
    "squeeze_matrix",
    "weyl_matrix",
    "weyl_transform",
]
