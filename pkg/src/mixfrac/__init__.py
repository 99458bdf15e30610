"""Superpositions of fractional Laplacians on an interval: spectra and maximum principles."""

from .errors import (ConvergenceFailure, DomainError, GridMismatch, HypothesisViolation,
                     IndefiniteForm, MixfracError, NonConvergence, NotFound, PreconditionError,
                     SingularSystem)
from .kernel import (Exterior, Grid, GridFunction, component_matrix, frac_laplacian_pointwise,
                     gagliardo_seminorm_sq, normalization_constant)
from .measure import (Atom, Density, HypothesisReport, QuadratureNode, SignedMeasure, atomize,
                      check_hypotheses, mass, validate_hypotheses)
from .operator import (OperatorMatrix, assemble, inner, inner_minus, inner_plus, norm_mixed, norm_X)
from .eigensolver import (Spectrum, expand_in_eigenbasis, multiplicity_groups, rayleigh_identity,
                          solve_direct, solve_recursive_rayleigh, verify_orthogonality)

__version__ = "0.1.0"
