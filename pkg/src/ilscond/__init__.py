"""Conditioning of indefinite linear least squares problems and the
how tight the standard first-order perturbation bound is."""

__version__ = "0.1.0"

from .conditioning import (ConditioningReport, JacobianParts, analyze, bhp_coefficient,
                           bound_coefficients, chi_A, chi_Ab, chi_b, eval_bound_i,
                           jacobian_parts, jacobian_wrt_A, jacobian_wrt_b)
from .diagnostics import (TheoremDiagnostics, lemma_m_bounds, lemma_uvw_check,
                          theorem_diagnostics)
from .errors import *  # noqa: F401,F403
from .examples import example1, example2
from .probe import (ProbeConfig, ProbeResult, directed_probe, random_probe,
                    remainder_order_check, run_probe, worst_direction_A)
from .problem import (GsvdSpec, IlsProblem, IlsSolution, Signature, epsilon_of,
                      from_gsvd, perturb, solve, validate)
