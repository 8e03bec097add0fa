"""Numerics on generalized Grushin planes: profiles, distances, the map to the plane,
Beltrami coefficients and Payne's conformal flows."""

from .calculus import (
    GrushinMap,
    Region,
    classical_beltrami_mu,
    conformality_test,
    conjugation_consistency,
    frame_derivative,
    grushin_beltrami_nu,
)
from .errors import (
    BlowUpError,
    BranchDomainError,
    ConvergenceError,
    DivergenceError,
    GrushinError,
    SingularLineError,
)
from .flows import (
    FlowField,
    FlowSpec,
    branch_domain_contains,
    closed_form_flow,
    flow_conformality_check,
    flow_rhs,
    integrate_flow,
    xi_eta,
)
from .maps import conjugated, plane_map
from .metric import (
    GrushinPoint,
    cc_estimate,
    cc_upper_lshape,
    comparability_check,
    covering_number,
    path_length,
    quasidistance,
    solve_M,
)
from .profile import Profile, estimate_beta, estimate_doubling, make_profile, parse_profile, validate_profile
from .symmetry import PlanePoint, lemma32_check, lemma33_check, phi, phi_inverse, sup_norm_dist, weak_qs_sample

__version__ = "0.1.0"
