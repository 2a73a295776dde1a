"""Sign-pattern analysis and sign fixing for chemical reaction networks."""

from .model import (
    Complex,
    Network,
    RationalMatrix,
    Reaction,
    Species,
    stoichiometric_matrix,
    validate_reaction_form,
)
from .textio import ParseError, parse_network, serialize_network
from .exactla import (
    ConservationResult,
    KernelBasis,
    char_poly,
    determinant,
    is_conserving,
    kernel_basis,
    kernel_correspondence_check,
    rank,
)
from .signcheck import (
    BadClass,
    BadSubmatrix,
    Sign,
    SignStatusMatrix,
    Status,
    find_bad_submatrices,
    hermitian_square_status,
    jacobian_sign_status,
    sign_pattern,
)
from .signfix import (
    AltFixReport,
    FixReport,
    FixStep,
    altfix,
    fix_one,
    fix_one_report,
    sign_fix,
    verify_permutation_relation,
)
from .kinetics import (
    EquilibriumNotFound,
    EquilibriumPair,
    MassActionSystem,
    exact_jacobian,
    find_equilibrium,
    flux,
    jacobian,
    lift_equilibrium,
    project_equilibrium,
    rhs,
    simulate,
)
from .spectra import (
    CharPolyRelation,
    ConvergenceReport,
    DetRelationResult,
    char_poly_relation,
    det_relation_check,
    eigen_convergence,
    eigenvalues,
)
from .deficiency import (
    DeficiencyReport,
    DeltaAudit,
    check_single_positive_column,
    complexes_decomposition,
    complexes_of,
    deficiency,
    delta_audit,
)
from .graphio import BadCycle, SRGraph, build_graph, export_dot, find_bad_cycles, read_dot

__version__ = "0.1.0"

__all__ = [
    "Complex",
    "Network",
    "RationalMatrix",
    "Reaction",
    "Species",
    "stoichiometric_matrix",
    "validate_reaction_form",
    "ParseError",
    "parse_network",
    "serialize_network",
    "ConservationResult",
    "KernelBasis",
    "char_poly",
    "determinant",
    "is_conserving",
    "kernel_basis",
    "kernel_correspondence_check",
    "rank",
    "BadClass",
    "BadSubmatrix",
    "Sign",
    "SignStatusMatrix",
    "Status",
    "find_bad_submatrices",
    "hermitian_square_status",
    "jacobian_sign_status",
    "sign_pattern",
    "AltFixReport",
    "FixReport",
    "FixStep",
    "altfix",
    "fix_one",
    "fix_one_report",
    "sign_fix",
    "verify_permutation_relation",
    "EquilibriumNotFound",
    "EquilibriumPair",
    "MassActionSystem",
    "exact_jacobian",
    "find_equilibrium",
    "flux",
    "jacobian",
    "lift_equilibrium",
    "project_equilibrium",
    "rhs",
    "simulate",
    "CharPolyRelation",
    "ConvergenceReport",
    "DetRelationResult",
    "char_poly_relation",
    "det_relation_check",
    "eigen_convergence",
    "eigenvalues",
    "DeficiencyReport",
    "DeltaAudit",
    "check_single_positive_column",
    "complexes_decomposition",
    "complexes_of",
    "deficiency",
    "delta_audit",
    "BadCycle",
    "SRGraph",
    "build_graph",
    "export_dot",
    "find_bad_cycles",
    "read_dot",
]
