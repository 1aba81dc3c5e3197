"""Non-linear interpolant synthesis for semi-algebraic systems.

Reduces the search for a bounded-degree refutation of two mutually
unsatisfiable polynomial constraint systems to a semidefinite feasibility
problem, solves it with a built-in interior-point method, and assembles a
separating polynomial (a Craig interpolant in the inverse convention) from
the recovered sum-of-squares multipliers.
"""

from .certgen import (
    CertConfig,
    Certificate,
    SosPoly,
    build_identity_template,
    certificate_generation,
    extract_sos,
    residual,
)
from .interp import (
    ArchimedeanPreconditionError,
    Interpolant,
    InterpolantFormula,
    combine_interpolants,
    mult_monoid_power,
    rsn_interpolants,
    sn_interpolants,
    sn_interpolants_escalate,
    subset_products,
)
from .poly import (
    GramBasis,
    PolyError,
    PolyParseError,
    Polynomial,
    VarEnv,
    monomial_basis,
    parse_poly,
)
from .sas import (
    SAS,
    And,
    ArchReport,
    DefEquations,
    Formula,
    HarmonizeError,
    Not,
    Or,
    SasError,
    check_archimedean_form,
    dnf_convert,
    harmonize_variables,
    normalize,
)
from .sdp import (
    BlockMatrix,
    SdpProblem,
    SdpSolution,
    SolverConfig,
    SymMatrix,
    dump_problem,
    feasibility,
    inner,
    load_problem,
    min_eigenvalue,
    psd_factor,
    solve,
)
from .validate import (
    ValidationConfig,
    ValidationReport,
    check_certificate,
    check_separation,
    sample_sas,
)

__version__ = "0.1.0"
