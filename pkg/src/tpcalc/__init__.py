"""Exact two-sided transversal probabilities of finite groups.

The package computes, with exact rational arithmetic, the probability that a
random left transversal of a subgroup is also a right transversal, minimises
it over all subgroups, and machine-checks the bounds, classifications, and
structural gates that the invariant satisfies.
"""

__version__ = "0.1.0"

from .errors import (
    ActionError,
    BudgetError,
    FormatError,
    NormalityError,
    ParameterError,
    PreconditionError,
    SizeLimitError,
    TpcalcError,
    VerificationError,
)
from .group_core import (
    GroupTable,
    StructureReport,
    Subgroup,
    all_subgroups,
    are_conjugate,
    classify_structure,
    cp_rtimes_c2n,
    cyclic,
    dihedral,
    direct_product,
    elementary_abelian,
    field_frobenius,
    from_permutation_generators,
    generalized_quaternion,
    has_section,
    is_isomorphic,
    make_named_family,
    quotient_group,
    semidirect_product,
    subgroup_generated,
    subgroup_relations,
)
from .coset_graph import (
    Component,
    CosetGraph,
    TVector,
    build_coset_graph,
    double_cosets,
    frobenius_s2_check,
    s_bounds_check,
)
from .transversal import (
    BigRational,
    BoundsReport,
    WeightMatrix,
    bounds_report,
    dt_enumerate,
    p_from_tvector,
    p_g,
    p_prime_subgroup,
    permanent_ryser,
    stochastic_form_checks,
    weight_matrix,
)
from .arith_nt import (
    factorial_ratio,
    log_f,
    majorisation,
    next_prime,
    padic_valuation,
    prodpi_collision_scan,
    schur_strict_check,
)
from .tp_engine import (
    TheoremVerdict,
    TpResult,
    classify_special_values,
    extension_bounds,
    tp,
    verify_monotonicity,
    verify_structure_theorems,
)
from .catalog import (
    CatalogEntry,
    ResultsCache,
    build_group,
    catalog_build,
    catalog_hash,
    scan_and_report,
)
