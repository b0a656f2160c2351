"""Validated-numerics toolkit for covering relations of reversible maps.

Interval arithmetic with outward rounding, affine h-sets, rigorous
verification of covering and backcovering relations, and a bundled campaign
certifying chaos and infinitely many symmetric periodic orbits for a
four-dimensional reversible map.
"""

from .interval import (
    DegenerateBoxError,
    DomainError,
    IBox,
    IMatrix,
    IndeterminateSignError,
    Interval,
    SingularMatrixError,
    box_bisect,
    box_hull,
    compute_region,
    det_sign,
    imat_inverse,
    imat_mul,
    imat_vec,
    iv_arith,
)
from .hset import (
    EmptyExitSetError,
    FacetTag,
    HSet,
    LinearReversor,
    WallCell,
    boundary_grid,
    coordinate_reflection,
    exit_grid,
    load_hset,
    save_hset,
    st_symmetric_check,
    supports_disjoint,
    sym_image,
    transpose,
)
from .dynamics import (
    MapSystem,
    MissingInverseError,
    OrbitSegment,
    F_derivative,
    F_eval,
    F_inverse,
    f_eval,
    fixed_point_equations_residual,
    iterate,
    linear_map_system,
    map_by_name,
    reversibility_encloses_identity,
    reversibility_residual,
    reversible_quadratic_map,
)
from .covering import (
    CoveringCertificate,
    DegreeData,
    VerifyConfig,
    check_entry_condition,
    check_exit_condition,
    compute_degree,
    verify_backcover,
    verify_cover,
)
from .campaign import (
    CampaignConfig,
    ConfigError,
    CoveringGraph,
    InadmissibleWordError,
    ProofReport,
    SymmetricOrbitCertificate,
    automaton_is_admissible,
    automaton_words,
    build_proof_data,
    block_transitions,
    emit_symmetric_orbit_certificate,
    enumerate_words,
    fix_disk_check,
    run_campaign,
    symmetric_closure,
)

__version__ = "0.1.0"
