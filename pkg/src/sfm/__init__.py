"""Area-minimising herringbone surfaces and cones in the sub-Finsler Heisenberg group."""

from .area import (
    Disc,
    GraphRegion,
    Rectangle,
    area_integrand,
    disc_cone_area_closed_form,
    graph_area,
    perturbation_test,
)
from .convex_geometry import (
    ConvexBody,
    InvalidBodyError,
    NotOnBoundaryError,
    ZeroVectorError,
    disc,
    dual_norm,
    ellipse,
    gauge_norm,
    gauss_angle,
    gauss_point,
    load_body,
    parse_body,
    pball,
    pi_K,
    rotate90,
    sampled,
)
from .mesh import Tag, TriMesh, heisenberg_translate
from .stationarity import (
    DomainError,
    MatchingPair,
    SolverError,
    beta_of_alpha,
    dbeta_dalpha,
    mollify_profile,
    sector_split,
    solve_beta,
    stationarity_residual,
)
from .surfaces import (
    AlphaProfile,
    ConeSpec,
    InvalidSpecError,
    build_cone,
    build_sigma,
    c1_seam_check,
    cone_graph,
    graph_eval,
    herringbone,
    lift_halfline,
    psi,
    u_alpha_disc,
)

__version__ = "0.1.0"
