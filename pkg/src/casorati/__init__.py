"""Extrinsic Casorati geometry of parametrized submanifolds of Euclidean space."""
from .casorati import (
    CurvatureReport,
    apply_normal_operator,
    casorati_curvature,
    casorati_operator,
    curvature_report,
    normal_casorati_curvature,
    principal_normal,
    principal_tangential,
    projection_hypersurface_check,
    trencevski_operator,
)
from .errors import (
    CasoratiError,
    DimensionError,
    DomainError,
    NotLagrangian,
    NotUnit,
    ParseError,
    RankDeficient,
    UnknownIdentifier,
)
from .expr import eval_jet2, parse_expression, render
from .geometry import ImmersionSpec, immersion_jet, point_geometry

__version__ = "0.1.0"
