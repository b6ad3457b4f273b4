"""Classifying spaces for the families of finite, virtually cyclic and
finite-by-cyclic subgroups of groups acting on CAT(0) model spaces."""

from .axes import AxesSpace, axes_space, directed_double, induced_group, well_behaved_check
from .classifying import (
    FBC_INF,
    FIN,
    INDETERMINATE,
    NOT_VC,
    VC_INF_NOT_FBC,
    BatteryRow,
    FamilyTag,
    JoinComplex,
    QuotientK,
    RefusalError,
    SphereModel,
    build_EFBC,
    build_EFIN,
    build_EVC,
    classify_family,
    default_battery,
    quotient_K,
    verify_EFBC,
    verify_EFIN,
    verify_EVC,
)
from .cover import CoverPolicy, GoodCover, build_good_cover, verify_good_cover
from .estimators import EFBCBuilder, EFINBuilder, EVCBuilder
from .isometries import (
    CrystallographicGroup,
    EuclideanIsometry,
    OdometerGroup,
    ProductIsometry,
    TreeAutomorphism,
    classify,
    line_stabilizer_image,
)
from .lines import Line, ParallelClass, flat_strip_distance, parallel_class
from .nerve import fixed_subcomplex, nerve, restriction_map
from .presets import PRESETS, preset
from .simplicial import SimplicialComplex, collapse, join
from .spaces import Ball, EuclideanSpace, ProductSpace, TreeSpace, balls_intersect, cat0_triangle_check, distance

__version__ = "0.1.0"

__all__ = [
    "AxesSpace",
    "Ball",
    "BatteryRow",
    "CoverPolicy",
    "CrystallographicGroup",
    "EFBCBuilder",
    "EFINBuilder",
    "EVCBuilder",
    "EuclideanIsometry",
    "EuclideanSpace",
    "FBC_INF",
    "FIN",
    "FamilyTag",
    "GoodCover",
    "INDETERMINATE",
    "JoinComplex",
    "Line",
    "NOT_VC",
    "OdometerGroup",
    "PRESETS",
    "ParallelClass",
    "ProductIsometry",
    "ProductSpace",
    "QuotientK",
    "RefusalError",
    "SimplicialComplex",
    "SphereModel",
    "TreeAutomorphism",
    "TreeSpace",
    "VC_INF_NOT_FBC",
    "axes_space",
    "balls_intersect",
    "build_EFBC",
    "build_EFIN",
    "build_EVC",
    "build_good_cover",
    "cat0_triangle_check",
    "classify",
    "classify_family",
    "collapse",
    "default_battery",
    "directed_double",
    "distance",
    "fixed_subcomplex",
    "flat_strip_distance",
    "induced_group",
    "join",
    "line_stabilizer_image",
    "nerve",
    "parallel_class",
    "preset",
    "quotient_K",
    "restriction_map",
    "verify_EFBC",
    "verify_EFIN",
    "verify_EVC",
    "verify_good_cover",
    "well_behaved_check",
]
