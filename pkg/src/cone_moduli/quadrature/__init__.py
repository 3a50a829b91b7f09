"""Planar quadrature for integrands with declared algebraic singularities."""

from cone_moduli.quadrature.engine import (
    IntegralResult,
    integrate,
    integrate_decomposition,
    integrate_points,
    integrate_pv,
    integrate_pv_points,
)
from cone_moduli.quadrature.geometry import (
    Decomposition,
    DiskPatch,
    QuadratureSpec,
    WedgePanel,
    plan,
    plan_points,
)
from cone_moduli.quadrature.profile import (
    SingularityProfile,
    SingularPoint,
    merge_points,
)

__all__ = [
    "IntegralResult", "integrate", "integrate_decomposition", "integrate_points",
    "integrate_pv", "integrate_pv_points", "Decomposition", "DiskPatch",
    "QuadratureSpec", "WedgePanel", "plan", "plan_points",
    "SingularityProfile", "SingularPoint", "merge_points",
]
