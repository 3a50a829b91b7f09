"""Singularity declarations for planar integrands.

An integrand is described by algebraic singularities |f| ~ C |z - c|^e at
isolated centers, each optionally carrying a dominant angular phase
e^{i m theta} (m != 0 certifies conditional convergence through angular
cancellation on centered polar patches), plus the far-field exponent
|f| ~ C |z|^{e_far} (in the w = 1/z chart the far field becomes one more
algebraic center at w = 0 with exponent -e_far - 4).
"""

from __future__ import annotations

from dataclasses import dataclass

from cone_moduli.errors import NonIntegrableProfile

MERGE_TOL = 1e-12


@dataclass(frozen=True)
class SingularPoint:
    """One algebraic singularity: |f| ~ C |z - center|^exponent, leading
    angular mode e^{i * angular_order * theta}. `radius` overrides the
    planner's patch radius when set."""

    center: complex
    exponent: float
    angular_order: int = 0
    radius: float | None = None

    def certificate_ok(self) -> bool:
        if self.exponent > -2.0:
            return True
        return self.exponent > -3.0 and self.angular_order != 0


@dataclass(frozen=True)
class SingularityProfile:
    """Per-puncture exponents (aligned with the finite punctures of a
    ModuliPoint), far-field behavior, and an optional hard support disk
    (integrand identically zero outside |z| <= support_radius, in which case
    the far field is dropped and the support circle bounds the decomposition).
    """

    exponents: tuple[float, ...]
    angular_orders: tuple[int, ...] | None = None
    far_exponent: float = -4.0
    far_angular_order: int = 0
    support_radius: float | None = None

    def orders(self) -> tuple[int, ...]:
        if self.angular_orders is None:
            return (0,) * len(self.exponents)
        return self.angular_orders

    def points_for(self, point) -> list[SingularPoint]:
        """Zip the declared exponents with a ModuliPoint's finite punctures."""
        pts = point.finite_punctures
        if len(self.exponents) != len(pts):
            raise NonIntegrableProfile(
                f"{len(self.exponents)} exponents for {len(pts)} finite punctures")
        return [SingularPoint(c, e, m)
                for c, e, m in zip(pts, self.exponents, self.orders())]


def far_certificate_ok(far_exponent: float, far_angular_order: int) -> bool:
    if far_exponent < -2.0:
        return True
    return far_exponent < -1.0 and far_angular_order != 0


def check_certificate(points: list[SingularPoint], far_exponent: float,
                      far_angular_order: int, support_radius: float | None) -> None:
    """Raise NonIntegrableProfile unless every declared singularity converges."""
    for p in points:
        if not p.certificate_ok():
            raise NonIntegrableProfile(
                f"exponent {p.exponent} at {p.center} (angular order "
                f"{p.angular_order}) is not integrable: need e > -2, or "
                f"e > -3 with a nonzero angular order")
    if support_radius is None and not far_certificate_ok(far_exponent, far_angular_order):
        raise NonIntegrableProfile(
            f"far exponent {far_exponent} (angular order {far_angular_order}) "
            f"is not integrable: need e < -2, or e < -1 with a nonzero angular order")


def merge_points(contributions) -> list[SingularPoint]:
    """Merge per-factor singular contributions at coincident centers.

    `contributions` is an iterable of (center, exponent, angular_order).
    Exponents and angular orders add where centers coincide (within
    MERGE_TOL relative to the configuration scale); zero-exponent results
    are kept (harmless) so patch placement stays stable.
    """
    merged: list[list] = []
    for center, e, m in contributions:
        center = complex(center)
        scale = 1.0 + abs(center)
        for slot in merged:
            if abs(slot[0] - center) <= MERGE_TOL * scale:
                slot[1] += e
                slot[2] += m
                break
        else:
            merged.append([center, float(e), int(m)])
    return [SingularPoint(c, e, m) for c, e, m in merged]
