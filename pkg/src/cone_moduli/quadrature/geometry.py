"""Exact-geometry decomposition of the plane for singular integrands.

The disk |z| <= R_out is partitioned into one polar patch per singular
center plus, for each center, a fan of polar wedge panels filling the
center's bisector cell (the intersection of the half-planes
|z - p_i| <= |z - p_j| with the outer disk, which is convex and star-shaped
around p_i). The far field |z| > R_out is pulled back through w = 1/z and
decomposed the same way, with the point at infinity becoming one more
algebraic center at w = 0. Cell boundaries are exact lines/circles, so no
patch ever straddles a non-smooth feature of the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cone_moduli.errors import NonIntegrableProfile, PunctureTooClose
from cone_moduli.quadrature.profile import (
    SingularPoint,
    SingularityProfile,
    check_certificate,
)

TWO_PI = 2.0 * math.pi
MAX_ANGULAR_CHUNK = math.pi / 3.0
RADIUS_CAP = 0.5
OUTER_MARGIN = 0.45


@dataclass(frozen=True)
class QuadratureSpec:
    """Engine resolution knobs (defaults sized for ~1e-9 relative accuracy)."""

    radial_order: int = 24
    angular_nodes: int = 64
    patch_radius_factor: float = 0.25
    far_radius: float | None = None
    refinement_depth: int = 6
    target_rel_tol: float = 1e-9

    def __post_init__(self):
        if self.radial_order < 4 or self.angular_nodes < 4:
            raise ValueError("radial_order and angular_nodes must be >= 4")
        if self.angular_nodes % 2 != 0:
            raise ValueError("angular_nodes must be even")
        if not (0.0 < self.patch_radius_factor <= 0.4):
            raise ValueError("patch_radius_factor must lie in (0, 0.4]")
        if self.target_rel_tol < 1e-13:
            raise ValueError("target_rel_tol must be >= 1e-13")
        if self.refinement_depth < 0:
            raise ValueError("refinement_depth must be >= 0")

    @property
    def mid_order(self) -> int:
        return max(6, self.radial_order // 2)

    def scaled(self, factor: float) -> "QuadratureSpec":
        """Spec with radial and angular orders scaled by `factor`."""
        ang = 2 * max(2, int(round(self.angular_nodes * factor / 2)))
        return QuadratureSpec(
            radial_order=max(4, int(round(self.radial_order * factor))),
            angular_nodes=max(4, ang),
            patch_radius_factor=self.patch_radius_factor,
            far_radius=self.far_radius,
            refinement_depth=self.refinement_depth,
            target_rel_tol=self.target_rel_tol,
        )


# a cell-boundary constraint is ("line", q, n) with the half-plane
# Re(conj(n)(z - q)) <= 0, or ("circle", R) for |z| <= R.

def _ray_to_constraint(p: complex, d: np.ndarray, con) -> np.ndarray:
    """Distance from p along unit directions d to one constraint boundary."""
    if con[0] == "line":
        _, q, n = con
        num = (np.conj(n) * (q - p)).real
        den = (np.conj(n) * d).real
        t = np.full(d.shape, np.inf)
        pos = den > 1e-300
        t[pos] = num / den[pos]
        return t
    _, big_r = con
    beta = (np.conj(p) * d).real
    disc = beta * beta + big_r * big_r - abs(p) ** 2
    return -beta + np.sqrt(np.maximum(disc, 0.0))


def rho_of_theta(p: complex, constraints, theta: np.ndarray) -> np.ndarray:
    """Star-shaped radial support of the cell around p, exact per direction."""
    d = np.exp(1j * np.asarray(theta, dtype=float))
    t = np.full(d.shape, np.inf)
    for con in constraints:
        t = np.minimum(t, _ray_to_constraint(p, d, con))
    return t


def _line_line_vertex(c1, c2) -> complex | None:
    _, q1, n1 = c1
    _, q2, n2 = c2
    a1, b1 = n1.real, n1.imag
    a2, b2 = n2.real, n2.imag
    det = a1 * b2 - a2 * b1
    if abs(det) < 1e-14:
        return None
    r1 = a1 * q1.real + b1 * q1.imag
    r2 = a2 * q2.real + b2 * q2.imag
    x = (r1 * b2 - r2 * b1) / det
    y = (a1 * r2 - a2 * r1) / det
    return complex(x, y)


def _line_circle_vertices(line, circle) -> list[complex]:
    _, q, n = line
    big_r = circle[1]
    tau = 1j * n
    a = 1.0
    b = 2.0 * (np.conj(q) * tau).real
    c = abs(q) ** 2 - big_r * big_r
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return []
    s = math.sqrt(disc)
    return [q + ((-b - s) / 2.0) * tau, q + ((-b + s) / 2.0) * tau]


@dataclass(frozen=True)
class Cell:
    """Bisector cell of one center: convex, star-shaped around `center`."""

    center: complex
    r_inner: float
    constraints: tuple
    breakpoints: tuple[float, ...]

    def rho(self, theta):
        return rho_of_theta(self.center, self.constraints, np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class DiskPatch:
    """Polar patch centered on a singular point, radial Gauss-Jacobi weight
    r^sigma with sigma = e + 1 + |m| (|m| only when m != 0)."""

    center: complex
    radius: float
    exponent: float
    angular_order: int
    inverted: bool
    index: int

    @property
    def sigma(self) -> float:
        extra = abs(self.angular_order) if self.angular_order != 0 else 0
        return self.exponent + 1.0 + extra


@dataclass(frozen=True)
class WedgePanel:
    """Polar panel (theta, s) in [t0,t1] x [s0,s1] of a cell, radius
    r(s, theta) = r_inner * (rho(theta)/r_inner)^s (log-radial grading)."""

    cell: Cell
    t0: float
    t1: float
    s0: float
    s1: float
    inverted: bool
    index: int


@dataclass(frozen=True)
class CornerPatch:
    """Polar sector at a singular center sitting exactly on the support
    circle: r in [0, cap(theta)], theta in [t0, t1], with cap either the
    constant `cap` or (when None) the cell's radial support rho(theta).
    Only absolutely convergent exponents are allowed here (no full-circle
    angular cancellation is available)."""

    cell: Cell
    t0: float
    t1: float
    cap: float | None
    exponent: float
    inverted: bool
    index: int

    @property
    def sigma(self) -> float:
        return self.exponent + 1.0

    def cap_of(self, theta):
        rho = self.cell.rho(theta)
        if self.cap is None:
            return rho
        return np.minimum(self.cap, rho)


@dataclass
class Decomposition:
    """Disjoint exact cover: per-center polar disks (plus boundary corner
    sectors for centers on the support circle) + wedge fans on both charts;
    `outer_radius` is where the inversion chart takes over (or the hard
    support radius)."""

    outer_radius: float
    disks: list[DiskPatch] = field(default_factory=list)
    corners: list[CornerPatch] = field(default_factory=list)
    wedges: list[WedgePanel] = field(default_factory=list)
    has_far: bool = False
    main_points: tuple[SingularPoint, ...] = ()
    far_points: tuple[SingularPoint, ...] = ()

    def membership_count(self, z: complex) -> int:
        """Number of patches whose interior/boundary contains z (cover check)."""
        count = 0
        for d in self.disks:
            w = 1.0 / z if d.inverted else z
            if abs(w - d.center) <= d.radius:
                count += 1
        for c in self.corners:
            w = 1.0 / z if c.inverted else z
            rel = w - c.cell.center
            r = abs(rel)
            if r == 0.0:
                count += 1
                continue
            theta = math.atan2(rel.imag, rel.real)
            th = (theta - c.t0) % TWO_PI
            if th > (c.t1 - c.t0):
                continue
            if r <= float(np.asarray(c.cap_of(np.asarray([c.t0 + th])))[0]):
                count += 1
        for p in self.wedges:
            w = 1.0 / z if p.inverted else z
            rel = w - p.cell.center
            r = abs(rel)
            if r < p.cell.r_inner or r == 0.0:
                continue
            theta = math.atan2(rel.imag, rel.real)
            th = (theta - p.t0) % TWO_PI
            if th > (p.t1 - p.t0):
                continue
            rho = float(p.cell.rho(np.asarray([p.t0 + th]))[0])
            lam = math.log(rho / p.cell.r_inner)
            if lam <= 0:
                continue
            s = math.log(r / p.cell.r_inner) / lam
            if p.s0 <= s <= p.s1:
                count += 1
        return count


def _patch_radius(i: int, points: list[SingularPoint], outer_radius: float,
                  factor: float) -> float:
    p = points[i]
    if p.radius is not None:
        return float(p.radius)
    dists = [abs(p.center - q.center) for j, q in enumerate(points) if j != i]
    nearest = min(dists) if dists else math.inf
    r = min(factor * nearest, RADIUS_CAP,
            OUTER_MARGIN * (outer_radius - abs(p.center)))
    if r <= 0:
        raise PunctureTooClose(
            f"center {p.center} leaves no room inside outer radius {outer_radius}")
    return r


def _cell_breakpoints(p: complex, constraints, r_inner: float) -> tuple[float, ...]:
    candidates: list[complex] = []
    lines = [c for c in constraints if c[0] == "line"]
    circles = [c for c in constraints if c[0] == "circle"]
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            v = _line_line_vertex(lines[i], lines[j])
            if v is not None:
                candidates.append(v)
        for circ in circles:
            candidates.extend(_line_circle_vertices(lines[i], circ))
    angles = []
    for v in candidates:
        rel = v - p
        r = abs(rel)
        if r <= r_inner * (1.0 + 1e-12):
            continue
        theta = math.atan2(rel.imag, rel.real) % TWO_PI
        rho = float(rho_of_theta(p, constraints, np.asarray([theta]))[0])
        # keep any vertex on (or conservatively near) the active boundary
        if r <= rho * (1.0 + 1e-7) and r >= rho * (1.0 - 1e-7):
            angles.append(theta)
    angles.sort()
    dedup: list[float] = []
    for a in angles:
        if not dedup or a - dedup[-1] > 1e-10:
            dedup.append(a)
    if len(dedup) > 1 and (dedup[0] + TWO_PI) - dedup[-1] <= 1e-10:
        dedup.pop()
    return tuple(dedup)


def _append_wedges(cell: Cell, intervals, inverted: bool, idx: int,
                   wedges: list[WedgePanel]) -> int:
    for (a, b) in intervals:
        if b - a <= 1e-12:
            continue
        n_chunks = max(1, math.ceil((b - a) / MAX_ANGULAR_CHUNK))
        for k in range(n_chunks):
            t0 = a + (b - a) * k / n_chunks
            t1 = a + (b - a) * (k + 1) / n_chunks
            theta_probe = np.linspace(t0, t1, 9)
            rho_max = float(np.max(cell.rho(theta_probe)))
            lam_max = math.log(max(rho_max, cell.r_inner * (1 + 1e-9)) / cell.r_inner)
            n_s = max(1, math.ceil(lam_max / math.log(2.0)))
            for ks in range(n_s):
                wedges.append(WedgePanel(cell, t0, t1, ks / n_s, (ks + 1) / n_s,
                                         inverted, idx))
                idx += 1
    return idx


def _intervals_from_breaks(breaks: tuple[float, ...]):
    if not breaks:
        return [(0.0, TWO_PI)]
    return [(breaks[k], breaks[(k + 1) % len(breaks)] +
             (TWO_PI if k + 1 == len(breaks) else 0.0))
            for k in range(len(breaks))]


def _constraints_for(i: int, centers: list[complex], outer_radius: float):
    cons = [("circle", outer_radius)]
    for j, other in enumerate(centers):
        if j == i:
            continue
        diff = other - centers[i]
        n = diff / abs(diff)
        q = (other + centers[i]) / 2.0
        cons.append(("line", q, n))
    return tuple(cons)


def _build_chart(points: list[SingularPoint], outer_radius: float, factor: float,
                 inverted: bool, start_index: int,
                 rim_points: list[SingularPoint] = ()):
    """Cells, disk/corner patches and initial wedge panels for one chart.

    `rim_points` sit exactly on the outer circle: they get polar corner
    sectors (r down to 0 on the inward arc) instead of full disks.
    """
    all_pts = list(points) + list(rim_points)
    centers = [p.center for p in all_pts]
    disks: list[DiskPatch] = []
    corners: list[CornerPatch] = []
    wedges: list[WedgePanel] = []
    idx = start_index

    for i, pt in enumerate(points):
        r_in = _patch_radius(i, all_pts, outer_radius, factor)
        constraints = _constraints_for(i, centers, outer_radius)
        disks.append(DiskPatch(pt.center, r_in, pt.exponent, pt.angular_order,
                               inverted, idx))
        idx += 1
        breaks = _cell_breakpoints(pt.center, constraints, r_in)
        cell = Cell(pt.center, r_in, constraints, breaks)
        idx = _append_wedges(cell, _intervals_from_breaks(breaks), inverted, idx,
                             wedges)

    for ri, pt in enumerate(rim_points):
        i = len(points) + ri
        p = pt.center
        big_r = outer_radius
        dists = [abs(p - q) for j, q in enumerate(centers) if j != i]
        nearest = min(dists) if dists else math.inf
        eps = pt.radius if pt.radius is not None else min(
            factor * nearest, RADIUS_CAP, 0.9 * big_r)
        constraints = _constraints_for(i, centers, outer_radius)
        theta_p = math.atan2(p.imag, p.real)
        # inward arc (t1, t2); corner cap equals eps once the circle allows it
        t1 = theta_p + math.pi / 2.0
        t2 = theta_p + 3.0 * math.pi / 2.0
        delta = math.acos(-eps / (2.0 * big_r))
        ta = theta_p + delta
        tb = theta_p + TWO_PI - delta
        cell = Cell(p, eps, constraints, ())
        corners.append(CornerPatch(cell, t1, ta, None, pt.exponent, inverted, idx))
        idx += 1
        corners.append(CornerPatch(cell, tb, t2, None, pt.exponent, inverted, idx))
        idx += 1
        n_mid = max(1, math.ceil((tb - ta) / MAX_ANGULAR_CHUNK))
        for k in range(n_mid):
            c0 = ta + (tb - ta) * k / n_mid
            c1 = ta + (tb - ta) * (k + 1) / n_mid
            corners.append(CornerPatch(cell, c0, c1, eps, pt.exponent, inverted, idx))
            idx += 1
        # wedge fan beyond the eps cap, clipped to (ta, tb)
        raw_breaks = _cell_breakpoints(p, constraints, eps)
        local = sorted((b - ta) % TWO_PI for b in raw_breaks)
        span = tb - ta
        inner_breaks = [ta] + [ta + x for x in local if 1e-12 < x < span - 1e-12] + [tb]
        intervals = list(zip(inner_breaks[:-1], inner_breaks[1:]))
        idx = _append_wedges(cell, intervals, inverted, idx, wedges)

    return disks, corners, wedges, idx


def plan_points(points: list[SingularPoint], far_exponent: float,
                far_angular_order: int, spec: QuadratureSpec,
                support_radius: float | None = None,
                base_radius: float | None = None) -> Decomposition:
    """Plan a decomposition for explicit singular centers (library-internal
    entry used by the operator modules; `plan` is the puncture-profile front)."""
    points = list(points)
    check_certificate(points, far_exponent, far_angular_order, support_radius)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = abs(points[i].center - points[j].center)
            if d < 1e-9:
                raise PunctureTooClose(
                    f"singular centers {points[i].center} and {points[j].center} "
                    f"are {d} apart; merge them into one declared point")

    if support_radius is not None:
        r_out = float(support_radius)
        inner, rim = [], []
        for p in points:
            ap = abs(p.center)
            smooth = p.exponent == 0 and p.angular_order == 0
            if ap <= 0.995 * r_out:
                inner.append(p)
            elif smooth:
                pass  # placeholder on or beyond the rim contributes nothing
            elif abs(ap - r_out) <= 1e-9 * r_out:
                if p.exponent <= -2.0:
                    raise NonIntegrableProfile(
                        f"center {p.center} on the support circle needs an "
                        f"absolutely convergent exponent (> -2), got {p.exponent}")
                rim.append(SingularPoint(p.center * (r_out / ap), p.exponent,
                                         p.angular_order, p.radius))
            elif ap < 1.005 * r_out:
                raise PunctureTooClose(
                    f"singular center {p.center} too close to the support "
                    f"circle |z| = {r_out}")
            # anything clearly outside the support contributes nothing
        if not inner:
            inner = [SingularPoint(0j, 0.0, 0)]
        disks, corners, wedges, _ = _build_chart(
            inner, r_out, spec.patch_radius_factor, False, 0, rim_points=rim)
        return Decomposition(r_out, disks, corners, wedges, has_far=False,
                             main_points=tuple(inner + rim), far_points=())

    if not points:
        points = [SingularPoint(0j, 0.0, 0)]
    if spec.far_radius is not None:
        r_out = spec.far_radius
    elif base_radius is not None:
        r_out = base_radius
    else:
        r_out = 4.0 * max(max(abs(p.center) for p in points), 1.0)
    r_out = max(r_out, 2.0)
    for _ in range(64):
        if all(abs(p.center) <= 0.7 * r_out or abs(p.center) >= 1.4 * r_out
               for p in points):
            break
        r_out *= 2.0
    inner = [p for p in points if abs(p.center) <= 0.7 * r_out]
    outer = [p for p in points if abs(p.center) >= 1.4 * r_out]
    if not inner:
        inner = [SingularPoint(0j, 0.0, 0)]
    disks, corners, wedges, idx = _build_chart(inner, r_out,
                                               spec.patch_radius_factor, False, 0)
    far_pts = [SingularPoint(0j, -far_exponent - 4.0, -far_angular_order)]
    for p in outer:
        far_pts.append(SingularPoint(1.0 / p.center, p.exponent, -p.angular_order))
    fdisks, fcorners, fwedges, _ = _build_chart(far_pts, 1.0 / r_out,
                                                spec.patch_radius_factor, True, idx)
    return Decomposition(r_out, disks + fdisks, corners + fcorners,
                         wedges + fwedges, has_far=True,
                         main_points=tuple(inner), far_points=tuple(far_pts))


def plan(u, profile: SingularityProfile, spec: QuadratureSpec) -> Decomposition:
    """Decompose the plane for an integrand singular at the punctures of `u`."""
    points = profile.points_for(u)
    return plan_points(points, profile.far_exponent, profile.far_angular_order,
                       spec, support_radius=profile.support_radius,
                       base_radius=4.0 * max(u.max_abs, 1.0))
