"""Quadrature engine: spectral patch rules, adaptive wedge refinement,
principal values, and deterministic reduction.

Disk patches: radial Gauss-Jacobi with weight r^sigma (sigma = e + 1 + |m|)
composed with an equispaced angular trapezoid, evaluated angular-sum-first so
that a declared divergent angular mode cancels exactly before the radial rule
touches it. Wedge panels: tensor Gauss-Legendre in (theta, log r). Far field:
identical machinery on the pullback f(1/w)/|w|^4. All integrals are taken
against the measure dx dy / pi.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from cone_moduli.errors import HolderDataMissing, PunctureTooClose
from cone_moduli.quadrature.geometry import (
    Decomposition,
    DiskPatch,
    QuadratureSpec,
    WedgePanel,
    plan,
    plan_points,
)
from cone_moduli.quadrature.profile import SingularityProfile, SingularPoint

__all__ = [
    "IntegralResult", "integrate", "integrate_points", "integrate_pv",
    "integrate_pv_points", "integrate_decomposition", "plan", "plan_points",
]


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    err: float
    converged: bool
    n_evals: int

    def __iter__(self):
        yield self.value
        yield self.err


@lru_cache(maxsize=512)
def _jacobi_rule(n: int, sigma: float):
    """Nodes in (0,1) and weights for int_0^1 t^sigma g(t) dt."""
    x, v = roots_jacobi(n, 0.0, sigma)
    t = 0.5 * (x + 1.0)
    w = v * 0.5 ** (sigma + 1.0)
    return t, w


@lru_cache(maxsize=128)
def _legendre_rule(q: int):
    """Nodes and weights on (0,1)."""
    x, w = roots_legendre(q)
    return 0.5 * (x + 1.0), 0.5 * w


def _eval_integrand(f, z, inverted: bool):
    if not inverted:
        return np.asarray(f(z), dtype=complex)
    zz = 1.0 / z
    vals = np.asarray(f(zz), dtype=complex)
    return vals * np.abs(z) ** -4


def _disk_once(patch: DiskPatch, f, n_r: int, n_th: int, pv_const):
    t, w = _jacobi_rule(n_r, patch.sigma)
    r = patch.radius * t
    theta = (np.arange(n_th) + 0.5) * (2.0 * math.pi / n_th)
    z = patch.center + np.outer(r, np.exp(1j * theta))
    vals = _eval_integrand(f, z, patch.inverted)
    if pv_const is not None:
        vals = vals - pv_const / (z - patch.center) ** 2
    ang_sum = vals.sum(axis=1)
    sig = patch.sigma
    h = ang_sum * r ** (1.0 - sig)
    radial = patch.radius ** (sig + 1.0) * np.sum(w * h)
    return complex(radial * (2.0 / n_th)), z.size


def _disk_value(patch: DiskPatch, f, spec: QuadratureSpec, pv_const=None):
    v_full, ev1 = _disk_once(patch, f, spec.radial_order, spec.angular_nodes, pv_const)
    v_half, ev2 = _disk_once(patch, f, max(4, spec.radial_order // 2),
                             max(4, spec.angular_nodes // 2), pv_const)
    return v_full, abs(v_full - v_half), ev1 + ev2


def _corner_once(patch, f, n_r: int, q: int):
    t, v = _jacobi_rule(n_r, patch.sigma)
    tq, tw = _legendre_rule(q)
    theta = patch.t0 + (patch.t1 - patch.t0) * tq
    cap = np.asarray(patch.cap_of(theta), dtype=float)
    r = np.outer(t, cap)
    z = patch.cell.center + r * np.exp(1j * theta)[None, :]
    vals = _eval_integrand(f, z, patch.inverted)
    sig = patch.sigma
    g = vals * r ** (1.0 - sig)
    radial = v @ g
    total = (patch.t1 - patch.t0) * np.sum(tw * cap ** (sig + 1.0) * radial) / math.pi
    return complex(total), z.size


def _corner_value(patch, f, spec: QuadratureSpec):
    v_full, ev1 = _corner_once(patch, f, spec.radial_order, spec.mid_order)
    v_half, ev2 = _corner_once(patch, f, max(4, spec.radial_order // 2),
                               max(4, spec.mid_order // 2))
    return v_full, abs(v_full - v_half), ev1 + ev2


def _wedge_once(panel: WedgePanel, f, q: int):
    cell = panel.cell
    tq, tw = _legendre_rule(q)
    theta = panel.t0 + (panel.t1 - panel.t0) * tq
    s = panel.s0 + (panel.s1 - panel.s0) * tq
    rho = cell.rho(theta)
    lam = np.log(rho / cell.r_inner)
    r = cell.r_inner * np.exp(np.outer(s, lam))
    z = cell.center + r * np.exp(1j * theta)[None, :]
    vals = _eval_integrand(f, z, panel.inverted)
    jac = r * r * lam[None, :] / math.pi
    scale = (panel.t1 - panel.t0) * (panel.s1 - panel.s0)
    total = scale * np.einsum("i,j,ij->", tw, tw, vals * jac)
    return complex(total), z.size


def _wedge_value(panel: WedgePanel, f, order: int):
    v_full, ev1 = _wedge_once(panel, f, order)
    v_half, ev2 = _wedge_once(panel, f, max(4, order // 2))
    return v_full, abs(v_full - v_half), ev1 + ev2


def _refine_wedge(panel: WedgePanel, f, spec: QuadratureSpec, share: float,
                  depth: int, seed_value=None):
    """Dyadic bisection (longer parametric side first) until the embedded
    estimate fits the error share or the depth budget runs out."""
    if seed_value is None:
        value, est, evals = _wedge_value(panel, f, spec.mid_order)
    else:
        value, est, evals = seed_value
    if est <= share or depth >= spec.refinement_depth:
        return value, est, evals, est <= share, 1
    tmid = 0.5 * (panel.t0 + panel.t1)
    smid = 0.5 * (panel.s0 + panel.s1)
    theta_len = panel.t1 - panel.t0
    s_len = panel.s1 - panel.s0
    if theta_len >= s_len * math.log(2.0) * 1.5:
        kids = (WedgePanel(panel.cell, panel.t0, tmid, panel.s0, panel.s1,
                           panel.inverted, panel.index),
                WedgePanel(panel.cell, tmid, panel.t1, panel.s0, panel.s1,
                           panel.inverted, panel.index))
    else:
        kids = (WedgePanel(panel.cell, panel.t0, panel.t1, panel.s0, smid,
                           panel.inverted, panel.index),
                WedgePanel(panel.cell, panel.t0, panel.t1, smid, panel.s1,
                           panel.inverted, panel.index))
    tot_v, tot_e, tot_n, ok, cnt = 0j, 0.0, evals, True, 0
    for kid in kids:
        v, e, n, k_ok, k_cnt = _refine_wedge(kid, f, spec, 0.5 * share, depth + 1)
        tot_v += v
        tot_e += e
        tot_n += n
        ok = ok and k_ok
        cnt += k_cnt
    return tot_v, tot_e, tot_n, ok, cnt


def integrate_decomposition(f, decomp: Decomposition, spec: QuadratureSpec,
                            pv=None, threads: int = 1,
                            deterministic: bool = True) -> IntegralResult:
    """Integrate f dx dy / pi over the planned decomposition.

    `pv`, when given, is (z0, g_at_z0): the disk patch centered at z0 (in
    either chart) integrates f - g(z0)/(z - z0)^2 instead of f; the removed
    kernel has vanishing principal value on centered disks.
    """
    pv_for_disk = {}
    if pv is not None:
        z0, g0 = pv
        matched = False
        for d in decomp.disks:
            target = 1.0 / z0 if d.inverted else z0
            if abs(d.center - target) <= 1e-12 * (1.0 + abs(target)):
                const = g0 if not d.inverted else g0 * (np.conj(z0) / z0) ** 2
                pv_for_disk[d.index] = complex(const)
                matched = True
                break
        if not matched:
            raise HolderDataMissing(
                f"no disk patch centered at the principal-value pole {z0}")

    disk_jobs = [(d, pv_for_disk.get(d.index)) for d in decomp.disks]

    def run_disk(job):
        d, const = job
        return _disk_value(d, f, spec, pv_const=const)

    def run_corner(patch):
        return _corner_value(patch, f, spec)

    def run_wedge(panel):
        return _wedge_value(panel, f, spec.mid_order)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            disk_res = list(ex.map(run_disk, disk_jobs))
            corner_res = list(ex.map(run_corner, decomp.corners))
            seed_res = list(ex.map(run_wedge, decomp.wedges))
    else:
        disk_res = [run_disk(j) for j in disk_jobs]
        corner_res = [run_corner(c) for c in decomp.corners]
        seed_res = [run_wedge(p) for p in decomp.wedges]

    disk_res = disk_res + corner_res
    scale = sum(abs(v) for v, _, _ in disk_res) + sum(abs(v) for v, _, _ in seed_res)
    scale = max(scale, 1e-300)
    n_wedges = max(1, len(decomp.wedges))
    floor_share = spec.target_rel_tol * scale / (2.0 * n_wedges)

    def run_refine(args):
        panel, seed = args
        share = floor_share + 0.5 * spec.target_rel_tol * abs(seed[0])
        return _refine_wedge(panel, f, spec, share, 0, seed_value=seed)

    refine_jobs = list(zip(decomp.wedges, seed_res))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            wedge_res = list(ex.map(run_refine, refine_jobs))
    else:
        wedge_res = [run_refine(j) for j in refine_jobs]

    values = np.asarray([v for v, _, _ in disk_res]
                        + [v for v, _, _, _, _ in wedge_res], dtype=complex)
    errs = np.asarray([e for _, e, _ in disk_res]
                      + [e for _, e, _, _, _ in wedge_res], dtype=float)
    evals = sum(n for _, _, n in disk_res) + sum(n for _, _, n, _, _ in wedge_res)
    converged = all(ok for _, _, _, ok, _ in wedge_res)
    if deterministic:
        value = complex(np.sum(values))
        err = float(np.sum(errs))
    else:
        value = complex(sum(values.tolist()))
        err = float(sum(errs.tolist()))
    return IntegralResult(value, err, converged, evals)


def integrate(f, u, profile: SingularityProfile, spec: QuadratureSpec,
              threads: int = 1, deterministic: bool = True) -> IntegralResult:
    """Integral of f against dx dy / pi over the plane, with the singular
    behavior of f declared per puncture of the configuration u."""
    decomp = plan(u, profile, spec)
    return integrate_decomposition(f, decomp, spec, threads=threads,
                                   deterministic=deterministic)


def integrate_points(f, points: list[SingularPoint], far_exponent: float,
                     far_angular_order: int, spec: QuadratureSpec,
                     support_radius: float | None = None, threads: int = 1,
                     deterministic: bool = True,
                     base_radius: float | None = None) -> IntegralResult:
    """As `integrate`, but with explicit singular centers (operator kernels
    contribute poles away from the punctures). `base_radius` anchors the
    far-chart takeover to the configuration scale so that distant evaluation
    points live in the inversion chart rather than inflating the main disk."""
    decomp = plan_points(points, far_exponent, far_angular_order, spec,
                         support_radius=support_radius, base_radius=base_radius)
    return integrate_decomposition(f, decomp, spec, threads=threads,
                                   deterministic=deterministic)


def _with_pv_point(points, z0):
    pts = list(points)
    for p in pts:
        if abs(p.center - z0) < 1e-9 * (1.0 + abs(z0)):
            raise PunctureTooClose(
                f"principal-value pole {z0} coincides with declared center "
                f"{p.center}; evaluate away from punctures")
    pts.append(SingularPoint(complex(z0), -1.0, -1))
    return pts


def integrate_pv_points(f, z0: complex, g_at_z0: complex,
                        points: list[SingularPoint], far_exponent: float,
                        far_angular_order: int, spec: QuadratureSpec,
                        support_radius: float | None = None, threads: int = 1,
                        deterministic: bool = True,
                        base_radius: float | None = None) -> IntegralResult:
    """Principal value of f = g(z)/(z - z0)^2 (g Holder at z0, value supplied)."""
    if g_at_z0 is None:
        raise HolderDataMissing("principal value needs g(z0)")
    pts = _with_pv_point(points, z0)
    decomp = plan_points(pts, far_exponent, far_angular_order, spec,
                         support_radius=support_radius, base_radius=base_radius)
    return integrate_decomposition(f, decomp, spec, pv=(complex(z0), complex(g_at_z0)),
                                   threads=threads, deterministic=deterministic)


def integrate_pv(f, z0: complex, g_at_z0: complex, u,
                 profile: SingularityProfile, spec: QuadratureSpec,
                 threads: int = 1, deterministic: bool = True) -> IntegralResult:
    """Principal-value integral with puncture singularities declared via `u`
    and `profile`, plus the double pole at z0."""
    if g_at_z0 is None:
        raise HolderDataMissing("principal value needs g(z0)")
    pts = _with_pv_point(profile.points_for(u), z0)
    decomp = plan_points(pts, profile.far_exponent, profile.far_angular_order,
                         spec, support_radius=profile.support_radius)
    return integrate_decomposition(f, decomp, spec, pv=(complex(z0), complex(g_at_z0)),
                                   threads=threads, deterministic=deterministic)
