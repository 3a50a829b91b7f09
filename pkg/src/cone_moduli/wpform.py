"""Weil-Petersson side: dual basis, cometric Gram, induced metric Gram,
pairings, and harmonic projection.

The dual basis R_j := R(., u_j) (partial fractions of the three-point
Cauchy kernel at the free punctures) spans the integrable quadratic
differentials; the cometric is

    C_jk = Vol(X,g) * int R_j conj(R_k) prod_l |z-u_l|^(2 alpha_l) dx dy/pi,

and the metric Gram in the coordinate tangent basis is the conjugate
(equivalently transposed) inverse of C: the pairing of R_j against d/du_k is
-delta_jk, and the sign drops out of the inverse while the conjugation does
not. Both C and the metric Gram are Hermitian positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cone_moduli import _speed
from cone_moduli.domain import (
    AngleVector,
    BeltramiRep,
    HermitianGram,
    ModuliPoint,
    QuadDiff,
)
from cone_moduli.errors import SingularCometric
from cone_moduli.quadrature import (
    QuadratureSpec,
    SingularityProfile,
    integrate,
    integrate_points,
    merge_points,
)
from cone_moduli.tvform import area

COND_LIMIT = 1e10


@dataclass(frozen=True)
class CometricGram:
    """Gram of the dual basis under the volume-weighted cometric, plus the
    volume itself and per-entry quadrature error bounds."""

    entries: np.ndarray
    vol: float
    err: np.ndarray


def dual_basis(point: ModuliPoint) -> list[QuadDiff]:
    """R(., u_j) for each free puncture u_j: residues (u_j - 1) at 0, -u_j at
    1, and 1 at u_j."""
    basis = []
    pts = point.finite_punctures
    for j in range(2, len(pts)):
        res = [0j] * len(pts)
        res[0] = pts[j] - 1.0
        res[1] = -pts[j]
        res[j] = 1.0 + 0j
        basis.append(QuadDiff(tuple(res), point))
    return basis


def _pole_positions(point: ModuliPoint, j: int) -> set[int]:
    """Indices of the finite punctures where R_j has a pole."""
    return {0, 1, j}


def _cometric_profile(angles: AngleVector, point: ModuliPoint, j: int,
                      k: int) -> SingularityProfile:
    al = angles.finite
    poles_j = _pole_positions(point, j)
    poles_k = _pole_positions(point, k)
    exps, orders = [], []
    for idx in range(len(al)):
        e = 2.0 * al[idx]
        m = 0
        if idx in poles_j:
            e -= 1.0
            m -= 1
        if idx in poles_k:
            e -= 1.0
            m += 1
        exps.append(e)
        orders.append(m)
    return SingularityProfile(exponents=tuple(exps), angular_orders=tuple(orders),
                              far_exponent=-2.0 - 2.0 * angles.alphas[-1])


def _weight(angles, point, z):
    """e^{-gamma} = prod |z - u_l|^{+2 alpha_l}."""
    return _speed.prod_abs_pow(z, np.asarray(point.finite_punctures),
                               2.0 * np.asarray(angles.finite))


def cometric_gram(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
                  vol: float | None = None, vol_err: float = 0.0,
                  threads: int = 1) -> CometricGram:
    """C_jk = Vol * int R_j conj(R_k) e^{-gamma} |dz|^2, Hermitian PD."""
    if vol is None:
        vol, vol_err = area(angles, point, spec, threads)
    basis = dual_basis(point)
    n_free = len(basis)
    entries = np.zeros((n_free, n_free), dtype=complex)
    errs = np.zeros((n_free, n_free))
    for j in range(n_free):
        for k in range(j, n_free):
            prof = _cometric_profile(angles, point, j + 2, k + 2)
            rj, rk = basis[j], basis[k]

            def f(z, _rj=rj, _rk=rk):
                return _rj(z) * np.conj(_rk(z)) * _weight(angles, point, z)

            res = integrate(f, point, prof, spec, threads=threads)
            entries[j, k] = vol * res.value
            entries[k, j] = np.conj(entries[j, k])
            q_err = vol * res.err + abs(res.value) * vol_err
            errs[j, k] = errs[k, j] = q_err
    return CometricGram(entries, vol, errs)


def wp_gram(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
            cometric: CometricGram | None = None,
            threads: int = 1) -> HermitianGram:
    """Metric Gram in the coordinate basis: transpose(C^{-1})."""
    if cometric is None:
        cometric = cometric_gram(angles, point, spec, threads=threads)
    c = cometric.entries
    cond = np.linalg.cond(c)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularCometric(f"cometric condition number {cond:.3e} > {COND_LIMIT:.0e}")
    h = np.linalg.inv(c).T
    inv_norm = np.linalg.norm(np.linalg.inv(c), 2)
    err_scale = inv_norm ** 2 * float(np.max(cometric.err))
    herr = np.full(h.shape, err_scale)
    return HermitianGram(h, herr, label="wp_gram")


def pairing(phi: QuadDiff, rep: BeltramiRep, spec: QuadratureSpec,
            threads: int = 1) -> complex:
    """<phi, v> = int phi * rep |dz|^2 (same value for any representative of
    the same tangent vector; that equality is the representation-independence
    property, not an implementation shortcut)."""
    point = phi.basepoint

    def f(z):
        return phi(z) * rep(z)

    if rep.variant == BeltramiRep.SMOOTH_COMPACT:
        rim = rep.support_radius
        contribs = []
        for idx, u in enumerate(point.finite_punctures):
            if phi.residues[idx] != 0:
                if abs(u) <= 0.995 * rim:
                    contribs.append((u, -1.0, -1))
                else:
                    contribs.append((u, 0.0, 0))
            else:
                contribs.append((u, 0.0, 0))
        pts = merge_points(contribs)
        res = integrate_points(f, pts, -6.0, 0, spec, support_radius=rim,
                               threads=threads)
        return res.value

    if rep.point.finite_punctures != point.finite_punctures:
        raise ValueError("pairing needs phi and the representative over the "
                         "same configuration")
    al = rep.angles.finite
    exps, orders = [], []
    psi = rep.psi
    for idx in range(len(al)):
        e, m = 2.0 * al[idx], 0
        if phi.residues[idx] != 0:
            e -= 1.0
            m -= 1
        if psi.residues[idx] != 0:
            e -= 1.0
            m += 1
        exps.append(e)
        orders.append(m)
    prof = SingularityProfile(exponents=tuple(exps), angular_orders=tuple(orders),
                              far_exponent=-2.0 - 2.0 * rep.angles.alphas[-1])
    res = integrate(f, point, prof, spec, threads=threads)
    return res.value


def harmonic_projection(mu: BeltramiRep, angles: AngleVector, point: ModuliPoint,
                        spec: QuadratureSpec, cometric: CometricGram | None = None,
                        threads: int = 1) -> QuadDiff:
    """The quadratic differential psi whose harmonic representative pairs with
    every dual-basis element exactly as mu does: solve C conj(c) = b with
    b_j = <R_j, mu>, psi = sum c_j R_j."""
    if cometric is None:
        cometric = cometric_gram(angles, point, spec, threads=threads)
    c = cometric.entries
    cond = np.linalg.cond(c)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularCometric(f"cometric condition number {cond:.3e} > {COND_LIMIT:.0e}")
    basis = dual_basis(point)
    b = np.asarray([pairing(rj, mu, spec, threads=threads) for rj in basis])
    coeffs = np.conj(np.linalg.solve(c, b))
    residues = np.zeros(len(point.finite_punctures), dtype=complex)
    for cf, rj in zip(coeffs, basis):
        residues += cf * np.asarray(rj.residues)
    return QuadDiff(tuple(residues), point)


def harmonic_rep_of(psi: QuadDiff, angles: AngleVector, point: ModuliPoint,
                    vol: float) -> BeltramiRep:
    return BeltramiRep.harmonic(psi, angles, point, vol)


def coordinate_harmonic_reps(angles: AngleVector, point: ModuliPoint,
                             cometric: CometricGram) -> list[BeltramiRep]:
    """Harmonic representatives of the coordinate tangent vectors d/du_j:
    psi^{(j)} = sum_a c_a R_a with C conj(c) = -e_j (the -1 is the duality
    sign between R_j and du_j)."""
    c = cometric.entries
    n = c.shape[0]
    basis = dual_basis(point)
    coeff = np.conj(np.linalg.solve(c, -np.eye(n)))
    reps = []
    for j in range(n):
        residues = np.zeros(len(point.finite_punctures), dtype=complex)
        for a in range(n):
            residues += coeff[a, j] * np.asarray(basis[a].residues)
        psi = QuadDiff(tuple(residues), point)
        reps.append(BeltramiRep.harmonic(psi, angles, point, cometric.vol))
    return reps


def wp_gram_direct(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
                   cometric: CometricGram | None = None,
                   threads: int = 1) -> HermitianGram:
    """Metric Gram by direct pairing of the coordinate vectors' harmonic
    representatives: h(d_j, d_k) = int psi^{(k)} a^{(j)} |dz|^2. Fresh
    quadrature per entry; cross-checks the inversion convention of wp_gram."""
    if cometric is None:
        cometric = cometric_gram(angles, point, spec, threads=threads)
    reps = coordinate_harmonic_reps(angles, point, cometric)
    n = len(reps)
    h = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            h[j, k] = pairing(reps[k].psi, reps[j], spec, threads=threads)
    err = np.full(h.shape, float(np.max(cometric.err)) *
                  np.linalg.norm(np.linalg.inv(cometric.entries), 2) ** 2 * 3.0
                  + 1e-12)
    return HermitianGram(h, err, label="wp_gram_direct")
