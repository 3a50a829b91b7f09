"""Complex hyperbolic side: the polyhedron-area Kahler potential and its Gram.

The area A(u) = int prod_l |z - u_l|^(-2 alpha_l) dx dy / pi is the Kahler
potential's exponential: the metric Gram in the coordinates (u_2, ..., u_{n-2})
is the Hessian of -log A (ball-model sign: the literal Hessian of +log A is
negative definite). Entries:

    h_jk = (d_j A)(dbar_k A)/A^2 - (d_j dbar_k A)/A.

First derivatives and off-diagonal second derivatives are conditionally
convergent integrals handled by angular cancellation on puncture-centered
polar patches; the formally differentiated diagonal integral diverges, so
diagonal entries come from Wirtinger finite differences of the convergent
analytic gradient (cross-checked by the all-FD route tv_gram_fd).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cone_moduli import _speed
from cone_moduli.domain import AngleVector, HermitianGram, ModuliPoint
from cone_moduli.errors import EvalAtPole
from cone_moduli.fd import mixed_second, wirtinger
from cone_moduli.quadrature import QuadratureSpec, SingularityProfile, integrate


@dataclass(frozen=True)
class PotentialReport:
    """Area, gradient in the free coordinates, and quadrature error bounds."""

    area: float
    grad: tuple[complex, ...]
    area_err: float
    grad_err: tuple[float, ...]


def density(angles: AngleVector, point: ModuliPoint, z):
    """Flat-metric density prod_l |z - u_l|^(-2 alpha_l) at z (scalar or array)."""
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    if scalar:
        point.guard_not_pole(complex(z))
    zz = np.asarray([z] if scalar else z, dtype=complex)
    vals = _speed.prod_abs_pow(zz, np.asarray(point.finite_punctures),
                               -2.0 * np.asarray(angles.finite))
    return float(vals[0]) if scalar else vals


def _area_profile(angles: AngleVector) -> SingularityProfile:
    return SingularityProfile(
        exponents=tuple(-2.0 * a for a in angles.finite),
        far_exponent=2.0 * angles.alphas[-1] - 4.0)


def area(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
         threads: int = 1) -> tuple[float, float]:
    """A(u) and its quadrature error bound."""
    res = integrate(lambda z: density(angles, point, z), point,
                    _area_profile(angles), spec, threads=threads)
    a = res.value.real
    if a <= 0:
        raise EvalAtPole(f"area came out non-positive ({a}); bad configuration")
    return a, res.err


def _grad_component(angles, point, spec, j, threads=1):
    """d A / d u_j = alpha_j int density/(z - u_j); j indexes the punctures."""
    uj = point.finite_punctures[j]
    al = angles.finite
    exps = [-2.0 * a for a in al]
    orders = [0] * len(al)
    exps[j] -= 1.0
    orders[j] = -1
    prof = SingularityProfile(exponents=tuple(exps), angular_orders=tuple(orders),
                              far_exponent=2.0 * angles.alphas[-1] - 5.0,
                              far_angular_order=-1)

    def f(z):
        return density(angles, point, z) / (z - uj)

    res = integrate(f, point, prof, spec, threads=threads)
    return al[j] * res.value, al[j] * res.err


def grad_area(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
              threads: int = 1):
    """(d A/d u_j)_{j=2..n-2} with error bounds."""
    vals, errs = [], []
    for j in range(2, len(point.finite_punctures)):
        v, e = _grad_component(angles, point, spec, j, threads)
        vals.append(v)
        errs.append(e)
    return np.asarray(vals), np.asarray(errs)


def _mixed_component(angles, point, spec, j, k, threads=1):
    """d_j dbar_k A (j != k) = alpha_j alpha_k int density/((z-u_j) conj(z-u_k))."""
    uj = point.finite_punctures[j]
    uk = point.finite_punctures[k]
    al = angles.finite
    exps = [-2.0 * a for a in al]
    orders = [0] * len(al)
    exps[j] -= 1.0
    orders[j] -= 1
    exps[k] -= 1.0
    orders[k] += 1
    prof = SingularityProfile(exponents=tuple(exps), angular_orders=tuple(orders),
                              far_exponent=2.0 * angles.alphas[-1] - 6.0)

    def f(z):
        return density(angles, point, z) / ((z - uj) * np.conj(z - uk))

    res = integrate(f, point, prof, spec, threads=threads)
    coeff = al[j] * al[k]
    return coeff * res.value, coeff * res.err


def potential_report(angles, point, spec, threads: int = 1) -> PotentialReport:
    a, aerr = area(angles, point, spec, threads)
    g, gerr = grad_area(angles, point, spec, threads)
    return PotentialReport(a, tuple(g), aerr, tuple(gerr))


def default_fd_step(point: ModuliPoint) -> float:
    return 1e-3 * point.min_separation


def tv_gram(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
            fd_step: float | None = None, threads: int = 1) -> HermitianGram:
    """Semi-analytic Gram of the complex hyperbolic metric."""
    if fd_step is None:
        fd_step = default_fd_step(point)
    n_free = len(point.free_coords)
    a, aerr = area(angles, point, spec, threads)
    g, gerr = grad_area(angles, point, spec, threads)

    d2 = np.zeros((n_free, n_free), dtype=complex)
    d2err = np.zeros((n_free, n_free))
    for j in range(n_free):
        for k in range(j + 1, n_free):
            v, e = _mixed_component(angles, point, spec, j + 2, k + 2, threads)
            d2[j, k] = v
            d2[k, j] = np.conj(v)
            d2err[j, k] = d2err[k, j] = e

    for j in range(n_free):
        def grad_j(w, _j=j):
            moved = point.replace_free(_j, w)
            return _grad_component(angles, moved, spec, _j + 2, threads)[0]

        v, fd_err = wirtinger(grad_j, point.free_coords[j], fd_step, conj=True)
        d2[j, j] = v
        d2err[j, j] = fd_err + gerr[j] / fd_step

    gc = np.conj(g)
    h = np.outer(g, gc) / a ** 2 - d2 / a
    herr = (d2err / a
            + (np.outer(np.abs(g), gerr) + np.outer(gerr, np.abs(g))) / a ** 2
            + np.abs(h) * 2.0 * aerr / a)
    return HermitianGram(h, herr, label="tv_gram")


def tv_gram_fd(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
               fd_step: float | None = None, threads: int = 1) -> HermitianGram:
    """Cross-check route: double Wirtinger differences of -log A."""
    if fd_step is None:
        fd_step = default_fd_step(point)
    n_free = len(point.free_coords)
    log_cache: dict[tuple, float] = {}

    def neg_log_area(coords) -> float:
        key = tuple(coords)
        if key not in log_cache:
            moved = ModuliPoint(key, eps_min=point.eps_min)
            log_cache[key] = -math.log(area(angles, moved, spec, threads)[0])
        return log_cache[key]

    h = np.zeros((n_free, n_free), dtype=complex)
    herr = np.zeros((n_free, n_free))
    base = list(point.free_coords)
    for j in range(n_free):
        for k in range(n_free):
            if j == k:
                # d_j dbar_j F(u) = d_z dbar_w F(..., z + w - c, ...) at z = w = c
                def f(zj, wk, _j=j):
                    coords = list(base)
                    coords[_j] = zj + wk - base[_j]
                    return neg_log_area(coords)
            else:
                def f(zj, wk, _j=j, _k=k):
                    coords = list(base)
                    coords[_j] = zj
                    coords[_k] = wk
                    return neg_log_area(coords)

            v, e = mixed_second(f, base[j], base[k], fd_step)
            h[j, k] = v
            # second term: quadrature-noise amplification floor
            herr[j, k] = e + 1e-11 / fd_step ** 2
    return HermitianGram(h, herr, label="tv_gram_fd")


def curvature_probe(angles: AngleVector, point: ModuliPoint, spec: QuadratureSpec,
                    delta: float = 0.02, threads: int = 1) -> float:
    """Gaussian curvature -(1/h) * 4 d dbar log h of the n = 4 scalar metric,
    by a 5-point Laplacian of log h with one Richardson level."""
    if len(point.free_coords) != 1:
        raise ValueError("curvature probe is defined for n = 4 (scalar metric)")
    u2 = point.free_coords[0]
    cache: dict[complex, float] = {}

    def log_h(w) -> float:
        w = complex(w)
        if w not in cache:
            moved = point.replace_free(0, w)
            gram = tv_gram(angles, moved, spec, threads=threads)
            cache[w] = math.log(gram.entries[0, 0].real)
        return cache[w]

    def lap(h_step: float) -> float:
        s = (log_h(u2 + h_step) + log_h(u2 - h_step)
             + log_h(u2 + 1j * h_step) + log_h(u2 - 1j * h_step)
             - 4.0 * log_h(u2))
        return s / (4.0 * h_step * h_step)

    l1 = lap(delta)
    l2 = lap(delta / 2.0)
    ddbar_log_h = (4.0 * l2 - l1) / 3.0
    h_val = math.exp(log_h(u2))
    return -4.0 * ddbar_log_h / h_val
