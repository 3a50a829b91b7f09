"""Brute-force integration oracle, independent of the engine.

Graded midpoint rule on a vertical-strip partition: each singular center
(assumed on the real axis) owns the strip between the midlines to its
neighbors, integrated in polar coordinates around the center with a
power-graded radial substitution r = rho(theta) s^kappa that tames the
declared algebraic singularity; the angular integral is split exactly at the
strip/circle corner angles so every midpoint panel sees a smooth integrand.
The far field (when present) is a plain graded polar midpoint rule on the
pullback f(1/w)/|w|^4. No code is shared with the quadrature engine.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _strip_rho(theta, c, x_left, x_right, big_r):
    """Radial extent of {x_left <= Re z <= x_right, |z| <= R} from c (real)."""
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    rho = np.full(theta.shape, np.inf)
    if x_right is not None:
        mask = cos_t > 1e-15
        rho[mask] = np.minimum(rho[mask], (x_right - c) / cos_t[mask])
    if x_left is not None:
        mask = cos_t < -1e-15
        rho[mask] = np.minimum(rho[mask], (x_left - c) / cos_t[mask])
    beta = c * cos_t
    circ = -beta + np.sqrt(np.maximum(beta * beta + big_r * big_r - c * c, 0.0))
    return np.minimum(rho, circ)


def _corner_angles(c, x_left, x_right, big_r):
    """Angles (from c) of the strip/circle corners plus the line switch
    directions; midpoint panels never straddle these."""
    angles = {0.0, 0.5 * math.pi, 1.5 * math.pi}
    for edge in (x_left, x_right):
        if edge is None:
            continue
        if abs(edge) < big_r:
            y = math.sqrt(big_r * big_r - edge * edge)
            for yy in (y, -y):
                angles.add(math.atan2(yy, edge - c) % TWO_PI)
    return sorted(angles)


def _polar_patch(f, center, rho_fn, budget, kappa, e_min, breaks):
    """Midpoint rule sum of f over the star-shaped region around `center`."""
    total = 0.0 + 0.0j
    spans = []
    for a, b in zip(breaks, breaks[1:] + [breaks[0] + TWO_PI]):
        if b - a > 1e-12:
            spans.append((a, b))
    weight_total = sum(b - a for a, b in spans)
    n_all = max(int(math.sqrt(budget / 2.0)), 8)
    for a, b in spans:
        n_t = max(int(round(2 * n_all * (b - a) / weight_total)), 4)
        n_r = n_all
        theta = a + (b - a) * (np.arange(n_t) + 0.5) / n_t
        dth = (b - a) / n_t
        s = (np.arange(n_r) + 0.5) / n_r
        ds = 1.0 / n_r
        rho = rho_fn(theta)
        r = rho[None, :] * (s ** kappa)[:, None]
        z = center + r * np.exp(1j * theta)[None, :]
        vals = np.asarray(f(z), dtype=complex)
        # dA = r dr dtheta, r = rho s^kappa -> r dr = rho^2 kappa s^(2 kappa - 1) ds
        jac = (rho * rho)[None, :] * kappa * (s ** (2 * kappa - 1))[:, None]
        total += np.sum(vals * jac) * dth * ds
    return total / math.pi


def plane_integral(f, centers, exponents, far_exponent=None, support_radius=None,
                   n_cells=10_000_000):
    """int f dx dy / pi with algebraic singularities at real `centers`.

    Either `support_radius` (f vanishes outside |z| <= support_radius) or
    `far_exponent` (|f| ~ |z|^far_exponent) must be given.
    """
    centers = [float(c) for c in centers]
    order = np.argsort(centers)
    centers = [centers[i] for i in order]
    exponents = [float(exponents[i]) for i in order]
    if support_radius is not None:
        big_r = float(support_radius)
        regions = len(centers)
    else:
        big_r = 4.0 * max(1.0, max(abs(c) for c in centers))
        regions = len(centers) + 1
    budget = n_cells / regions

    total = 0.0 + 0.0j
    mids = [0.5 * (a + b) for a, b in zip(centers, centers[1:])]
    for i, c in enumerate(centers):
        x_left = mids[i - 1] if i > 0 else None
        x_right = mids[i] if i < len(mids) else None
        kappa = min(8, max(2, math.ceil(3.0 / (exponents[i] + 2.0))))
        breaks = _corner_angles(c, x_left, x_right, big_r)
        total += _polar_patch(
            f, c, lambda th, c=c, xl=x_left, xr=x_right: _strip_rho(th, c, xl, xr, big_r),
            budget, kappa, exponents[i], breaks)

    if support_radius is None:
        e_w = -float(far_exponent) - 4.0
        kappa = min(8, max(2, math.ceil(3.0 / (e_w + 2.0))))

        def f_far(w):
            return np.asarray(f(1.0 / w), dtype=complex) * np.abs(w) ** -4

        total += _polar_patch(f_far, 0.0, lambda th: np.full(th.shape, 1.0 / big_r),
                              budget, kappa, e_w, [0.0])
    return total
