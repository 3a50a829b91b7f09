"""Pure-numpy reference implementations of the hot array primitives.

Used as the fallback backend when the compiled extension is unavailable,
and as the ground truth the compiled backend is tested against.
"""

import numpy as np


def prod_abs_pow(z, centers, powers, out=None):
    """prod_k |z - centers[k]|**powers[k], elementwise over z."""
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros(z.shape, dtype=np.float64)
    for c, p in zip(centers, powers):
        acc += p * np.log(np.abs(z - c))
    res = np.exp(acc)
    if out is not None:
        out[...] = res
        return out
    return res


def rational_sum(z, centers, residues, out=None):
    """sum_k residues[k] / (z - centers[k]), elementwise over z."""
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros(z.shape, dtype=np.complex128)
    for c, r in zip(centers, residues):
        acc += r / (z - c)
    if out is not None:
        out[...] = acc
        return out
    return acc


def rational_sum_constrained(z, centers, residues, out=None):
    """rational_sum for residues with sum r = 0 and sum r*c = 0.

    Beyond |z| > 2(max|c|+1) the terms cancel to O(|z|^-3); there the exact
    rewrite sum_k r_k c_k^2 / (z^2 (z - c_k)) avoids the catastrophic
    cancellation of the plain sum."""
    z = np.asarray(z, dtype=np.complex128)
    thresh = 2.0 * (max(abs(c) for c in centers) + 1.0)
    far = np.abs(z) > thresh
    acc = np.zeros(z.shape, dtype=np.complex128)
    near = ~far
    zn = z[near]
    for c, r in zip(centers, residues):
        acc[near] += r / (zn - c)
    if np.any(far):
        zf = z[far]
        zf2 = zf * zf
        for c, r in zip(centers, residues):
            acc[far] += (r * c * c) / (zf2 * (zf - c))
    if out is not None:
        out[...] = acc
        return out
    return acc


def r_kernel(zeta, z, out=None):
    """R(zeta, z) = z(z-1) / (zeta (zeta-1) (zeta-z)), elementwise over zeta."""
    zeta = np.asarray(zeta, dtype=np.complex128)
    res = (z * (z - 1.0)) / (zeta * (zeta - 1.0) * (zeta - z))
    if out is not None:
        out[...] = res
        return out
    return res


def cauchy_pair(zeta, z, out=None):
    """1/(zeta - z) - 1/zeta = z/(zeta (zeta - z)); the product form is
    cancellation-free at large |zeta|."""
    zeta = np.asarray(zeta, dtype=np.complex128)
    res = z / (zeta * (zeta - z))
    if out is not None:
        out[...] = res
        return out
    return res
