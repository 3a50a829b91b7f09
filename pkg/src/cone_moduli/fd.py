"""Wirtinger finite differences with one Richardson extrapolation level.

d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2; central stencils,
so the plain estimates carry O(h^2) truncation and the extrapolated ones
O(h^4). `f` maps a complex parameter to a complex (or real) value.
"""

from __future__ import annotations

from cone_moduli.errors import FDStepDegenerate


def _first(f, z0, h, conj):
    dx = (f(z0 + h) - f(z0 - h)) / (2.0 * h)
    dy = (f(z0 + 1j * h) - f(z0 - 1j * h)) / (2.0 * h)
    if conj:
        return 0.5 * (dx + 1j * dy)
    return 0.5 * (dx - 1j * dy)


def wirtinger(f, z0, h, conj=False, richardson=True):
    """d/dz (or d/dzbar when conj=True) of f at z0."""
    if h <= 0:
        raise FDStepDegenerate(f"step {h} must be positive")
    d1 = _first(f, z0, h, conj)
    if not richardson:
        return d1, 0.0
    d2 = _first(f, z0, h / 2.0, conj)
    return (4.0 * d2 - d1) / 3.0, abs(d2 - d1) / 3.0


def mixed_second(f, z0, w0, h, richardson=True, cache=None):
    """d/dz0 dbar/dw0 of f(z0, w0) (z0 and w0 may address the same variable
    through the caller's closure). `cache` deduplicates f evaluations across
    entries; keys are exact complex pairs."""
    if h <= 0:
        raise FDStepDegenerate(f"step {h} must be positive")
    if cache is None:
        cache = {}

    def fc(a, b):
        key = (complex(a), complex(b))
        if key not in cache:
            cache[key] = f(a, b)
        return cache[key]

    def dbar_w(a, hh):
        dx = (fc(a, w0 + hh) - fc(a, w0 - hh)) / (2.0 * hh)
        dy = (fc(a, w0 + 1j * hh) - fc(a, w0 - 1j * hh)) / (2.0 * hh)
        return 0.5 * (dx + 1j * dy)

    def d_z(hh):
        dx = (dbar_w(z0 + hh, hh) - dbar_w(z0 - hh, hh)) / (2.0 * hh)
        dy = (dbar_w(z0 + 1j * hh, hh) - dbar_w(z0 - 1j * hh, hh)) / (2.0 * hh)
        return 0.5 * (dx - 1j * dy)

    d1 = d_z(h)
    if not richardson:
        return d1, 0.0
    d2 = d_z(h / 2.0)
    return (4.0 * d2 - d1) / 3.0, abs(d2 - d1) / 3.0
