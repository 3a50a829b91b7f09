"""Flat cone sphere moduli metrics: singular quadrature, operator toolkit,
and the complex-hyperbolic vs Weil-Petersson Gram verifier."""

__version__ = "0.1.0"

from cone_moduli import _speed

__all__ = ["_speed", "__version__"]
