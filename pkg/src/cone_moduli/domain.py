"""Core value types: cone-angle vectors, normalized puncture configurations,
quadratic differentials, Beltrami representatives, and Hermitian Gram matrices.

All invariants are enforced at construction; instances are immutable and safe
to share across workers. Evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cone_moduli import _speed
from cone_moduli.errors import (
    AngleOutOfRange,
    EvalAtPole,
    GaussBonnetViolated,
    PunctureTooClose,
    QuadDiffConstraintViolated,
)

ANGLE_SUM_TOL = 1e-12
MONODROMY_TOL = 1e-10
RESIDUE_SUM_TOL = 1e-12
DEFAULT_EPS_MIN = 1e-3


@dataclass(frozen=True)
class AngleVector:
    """Cone-angle parameters alpha_0..alpha_{n-1} with sum exactly 2.

    The last angle sits at the puncture at infinity. `monodromy` holds the
    unit complex numbers exp(2 pi i alpha_k).
    """

    alphas: tuple[float, ...]
    monodromy: tuple[complex, ...] = field(init=False)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if len(alphas) < 4:
            raise AngleOutOfRange(f"need at least 4 angles, got {len(alphas)}")
        for i, a in enumerate(alphas):
            if not (0.0 < a < 1.0):
                raise AngleOutOfRange(f"alpha_{i} = {a} outside (0, 1)")
        if abs(math.fsum(alphas) - 2.0) > ANGLE_SUM_TOL:
            raise GaussBonnetViolated(
                f"sum(alpha) = {math.fsum(alphas)!r}, must equal 2 within {ANGLE_SUM_TOL}")
        mono = tuple(complex(np.exp(2j * np.pi * a)) for a in alphas)
        prod = complex(np.prod(mono))
        if abs(prod - 1.0) > MONODROMY_TOL:
            raise GaussBonnetViolated(
                f"monodromy product {prod!r} deviates from 1 beyond {MONODROMY_TOL}")
        object.__setattr__(self, "monodromy", mono)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def finite(self) -> tuple[float, ...]:
        """Angles at the finite punctures (all but the last)."""
        return self.alphas[:-1]


def make_angle_vector(values) -> AngleVector:
    """Validate and build an AngleVector from a sequence of reals."""
    return AngleVector(tuple(values))


@dataclass(frozen=True)
class ModuliPoint:
    """Normalized puncture configuration: u_0 = 0, u_1 = 1, u_{n-1} = infinity.

    `free_coords` are (u_2, ..., u_{n-2}); infinity is symbolic and never a
    floating value. `eps_min` is the smallest allowed pairwise distance.
    """

    free_coords: tuple[complex, ...]
    eps_min: float = DEFAULT_EPS_MIN

    def __post_init__(self):
        free = tuple(complex(u) for u in self.free_coords)
        object.__setattr__(self, "free_coords", free)
        pts = self.finite_punctures
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = abs(pts[i] - pts[j])
                if d < self.eps_min:
                    raise PunctureTooClose(
                        f"punctures {pts[i]} and {pts[j]} at distance {d} < {self.eps_min}")

    @classmethod
    def from_punctures(cls, punctures, eps_min: float = DEFAULT_EPS_MIN) -> "ModuliPoint":
        pts = tuple(complex(u) for u in punctures)
        if len(pts) < 3:
            raise PunctureTooClose("need at least 3 finite punctures (n >= 4)")
        if pts[0] != 0 or pts[1] != 1:
            raise ValueError(f"normalization requires u_0 = 0 and u_1 = 1, got {pts[:2]}")
        return cls(pts[2:], eps_min=eps_min)

    @property
    def finite_punctures(self) -> tuple[complex, ...]:
        return (0j, 1 + 0j) + self.free_coords

    @property
    def n(self) -> int:
        """Total number of punctures including infinity."""
        return len(self.free_coords) + 3

    @property
    def min_separation(self) -> float:
        pts = self.finite_punctures
        return min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])

    @property
    def max_abs(self) -> float:
        return max(abs(u) for u in self.finite_punctures)

    def nearest_puncture_distance(self, z: complex) -> float:
        return min(abs(z - u) for u in self.finite_punctures)

    def guard_not_pole(self, z: complex) -> None:
        d = self.nearest_puncture_distance(z)
        if d < self.eps_min / 10.0:
            raise EvalAtPole(f"z = {z} within {d} of a puncture (< eps_min/10)")

    def replace_free(self, index: int, value: complex) -> "ModuliPoint":
        """New point with free coordinate `index` (0-based within free_coords) replaced."""
        coords = list(self.free_coords)
        coords[index] = complex(value)
        return ModuliPoint(tuple(coords), eps_min=self.eps_min)


@dataclass(frozen=True)
class QuadDiff:
    """Integrable holomorphic quadratic differential sum_k rho_k/(z - u_k) dz^2.

    Residues must satisfy sum rho_k = 0 and sum rho_k u_k = 0, which force
    O(|z|^-3) decay and integrability at infinity.
    """

    residues: tuple[complex, ...]
    basepoint: ModuliPoint

    def __post_init__(self):
        res = tuple(complex(r) for r in self.residues)
        object.__setattr__(self, "residues", res)
        pts = self.basepoint.finite_punctures
        if len(res) != len(pts):
            raise QuadDiffConstraintViolated(
                f"{len(res)} residues for {len(pts)} finite punctures")
        s0 = sum(res)
        s1 = sum(r * u for r, u in zip(res, pts))
        scale = 1.0 + max((abs(r) for r in res), default=0.0) * (1.0 + self.basepoint.max_abs)
        if abs(s0) > RESIDUE_SUM_TOL * scale:
            raise QuadDiffConstraintViolated(f"sum(rho) = {s0!r} != 0")
        if abs(s1) > RESIDUE_SUM_TOL * scale:
            raise QuadDiffConstraintViolated(f"sum(rho * u) = {s1!r} != 0")

    @property
    def is_zero(self) -> bool:
        return all(r == 0 for r in self.residues)

    def __call__(self, z):
        """Evaluate sum_k rho_k/(z - u_k); z may be a scalar or ndarray.

        Uses the constraint-aware far form (cancellation-free at large |z|)."""
        if np.isscalar(z) or np.asarray(z).ndim == 0:
            self.basepoint.guard_not_pole(complex(z))
            return complex(_speed.rational_sum_constrained(
                np.asarray([z], dtype=complex),
                np.asarray(self.basepoint.finite_punctures),
                np.asarray(self.residues))[0])
        return _speed.rational_sum_constrained(
            np.asarray(z, dtype=complex),
            np.asarray(self.basepoint.finite_punctures),
            np.asarray(self.residues))


def quad_diff_eval(q: QuadDiff, z) -> complex:
    """Pointwise value of the quadratic differential's coefficient function."""
    return q(z)


class BeltramiRep:
    """A tangent-vector representative: either a smooth compactly supported
    Beltrami coefficient, or the harmonic representative
    a(z) = conj(psi(z)) * prod_k |z - u_k|^(2 alpha_k) * vol
    attached to a quadratic differential psi.
    """

    SMOOTH_COMPACT = "smooth_compact"
    HARMONIC = "harmonic"

    def __init__(self, variant, *, func=None, support_radius=None, sup_norm=None,
                 psi=None, angles=None, point=None, vol=None):
        self.variant = variant
        if variant == self.SMOOTH_COMPACT:
            if func is None or support_radius is None:
                raise ValueError("smooth_compact needs func and support_radius")
            self.func = func
            self.support_radius = float(support_radius)
            self.sup_norm = None if sup_norm is None else float(sup_norm)
        elif variant == self.HARMONIC:
            if psi is None or angles is None or point is None or vol is None:
                raise ValueError("harmonic needs psi, angles, point, vol")
            if psi.basepoint.finite_punctures != point.finite_punctures:
                raise ValueError("psi basepoint does not match the configuration")
            if len(angles.alphas) != point.n:
                raise ValueError("angle count does not match puncture count")
            self.psi = psi
            self.angles = angles
            self.point = point
            self.vol = float(vol)
        else:
            raise ValueError(f"unknown variant {variant!r}")

    @classmethod
    def smooth_compact(cls, func, support_radius, sup_norm=None) -> "BeltramiRep":
        return cls(cls.SMOOTH_COMPACT, func=func, support_radius=support_radius,
                   sup_norm=sup_norm)

    @classmethod
    def harmonic(cls, psi: QuadDiff, angles: AngleVector, point: ModuliPoint,
                 vol: float) -> "BeltramiRep":
        return cls(cls.HARMONIC, psi=psi, angles=angles, point=point, vol=vol)

    def __call__(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.asarray([z] if scalar else z, dtype=complex)
        if self.variant == self.SMOOTH_COMPACT:
            try:
                vals = np.asarray(self.func(zz), dtype=complex)
                if vals.shape != zz.shape:
                    raise TypeError
            except TypeError:
                vals = np.asarray([complex(self.func(w)) for w in zz.ravel()],
                                  dtype=complex).reshape(zz.shape)
            vals = np.where(np.abs(zz) <= self.support_radius, vals, 0j)
        else:
            if scalar:
                self.point.guard_not_pole(complex(z))
            centers = np.asarray(self.point.finite_punctures)
            powers = 2.0 * np.asarray(self.angles.finite)
            env = _speed.prod_abs_pow(zz, centers, powers)
            psi_vals = _speed.rational_sum_constrained(
                zz, centers, np.asarray(self.psi.residues))
            vals = np.conj(psi_vals) * env * self.vol
        return complex(vals[0]) if scalar else vals


def beltrami_eval(b: BeltramiRep, z) -> complex:
    return b(z)


def smooth_bump(center=0j, radius=1.0, amplitude=1.0 + 0j):
    """Standard C^infinity mollifier bump: amplitude * exp(1 - 1/(1 - |w|^2))
    with w = (z - center)/radius, zero outside the support disk."""
    center = complex(center)
    radius = float(radius)

    def f(z):
        z = np.asarray(z, dtype=complex)
        t = np.abs(z - center) / radius
        out = np.zeros(z.shape, dtype=complex)
        inside = t < 1.0
        ti = t[inside]
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - ti * ti))
        return out

    return f


class HermitianGram:
    """(n-3) x (n-3) Hermitian positive-definite Gram matrix with per-entry
    quadrature error bounds."""

    def __init__(self, entries, error_estimate=None, label=""):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {entries.shape}")
        self.dim = entries.shape[0]
        self.entries = entries
        if error_estimate is None:
            error_estimate = np.zeros(entries.shape, dtype=float)
        self.error_estimate = np.asarray(error_estimate, dtype=float)
        self.label = label
        herm_dev = np.abs(entries - entries.conj().T)
        herm_tol = 10.0 * (self.error_estimate + self.error_estimate.T) \
            + 1e-12 * np.max(np.abs(entries))
        if np.any(herm_dev > herm_tol):
            raise ValueError(
                f"{label or 'Gram'} not Hermitian within 10x error bounds: "
                f"max deviation {herm_dev.max():.3e}, allowance {herm_tol.max():.3e}")
        eigs = np.linalg.eigvalsh(0.5 * (entries + entries.conj().T))
        if np.any(eigs <= 0):
            raise ValueError(f"{label or 'Gram'} not positive definite: eigenvalues {eigs}")
        self.eigenvalues = eigs

    def __repr__(self):
        return f"HermitianGram(dim={self.dim}, label={self.label!r})"
