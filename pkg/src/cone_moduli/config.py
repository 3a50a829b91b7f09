"""Experiment configuration: YAML in, validated ExperimentConfig out."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from cone_moduli.domain import AngleVector, ModuliPoint, make_angle_vector
from cone_moduli.errors import ConeModuliError, ConfigInvalid
from cone_moduli.quadrature import QuadratureSpec

DEFAULT_TOLERANCES = {
    "theorem_rel_tol": 1e-3,
    "route_agreement_tol": 1e-4,
    "d_constancy_tol": 1e-3,
    "curvature_rel_tol": 1e-2,
    "pairing_tol": 1e-6,
}

DEFAULT_CHECKS = {
    "theorem": True,
    "operators": True,
    "d_constancy": True,
    "curvature_probe": False,
    "asymptotics": False,
}


@dataclass(frozen=True)
class Sweep:
    seed: int
    count: int
    box: tuple[float, float, float, float]  # re_min, re_max, im_min, im_max
    min_separation: float = 0.05


@dataclass
class ExperimentConfig:
    angle_sets: list[AngleVector]
    explicit_points: list[tuple[complex, ...]]  # free coordinates
    sweeps: list[Sweep]
    quadrature: QuadratureSpec
    tolerances: dict
    checks: dict
    seed: int = 0
    deterministic: bool = True
    threads: int = 1
    raw: dict = field(default_factory=dict)

    def validate(self):
        if not self.angle_sets:
            raise ConfigInvalid("no angle sets given")
        for name in self.checks:
            if name not in DEFAULT_CHECKS:
                raise ConfigInvalid(f"unknown check {name!r}")
        for name, on in self.checks.items():
            if on and _tolerance_key(name) not in self.tolerances:
                raise ConfigInvalid(f"check {name!r} enabled without its tolerance")
        dims = {a.n - 3 for a in self.angle_sets}
        for pt in self.explicit_points:
            if len(pt) not in dims:
                raise ConfigInvalid(
                    f"explicit point {pt} matches no angle set (free dims {dims})")


def _tolerance_key(check: str) -> str:
    return {
        "theorem": "theorem_rel_tol",
        "operators": "pairing_tol",
        "d_constancy": "d_constancy_tol",
        "curvature_probe": "curvature_rel_tol",
        "asymptotics": "theorem_rel_tol",  # asymptotics tolerances are fixed; key
                                           # only needs to exist
    }[check]


def _as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    raise ConfigInvalid(f"cannot parse complex number from {v!r}")


def config_from_dict(data: dict) -> ExperimentConfig:
    try:
        angle_sets = [make_angle_vector(a) for a in data.get("angles", [])]
    except ConeModuliError as exc:
        raise ConfigInvalid(f"bad angle set: {exc}") from exc

    pts_block = data.get("points", {}) or {}
    explicit = []
    for entry in pts_block.get("explicit", []) or []:
        coords = entry if isinstance(entry, (list, tuple)) else [entry]
        explicit.append(tuple(_as_complex(c) for c in coords))
    sweeps = []
    for s in pts_block.get("sweeps", []) or []:
        try:
            box = tuple(float(x) for x in s["box"])
            if len(box) != 4:
                raise KeyError("box")
            sweeps.append(Sweep(seed=int(s["seed"]), count=int(s["count"]),
                                box=box,
                                min_separation=float(s.get("min_separation", 0.05))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad sweep entry {s!r}: {exc}") from exc

    try:
        quad = QuadratureSpec(**(data.get("quadrature", {}) or {}))
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad quadrature spec: {exc}") from exc

    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(data.get("tolerances", {}) or {})
    checks = dict(DEFAULT_CHECKS)
    checks.update(data.get("checks", {}) or {})

    cfg = ExperimentConfig(
        angle_sets=angle_sets,
        explicit_points=explicit,
        sweeps=sweeps,
        quadrature=quad,
        tolerances=tolerances,
        checks=checks,
        seed=int(data.get("seed", 0)),
        deterministic=bool(data.get("deterministic", True)),
        threads=int(data.get("threads", 1)),
        raw=data,
    )
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigInvalid("config root must be a mapping")
    return config_from_dict(data)


def sample_sweep_points(sweep: Sweep, n_free: int, eps_min: float = None):
    """Uniform box sampling, re-drawn until the separation constraint holds.
    Returns (points, rejection_count)."""
    rng = np.random.default_rng(sweep.seed)
    eps = sweep.min_separation if eps_min is None else eps_min
    points, rejected = [], 0
    re0, re1, im0, im1 = sweep.box
    for _ in range(sweep.count):
        for _try in range(1000):
            coords = tuple(complex(rng.uniform(re0, re1), rng.uniform(im0, im1))
                           for _ in range(n_free))
            try:
                points.append(ModuliPoint(coords, eps_min=eps))
                break
            except ConeModuliError:
                rejected += 1
        else:
            raise ConfigInvalid(
                f"sweep could not draw a point with separation {eps} in 1000 tries")
    return points, rejected
