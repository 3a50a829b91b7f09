import numpy as np
import pytest

from cone_moduli.domain import ModuliPoint, make_angle_vector
from cone_moduli.quadrature import QuadratureSpec


@pytest.fixture(scope="session")
def fast_spec():
    """Reduced resolution for unit tests (~1e-7 accuracy)."""
    return QuadratureSpec(radial_order=16, angular_nodes=32,
                          refinement_depth=5, target_rel_tol=1e-8)


@pytest.fixture(scope="session")
def default_spec():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def sym4():
    """The all-half n = 4 configuration at u2 = 2."""
    return make_angle_vector([0.5, 0.5, 0.5, 0.5]), ModuliPoint.from_punctures([0, 1, 2])


@pytest.fixture(scope="session")
def asym5():
    return (make_angle_vector([0.3, 0.4, 0.5, 0.35, 0.45]),
            ModuliPoint.from_punctures([0, 1, 2 + 1j, -1]))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
