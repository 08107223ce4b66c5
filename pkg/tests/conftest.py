import math

import numpy as np
import pytest

from invisfractal import (
    ConstantFraction,
    ThinLimit,
    build_body3,
    build_rhombus,
    build_thin_orthogonal,
    generate_sequences,
)
from invisfractal.scene import scene_from_body2d, scene_from_body3d

DIR60 = (math.sin(math.radians(60.0)), math.cos(math.radians(60.0)))


@pytest.fixture(scope="session")
def thin8():
    return build_thin_orthogonal(8)


@pytest.fixture(scope="session")
def thin8_scene(thin8):
    return scene_from_body2d(thin8)


@pytest.fixture(scope="session")
def rhombus60():
    return build_rhombus(1.0, 0.4, ConstantFraction(0.5), 8, (0.0, 1.0), DIR60)


@pytest.fixture(scope="session")
def rhombus60_scene(rhombus60):
    return scene_from_body2d(rhombus60)


@pytest.fixture(scope="session")
def ortho_solid():
    return build_rhombus(1.0, 0.4, ConstantFraction(0.5), 8)


@pytest.fixture(scope="session")
def ortho_solid_scene(ortho_solid):
    return scene_from_body2d(ortho_solid)


@pytest.fixture(scope="session")
def ortho_thin_rhombus():
    return build_rhombus(1.0, 0.5, ThinLimit(), 8)


@pytest.fixture(scope="session")
def body3():
    seq = generate_sequences(1.0, 0.5, ConstantFraction(0.5), 6)
    return build_body3(1.0, 0.5, seq, 6)


@pytest.fixture(scope="session")
def body3_scene(body3):
    return scene_from_body3d(body3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
