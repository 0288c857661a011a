"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math

import pytest

from plaplab import EnergySpec, Family, Nonlinearity, PrincipalPart, build_mesh
from plaplab.energy import linear_hook, rational_hook


NONRES_CONFIG = """\
# rational family, lambda between lambda_2 and lambda_3
problem.p = 2
problem.kappa = 0
nonlinearity.family = rational
nonlinearity.lambda = 50
nonlinearity.mu = -45
mesh.n = 63
solver.starts = 16
"""

LINEAR_CONFIG = """\
problem.p = 2
nonlinearity.family = linear
nonlinearity.lambda = 5
mesh.n = 31
solver.starts = 4
"""


def rational_spec(lambda_, mu, p=2.0, kappa=0.0, length=1.0):
    return EnergySpec(
        PrincipalPart(p, kappa),
        Nonlinearity(Family.CUSTOM, lambda_, mu, hook=rational_hook(lambda_, mu)),
        length,
    )


def power_spec(family, p, kappa, lambda_, mu, q, length=1.0):
    return EnergySpec(
        PrincipalPart(p, kappa), Nonlinearity(family, lambda_, mu, q, p), length
    )


@pytest.fixture
def mesh():
    return build_mesh(1.0, 31)


@pytest.fixture
def spec_nonres():
    return rational_spec(50.0, -45.0)


@pytest.fixture
def spec_linear():
    return EnergySpec(
        PrincipalPart(2.0), Nonlinearity(Family.CUSTOM, 5.0, hook=linear_hook(5.0))
    )


@pytest.fixture
def spec_resonant():
    return rational_spec(math.pi**2, 35.0)


@pytest.fixture
def config_file(tmpdir):
    p = tmpdir.join("nonres.cfg")
    p.write(NONRES_CONFIG)

    return str(p)


@pytest.fixture
def linear_config_file(tmpdir):
    p = tmpdir.join("linear.cfg")
    p.write(LINEAR_CONFIG)

    return str(p)
