import numpy as np
import pytest

from levysobolev import symbols as S


@pytest.fixture(scope="session")
def brownian():
    return S.make_symbol(S.BrownianParams(sigma=1.0, b=0.0))


@pytest.fixture(scope="session")
def cauchy():
    return S.make_symbol(S.CauchyParams(c=1.0, gamma=0.0))


@pytest.fixture(scope="session")
def nig_sym():
    return S.make_symbol(S.NIGParams(alpha=10.0, beta=0.0, delta=1.0, mu=0.0))


@pytest.fixture(scope="session")
def nig_skew():
    return S.make_symbol(S.NIGParams(alpha=10.0, beta=3.0, delta=1.0, mu=0.0))


@pytest.fixture(scope="session")
def student_t():
    return S.make_symbol(S.StudentTParams(f=4.0))


@pytest.fixture(scope="session")
def cgmy15():
    return S.make_symbol(S.CGMYParams(1.0, 5.0, 5.0, 1.5))


@pytest.fixture(scope="session")
def vg_sym():
    return S.make_symbol(S.CGMYParams(1.0, 5.0, 5.0, 0.0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2024)
