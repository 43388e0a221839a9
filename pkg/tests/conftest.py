import math

import pytest

from psi_approx import PsiSpec


# psi(t) = 2^(-sqrt(t)): eta(t) = (1 + sqrt(t))^2, eta(25) = 36, eta(36) = 49
@pytest.fixture(scope='module')
def flagship():
    return PsiSpec.exponential(math.log(2), 0.5)


# psi(t) = 2^(-t/4): eta(t) - t = 4, mu(t) = t/4
@pytest.fixture(scope='module')
def linear():
    return PsiSpec.exponential(math.log(2) / 4, 1.0)
