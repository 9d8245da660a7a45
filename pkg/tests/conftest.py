import sys
from pathlib import Path

import pytest

from flatlab.cache import DerivativeCache
from flatlab.census import census
from flatlab.flatfun import ExpPolyFlatFunction

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def f_exp():
    return ExpPolyFlatFunction.exp_neg_inv()


@pytest.fixture(scope="session")
def rows30():
    return census(ExpPolyFlatFunction.exp_neg_inv(), 30, DerivativeCache())
