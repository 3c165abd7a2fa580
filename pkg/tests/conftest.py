import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from markovtoric import ModelSpec

DATA = Path(__file__).parent / "data"


def make_illness_death(homogeneous=False):
    """Three-state progressive model: 0 healthy, 1 ill, 2 dead.

    Recovery (1 -> 0) is forbidden, state 2 is absorbing, and the chain
    starts in 0 or 1.  Horizon 4 gives 14 admissible paths.
    """
    return ModelSpec(["0", "1", "2"], 1, 4, forbidden=[("1", "0")],
                     absorbing=["2"], initial=["0", "1"],
                     homogeneous=homogeneous)


def make_reversible_illness_death(homogeneous=False):
    """Like make_illness_death but recovery is allowed."""
    return ModelSpec(["0", "1", "2"], 1, 4, absorbing=["2"],
                     initial=["0", "1"], homogeneous=homogeneous)


def make_binary_chain(k, n, homogeneous=False):
    """Unrestricted two-state chain."""
    return ModelSpec(["0", "1"], k, n, homogeneous=homogeneous)


def make_survival(n=3):
    """Two states, 1 absorbing, no return, start in 0."""
    return ModelSpec(["0", "1"], 1, n, forbidden=[("1", "0")],
                     absorbing=["1"], initial=["0"])


def make_vc_chain(n, homogeneous=True):
    """Second-order vowel/consonant chain with absorbing pad state."""
    initial = [[a, b] for a in "VC" for b in "VC"]
    return ModelSpec(["V", "C", "_"], 2, n, absorbing=["_"],
                     initial=initial, homogeneous=homogeneous)


@pytest.fixture
def illness_death():
    return make_illness_death()


@pytest.fixture
def illness_death_hom():
    return make_illness_death(homogeneous=True)


@pytest.fixture
def reversible_illness_death():
    return make_reversible_illness_death()


@pytest.fixture
def survival():
    return make_survival()


@pytest.fixture
def data_dir():
    return DATA
