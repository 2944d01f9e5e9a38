import numpy as np
import pytest

from dsproto import Frame, make_bpa


@pytest.fixture
def abc():
    return Frame(("A", "B", "C"))


@pytest.fixture
def ab():
    return Frame(("A", "B"))


def bpa_from_dict(frame, mass_dict, id=None):
    return make_bpa(frame, [(sorted(fs), m) for fs, m in mass_dict.items()], id=id)


def random_bpa(rng, frame, id=None, max_focals=4):
    from oracles import random_mass_dict

    return bpa_from_dict(frame, random_mass_dict(rng, frame.labels, max_focals), id=id)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
