from __future__ import annotations

import pytest
from mpmath import mp

from lattice_ortho.families import make_family


@pytest.fixture(autouse=True)
def working_precision():
    saved = mp.prec
    mp.prec = 256
    yield 256
    mp.prec = saved


def preset(name, **args):
    return make_family(name, args).derived


@pytest.fixture
def charlier1():
    return preset("charlier", a=1)


@pytest.fixture
def hahn002():
    return preset("hahn", alpha=0, beta=0, N=2)
