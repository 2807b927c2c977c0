import numpy as np
import pytest

from lieherm.catalog_io import builtin, to_algebra, to_cd
from lieherm.lie_structure import build_unitary_frame, extract_structure_constants, realify


def real_form(name):
    doc = builtin(name)
    return to_algebra(doc) if doc.mode == "real" else realify(to_cd(doc), name)


def catalog_cd(name):
    doc = builtin(name)
    if doc.mode == "complex":
        return to_cd(doc)
    alg = to_algebra(doc)
    return extract_structure_constants(alg, build_unitary_frame(alg))


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def kt():
    return to_algebra(builtin("kodaira_thurston"))


@pytest.fixture
def kt_cd(kt):
    return extract_structure_constants(kt, build_unitary_frame(kt))


@pytest.fixture
def heis_cd():
    return to_cd(builtin("complex_heisenberg"))
