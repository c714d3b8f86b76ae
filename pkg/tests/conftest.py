"""Shared fixtures: the builtin instances, their constants and reference solutions."""

from pathlib import Path

import numpy as np
import pytest

from gimvip.certify import reference_solution
from gimvip.model import builtin_affine5, builtin_example1, load_problem_file
from gimvip.regimes import exact_constants_affine

PROBLEMS_DIR = Path(__file__).resolve().parent.parent / "problems"

# the gains used by the reference numerical experiment
FIXED_GAINS = dict(a1=0.9, a2=0.5, a3=1e-4, k1=0.4, k2=1.5, Gd=1.0, Td=1.0)


@pytest.fixture(scope="session")
def example1():
    return builtin_example1()


@pytest.fixture(scope="session")
def affine5():
    return builtin_affine5(seed=0)


@pytest.fixture(scope="session")
def l1_box3():
    return load_problem_file(PROBLEMS_DIR / "l1_box3.json")


@pytest.fixture(scope="session")
def example1_constants(example1):
    return exact_constants_affine(example1)


@pytest.fixture(scope="session")
def affine5_constants(affine5):
    return exact_constants_affine(affine5)


@pytest.fixture(scope="session")
def example1_wbar(example1, example1_constants):
    return reference_solution(example1, example1_constants)


@pytest.fixture(scope="session")
def affine5_wbar(affine5, affine5_constants):
    return reference_solution(affine5, affine5_constants)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
