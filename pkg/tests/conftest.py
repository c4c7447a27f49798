import math
from functools import lru_cache

import pytest

from tempus.boxsys import EnergyBasis, SystemConfig
from tempus.spectra import diagonalize
from tempus.timeops import AlphaSequence, ArrivalTime, Characteristic, OperatorSpec, build_matrix

HALF_PI = math.pi / 2


def arrival(s, gamma=HALF_PI):
    return OperatorSpec(ArrivalTime(float(s)), gamma)


def characteristic(rule="zero", gamma=math.pi / 4):
    return OperatorSpec(Characteristic(AlphaSequence.parse(rule)), gamma)


@lru_cache(maxsize=None)
def matrix_for(spec, cutoff):
    return build_matrix(spec, EnergyBasis(SystemConfig(gamma=spec.gamma), cutoff))


@lru_cache(maxsize=None)
def spectrum_for(spec, cutoff):
    return diagonalize(matrix_for(spec, cutoff))


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
