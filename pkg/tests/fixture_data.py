# -*- coding: utf-8 -*-

import pytest
import phaserng as phr
import numpy as np
from copy import deepcopy
from phaserng.config import *
import pandas as pd

# For more info on parametrized fixtures, look here:
# https://www.youtube.com/watch?v=aQH7hyJn-No

adc_type = [(1, 15.0), (3, 15.0), (8, 15.0), (12, 4.0)]

# ============================================
# Noise model
# ============================================


@pytest.fixture
def table1_params():  # type: ignore
    return deepcopy(REFERENCE_PARAMS)


@pytest.fixture
def noiseless_sweep(table1_params):  # type: ignore
    powers = np.linspace(0.1, 2.0, 20)
    sweep = phr.synthetic_sweep(table1_params, powers, noise_sd=0.0)
    return sweep, table1_params


@pytest.fixture
def noisy_sweep(table1_params):  # type: ignore
    powers = np.linspace(0.1, 2.0, 50)
    sweep = phr.synthetic_sweep(table1_params, powers, noise_sd=0.5, seed=3)
    return sweep, table1_params


# ============================================
# Source
# ============================================


@pytest.fixture(params=adc_type)
def any_adc(request):  # type: ignore
    bits, range_a = request.param
    return phr.AdcConfig(bits=bits, range_a=range_a)


@pytest.fixture(scope="module")
def operating_point_stream():  # type: ignore
    # 2e5 samples at the optimal power of the reference model
    params = deepcopy(REFERENCE_PARAMS)
    power, _ = phr.optimal_power(params)
    cfg = phr.SimConfig(
        params=params,
        power=power,
        n_samples=200_000,
        quantum_seed=11,
        classical_seed=12,
        block_size=50_000,
    )
    return phr.simulate_raw(cfg), params, power


# ============================================
# Bits
# ============================================


@pytest.fixture
def random_bits():  # type: ignore
    rng = np.random.default_rng(42)
    return rng.integers(0, 2, size=100_000, dtype=np.uint8)


@pytest.fixture
def toeplitz_params():  # type: ignore
    # Sizes of the reference configuration: 4096 bits in, 3230 out.
    return phr.output_length(4096, 6.7 / 8, 2.0**-100)


@pytest.fixture
def tiny_trevisan():  # type: ignore
    # n=16 input bits, m=2 outputs, GF(4) design with disjoint sets.
    params = phr.ExtractorParams(
        n=16, k=8, m=2, epsilon=0.5, d=16, algorithm="trevisan", w=2, t=4
    )
    design = phr.weak_design(params.m, params.t)
    return params, design
