import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from rcmlab.kernels import (AdjacencyKernel, KernelError, ball_volume, eval_adjacency,
                            kernel_normalization, unit_ball_radius)


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
def test_disk_has_unit_volume(d):
    R = unit_ball_radius(d)
    assert ball_volume(d, R) == pytest.approx(1.0, rel=1e-12)
    # closed form pi^{-1/2} Gamma(d/2 + 1)^{1/d}
    assert R == pytest.approx(special.gamma(d / 2 + 1) ** (1 / d) / math.sqrt(math.pi), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("variant", ["disk", "gaussian"])
def test_normalization(d, variant):
    k = AdjacencyKernel.from_config(d, {"variant": variant})
    assert kernel_normalization(k) == pytest.approx(1.0, abs=1e-6)


def test_gaussian_peak_value():
    k = AdjacencyKernel.gaussian(2)
    assert k.peak == pytest.approx(1 / (2 * math.pi), rel=1e-12)


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_kernel_is_even_and_bounded(x):
    for k in (AdjacencyKernel.gaussian(2), AdjacencyKernel.disk(2)):
        v = eval_adjacency(k, np.array(x))
        w = eval_adjacency(k, -np.array(x))
        assert v == w
        assert 0 <= v <= 1


def test_config_round_trip():
    k = AdjacencyKernel.gaussian(3, scales=[1.0, 1.5, 0.5])
    k2 = AdjacencyKernel.from_config(3, k.to_config())
    assert k2.to_config() == k.to_config()
    assert np.allclose(k.second_moments(), [1.0, 2.25, 0.25])


def test_unknown_variant():
    with pytest.raises(KernelError, match="unknown kernel variant"):
        AdjacencyKernel.from_config(2, {"variant": "square"})


def test_gaussian_fourier_transform():
    k = AdjacencyKernel.gaussian(2)
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    assert np.allclose(k.fourier(q), np.exp(-0.5 * np.sum(q * q, axis=-1)))
