import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcmlab.geometry import BoxDomain
from rcmlab.kernels import AdjacencyKernel, eval_adjacency
from rcmlab.model import (EstimateRecord, NoTransitionError, build_graph, csv_header,
                          estimate_lambda_c, pair_uniforms, palm_two_point, sample_poisson,
                          susceptibility)

DISK = AdjacencyKernel.disk(2)
GAUSS = AdjacencyKernel.gaussian(2)


@given(st.integers(0, 2**40), st.integers(0, 2**40), st.integers(0, 2**63))
def test_pair_coins_are_symmetric(i, j, seed):
    assert pair_uniforms(i, j, seed) == pair_uniforms(j, i, seed)
    assert 0 <= pair_uniforms(i, j, seed) < 1


def test_pair_coins_look_uniform():
    u = pair_uniforms(np.arange(20000), np.arange(20000) + 7, 11)
    assert abs(u.mean() - 0.5) < 0.01
    assert abs(np.mean(u < 0.1) - 0.1) < 0.01


def test_poisson_count_and_errors():
    dom = BoxDomain(2, 10.0)
    counts = [len(sample_poisson(dom, 2.0, np.random.default_rng(s))) for s in range(200)]
    assert np.mean(counts) == pytest.approx(200, rel=0.02)
    with pytest.raises(ValueError, match="box too large"):
        sample_poisson(BoxDomain(3, 1e4), 1.0, 0)
    with pytest.raises(ValueError):
        sample_poisson(dom, -1.0, 0)


def test_disk_graph_edges_are_exactly_the_close_pairs():
    dom = BoxDomain(2, 6.0)
    pts = sample_poisson(dom, 3.0, np.random.default_rng(5))
    g = build_graph(pts, np.empty((0, 2)), DISK, dom, edge_seed=1)
    diff = dom.minimal_image(pts[:, None, :] - pts[None, :, :])
    close = np.linalg.norm(diff, axis=-1) < DISK.radius
    np.fill_diagonal(close, False)
    assert len(g.edges) == np.count_nonzero(np.triu(close))


def test_box_must_hold_the_kernel():
    with pytest.raises(ValueError, match="exceed twice"):
        BoxDomain(2, 10.0).check_kernel(GAUSS)


def test_lambda_zero_disk_is_exact_indicator():
    dom = BoxDomain(2, 6.0)
    for x in ([0.3, 0.0], [0.5, 0.2], [1.0, 0.0]):
        rec = palm_two_point(DISK, 0.0, x, 50, dom, seed=3)
        assert rec.value == float(eval_adjacency(DISK, np.array(x)))
        assert rec.stderr == 0.0


def test_origin_is_always_connected():
    rec = palm_two_point(DISK, 1.0, [0.0, 0.0], 10, BoxDomain(2, 6.0), seed=0)
    assert rec.value == 1.0 and rec.stderr == 0.0


def test_displacement_must_fit_torus():
    with pytest.raises(ValueError, match="torus radius"):
        palm_two_point(DISK, 1.0, [3.5, 0.0], 10, BoxDomain(2, 6.0), seed=0)


@pytest.mark.parametrize("threads", [2, 8])
def test_threads_do_not_change_estimates(threads):
    dom = BoxDomain(2, 6.0)
    a = palm_two_point(DISK, 1.5, [1.0, 0.0], 600, dom, seed=4, threads=1)
    b = palm_two_point(DISK, 1.5, [1.0, 0.0], 600, dom, seed=4, threads=threads)
    assert a == b


def test_coupled_estimates_are_monotone_in_lambda():
    dom = BoxDomain(2, 6.0)
    vals = [palm_two_point(DISK, lam, [1.5, 0.0], 300, dom, seed=9,
                           coupling_lambda=3.0).value for lam in (0.5, 1.0, 2.0, 3.0)]
    assert vals == sorted(vals)


def test_susceptibility_at_zero_intensity():
    rec = susceptibility(DISK, 0.0, BoxDomain(2, 6.0), 20, seed=0)
    assert rec.value == 1.0 and rec.quantity == "chi"


def test_record_validation_and_csv():
    with pytest.raises(ValueError):
        EstimateRecord("tau", 0.1, 0.5, -1.0, 10)
    rec = EstimateRecord("tau", 0.5, 0.25, 0.01, 100, (1.0,), "abc")
    assert csv_header(2) == ["quantity", "lambda", "x1", "x2", "value", "stderr", "n",
                             "config_digest"]
    assert rec.csv_row(2)[:4] == ["tau", "0.5", "1.0", "0.0"]


def test_lambda_c_rejects_range_without_transition():
    with pytest.raises(NoTransitionError, match="no transition"):
        estimate_lambda_c(DISK, (4.0, 6.0), lam_range=(0.2, 0.4), n_samples=4, seed=1)


@pytest.mark.slow
def test_lambda_c_disk_bracket():
    res = estimate_lambda_c(DISK, (8.0, 16.0), lam_range=(3.0, 7.0), tolerance=0.25,
                            n_samples=60, seed=2)
    # unit-area disk percolates at about 4.51
    assert 4.0 <= res.lo <= res.hi <= 5.0
