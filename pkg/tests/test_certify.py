import math

import numpy as np
import pytest

from rcmlab.config import validate
from rcmlab.diagrams.certify import (ALL_CASES, Certification, Quantities,
                                     segment_bounds, certify_at, certify_case,
                                     certify_splitting, desk_suite, lambda_sup, oz_tau)


@pytest.fixture(scope="module")
def small_records():
    return desk_suite(kernels=(("gaussian", 8.0),), lambdas=(0.6,), pairs=((1.0, 1.0),),
                      ps=(2.0, math.inf), n_chains=600)


def test_small_suite_holds(small_records):
    bad = [r for r in small_records if not r["holds"]]
    assert bad == []
    assert len(small_records) >= 30


def test_records_follow_the_schema(small_records):
    for rec in small_records:
        validate(rec, "certification")


def test_every_segment_case_is_exercised(small_records):
    seen = {r["case_id"] for r in small_records}
    assert set(ALL_CASES) <= seen


def test_self_test_flips_certifications(gauss_tau):
    phi, tau, lam = gauss_tau
    recs = certify_at(tau, phi, lam, ((1.0, 1.0),), (2.0,), cases=["3a-n2", "1a-i"],
                      self_test=True, blocks=())
    assert any(not c.holds for c in recs)


def test_open_bubble_case_is_tight(gauss_tau):
    # the lhs is the bubble itself, so both sides agree
    phi, tau, lam = gauss_tau
    c = certify_case(Quantities(tau, phi, lam), "3a-n2", 1.0, 1.0, 2.0)
    assert c.lhs == pytest.approx(c.rhs, rel=1e-9) and c.holds


def test_first_case_holds_for_gaussian(gauss_tau):
    phi, tau, lam = gauss_tau
    rep = segment_bounds("1a-i", tau, phi, lam, 2.0, 1.0, 1.0)
    assert rep.all_hold and rep.value > 0


def test_zero_tau_passes_trivially(gauss_tau):
    phi, _, lam = gauss_tau
    zero = phi.like(np.zeros_like(phi.values))
    rep = segment_bounds("1a-ii", zero, phi, lam, 1.0, 1.0, 1.0)
    assert rep.value == 0.0 and rep.all_hold


def test_unknown_case(gauss_tau):
    phi, tau, lam = gauss_tau
    with pytest.raises(ValueError, match="unimplemented case"):
        segment_bounds("9z", tau, phi, lam, 1.0, 1.0, 1.0)


def test_tolerance_of_a_certification():
    prm = {}
    assert Certification("x", "x", 1.0 + 5e-10, 1.0, prm).holds
    assert not Certification("x", "x", 1.0 + 5e-9, 1.0, prm).holds


def test_power_splitting_holds():
    recs = certify_splitting(3000, seed=4)
    assert [r.params["a"] for r in recs] == [1.0, 2.0, 3.0]
    assert all(r.holds for r in recs)


@pytest.mark.parametrize("a", [1.0, 2.0, 3.0])
def test_collinear_chain(a):
    # unit steps along a line: |x_N - x_0| = N and each step has length 1
    N = 5
    lhs = float(N) ** a
    rhs = N**a * N
    assert lhs <= rhs
    assert (lhs == rhs) == (a == 1.0 and N == 1)


def test_lambda_sup_records_its_grid():
    val, grid = lambda_sup(lambda lam: lam**2, lam_c=2.0, n_points=5)
    assert grid == [1.0, 1.2, 1.4, 1.6, 1.8]
    assert val == pytest.approx(3.24)
    with pytest.raises(ValueError):
        lambda_sup(lambda lam: lam, n_points=4)


def test_empty_case_list():
    assert desk_suite(cases=[]) == []


def test_oz_tau_at_small_intensity(gauss_tau):
    phi, _, _ = gauss_tau
    tau = oz_tau(phi, 1e-6)
    # tau = phi + O(lam)
    np.testing.assert_allclose(tau.values, phi.values, atol=1e-6)
