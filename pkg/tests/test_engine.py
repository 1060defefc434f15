import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcmlab.diagrams import (BudgetError, Delta, DeltaDivergentError, DiagramContext, Edge,
                             Network, evaluate)
from rcmlab.diagrams.engine import network_norm, network_value
from rcmlab.diagrams.martini import Y_matrix
from rcmlab.grid import GridField, discretize
from rcmlab.kernels import AdjacencyKernel

N_SIDE, H = 4, 0.5


def _field(seed, n=N_SIDE, h=H):
    return GridField(np.random.default_rng(seed).random((n, n)), h=h)


def _points(n=N_SIDE):
    return list(itertools.product(range(n), repeat=2))


def _f(field, a, b, weight=0.0):
    """field^(weight)(a - b) on grid index tuples, by brute force."""
    n = field.n
    idx = tuple((int(i) - int(j)) % n for i, j in zip(a, b))
    return float(field.weighted(weight).values[idx]) if weight else float(field.values[idx])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.2, 2.0))
def test_closed_triangle_against_loops(seed, lam):
    t = _field(seed)
    ctx = DiagramContext({"tau": t}, lam)
    net = Network("tri", (Edge("z1", "o"), Edge("z2", "z1", weight=1), Edge("o", "z2")),
                  internal=("z1", "z2"), fixed=("o",))
    o = (1, 2)
    want = sum(_f(t, z1, o) * _f(t, z2, z1, 1) * _f(t, o, z2)
               for z1 in _points() for z2 in _points()) * (lam * t.cell) ** 2
    assert network_value(ctx, net, {"o": o}).regular == pytest.approx(want, rel=1e-12)


def test_y_matches_nested_direct_sum():
    t = _field(4)
    lam = 0.7
    ctx = DiagramContext({"tau": t}, lam)
    Y = Y_matrix(ctx, 1.0)
    P = _points()
    N = len(P)
    T = np.array([[_f(t, a, b) for b in P] for a in P])
    Tw = np.array([[_f(t, a, b, 1.0) for b in P] for a in P])
    o = P.index((0, 0))
    # Y(x, y) = sum tau(z1) tau^(1)(z2 - z1) tau(x - z2) tau(z3 - z1) tau(z2 - z3) tau(y - z3)
    want = np.zeros((N, N))
    for z1, z2, z3 in itertools.product(range(N), repeat=3):
        w = T[z1, o] * Tw[z2, z1] * T[z3, z1] * T[z2, z3]
        want += w * np.outer(T[:, z2], T[:, z3])
    want *= (lam * t.cell) ** 3
    np.testing.assert_allclose(Y, want, rtol=1e-9, atol=1e-14)


def test_contractible_edge_equals_discrete_delta():
    t = _field(9)
    lam = 0.8
    spike = np.zeros_like(t.values)
    spike[0, 0] = 1.0 / (lam * t.cell)
    ctx = DiagramContext({"tau": t, "tau_o": t.like(t.values + spike)}, lam)
    sym = Network("c", (Edge("a", "z", contractible=True), Edge("z", "b")),
                  internal=("z",), fixed=("a", "b"))
    grid = Network("g", (Edge("a", "z", "tau_o"), Edge("z", "b")), internal=("z",),
                   fixed=("a", "b"))
    pts = {"a": (0, 1), "b": (3, 2)}
    assert network_value(ctx, sym, pts).regular == pytest.approx(
        network_value(ctx, grid, pts).regular, rel=1e-12)


def test_contraction_limit_of_narrow_gaussian():
    # smooth integrand, delta replaced by a normalised gaussian of width h
    lam, L, n = 1.0, 8.0, 32
    tau = discretize(AdjacencyKernel.gaussian(2), 2, L, n)
    h = L / n
    narrow = discretize(lambda x: np.exp(-np.sum(x * x, -1) / (2 * h * h)), 2, L, n,
                        normalize=True)
    ctx = DiagramContext({"tau": tau, "tau_o": tau.like(tau.values + narrow.values / lam)}, lam)
    sym = Network("c", (Edge("a", "z", contractible=True), Edge("z", "b")),
                  internal=("z",), fixed=("a", "b"))
    approx = Network("g", (Edge("a", "z", "tau_o"), Edge("z", "b")), internal=("z",),
                     fixed=("a", "b"))
    pts = {"a": (0, 0), "b": (4, 0)}
    exact = network_value(ctx, sym, pts).regular
    assert network_value(ctx, approx, pts).regular == pytest.approx(exact, rel=2 * h * h)


def test_two_fixed_letters_merged_give_an_atom():
    t = _field(2)
    ctx = DiagramContext({"tau": t}, 0.5)
    net = Network("atom", (Edge("a", "b", contractible=True),), fixed=("a", "b"))
    same = network_value(ctx, net, {"a": (1, 1), "b": (1, 1)})
    assert same.singular == pytest.approx(2.0)
    assert same.regular == pytest.approx(t.values[0, 0])
    apart = network_value(ctx, net, {"a": (1, 1), "b": (2, 1)})
    assert apart.singular == 0.0 and apart.atoms == []


def test_delta_on_norm_letter_diverges():
    ctx = DiagramContext({"tau": _field(1)}, 1.0)
    net = Network("bad", (Edge("x", "a", contractible=True),), fixed=("a",), norm="x")
    with pytest.raises(DeltaDivergentError, match="delta-divergent"):
        network_norm(ctx, net, 2, {"a": (0, 0)})


def test_delta_cycle_diverges():
    ctx = DiagramContext({"tau": _field(1)}, 1.0)
    net = Network("loop", (Edge("a", "z"),), internal=("z",), fixed=("a",),
                  deltas=(Delta("a", "z", 1.0), Delta("z", "a", 1.0)))
    with pytest.raises(DeltaDivergentError, match="cycle"):
        evaluate(ctx, net, {"a": (0, 0)})


def test_budget_is_enforced():
    with pytest.raises(BudgetError, match="grid too large"):
        DiagramContext({"tau": _field(0, n=16)}, 1.0, budget=1000)


def test_network_validation():
    ctx = DiagramContext({"tau": _field(0)}, 1.0)
    with pytest.raises(ValueError, match="undeclared"):
        evaluate(ctx, Network("u", (Edge("a", "q"),), fixed=("a",)), {"a": (0, 0)})
    with pytest.raises(ValueError, match="no position"):
        evaluate(ctx, Network("p", (Edge("a", "b"),), fixed=("a", "b")), {"a": (0, 0)})
    with pytest.raises(ValueError, match="shift"):
        Edge("a", "b", contractible=True, shift=(1, 0))


def test_free_letters_return_arrays():
    t = _field(6)
    ctx = DiagramContext({"tau": t}, 1.0)
    reg, _, _ = evaluate(ctx, Network("e", (Edge("b", "a", shift=(1, 0)),), fixed=("a",),
                                      free=("b",)), {"a": (0, 0)})
    P = _points()
    want = [_f(t, (b[0] + 1, b[1]), (0, 0)) for b in P]
    np.testing.assert_allclose(reg, want)
