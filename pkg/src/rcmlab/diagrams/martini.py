"""Two-external-point diagrams Y and H (the martinis), on small grids."""

from __future__ import annotations

import math

import numpy as np

from ..grid import GridField
from .engine import DEFAULT_BUDGET, DiagramContext, Edge, Network, evaluate, lp_over_norm_letter


def y_network(a: float) -> Network:
    return Network(
        f"Y^{a:g}",
        (Edge("z1", "o"), Edge("z2", "z1", weight=a), Edge("x", "z2"),
         Edge("z3", "z1"), Edge("z2", "z3"), Edge("y", "z3")),
        internal=("z1", "z2", "z3"), fixed=("o",), free=("x", "y"))


def Y_matrix(ctx: DiagramContext, a: float) -> np.ndarray:
    """Y^(a)(x, y) for all grid points, as an N x N array."""
    origin = (0,) * ctx.ref.d
    values, _, _ = evaluate(ctx, y_network(a), {"o": origin})
    return values


def Y_diagram(a: float, tau: GridField, lam: float, x, y,
              budget: int = DEFAULT_BUDGET) -> float:
    ctx = DiagramContext({"tau": tau}, lam, budget)
    return float(Y_matrix(ctx, a)[ctx.flat(x), ctx.flat(y)])


def H_profiles(ctx: DiagramContext, a: float, b: float, ps) -> dict:
    """
    H_p^(a,b)(u, v) for every grid pair (u, v) and every p in ``ps``.

    Returned arrays are indexed ``[u, v]`` by flat grid index.
    """
    Y = Y_matrix(ctx, a)
    T = ctx.matrix("tau")
    out = {p: np.empty((ctx.N, ctx.N)) for p in ps}
    scale = ctx.lam * ctx.cell
    shape = ctx.ref.values.shape
    for v in range(ctx.N):
        shift = np.unravel_index(v, shape)
        Mv = ctx.matrix("tau", b, shift)
        inner = scale * ((Y * Mv) @ T)
        for p in ps:
            out[p][:, v] = lp_over_norm_letter(inner, ctx.cell, p)
        ctx._cache.pop(("tau", float(b), tuple(int(s) for s in shift)), None)
    return out


def H_diagram(a: float, b: float, p: float, tau: GridField, lam: float, u, v,
              budget: int = DEFAULT_BUDGET) -> float:
    ctx = DiagramContext({"tau": tau}, lam, budget)
    Y = Y_matrix(ctx, a)
    T = ctx.matrix("tau")
    Mv = ctx.matrix("tau", b, tuple(v))
    col = ctx.lam * ctx.cell * ((Y * Mv) @ T[:, ctx.flat(u)])
    return float(lp_over_norm_letter(col, ctx.cell, p))


def H_bar(ctx: DiagramContext, a: float, b: float, ps) -> dict:
    """sup over all (u, v) with the argmax as grid index tuples."""
    shape = ctx.ref.values.shape
    res = {}
    for p, arr in H_profiles(ctx, a, b, ps).items():
        iu, iv = np.unravel_index(int(np.argmax(arr)), arr.shape)
        res[p] = (float(arr[iu, iv]),
                  tuple(int(i) for i in np.unravel_index(iu, shape)),
                  tuple(int(i) for i in np.unravel_index(iv, shape)))
    return res


def h_network(a: float, b: float, v) -> Network:
    """H as an explicit network with fixed u and the shift v, norm letter x."""
    return Network(
        f"H^{a:g},{b:g}",
        (Edge("z1", "o"), Edge("z2", "z1", weight=a), Edge("x", "z2"),
         Edge("z3", "z1"), Edge("z2", "z3"), Edge("y", "z3"),
         Edge("y", "u"), Edge("x", "y", weight=b, shift=tuple(v))),
        internal=("z1", "z2", "z3", "y"), fixed=("o", "u"), norm="x")


def h_inf_bound_rhs(tau: GridField, tt: GridField, lam: float, a: float, b: float) -> float:
    """lam^2 ||tau||_2^2 E^(a) T^(0) ||tau^(b) * tau||_inf, one intensity."""
    from .. import grid as G
    from .basic import triangle_T
    E_a = G.weighted_norm(tt, a, math.inf)
    return (lam**2 * G.weighted_norm(tau, 0, 2) ** 2 * E_a * triangle_T(tau, lam, 0)
            * float(G.convolve(tau.weighted(b), tau).values.max()))
