"""
Catalogue of the special-segment L^p bounds.

Each case is one network (the lhs diagram) and one rhs expression in terms
of the named sup quantities of :class:`Quantities`.  Two geometries occur:

``"open"``
    norm letter ``x``, endpoint ``a`` pinned at the origin, endpoint ``b``
    left free and scanned over the whole grid.
``"segment"``
    a middle segment whose left endpoints are ``(a - x, b - x)``; we use the
    reflected norm letter ``y = -x`` so that every edge is a (shifted)
    difference, pin ``a = 0`` and scan ``b`` and the right attachments
    ``c, d`` over a small lattice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import DiagramContext, Edge, Network, evaluate, lp_over_norm_letter


@dataclass(frozen=True)
class SegmentCase:
    case_id: str
    anchor: str
    geometry: str
    build: Callable
    rhs: Callable
    rhs_text: str
    needs_positive: bool = False


def _e(u, v, w=0.0, contractible=False, shift=()):
    return Edge(u, v, "tau", w, contractible, shift)


def _open(name, edges, internal=()):
    return Network(name, tuple(edges), internal=tuple(internal), fixed=("a",),
                   free=("b",), norm="x")


def _segment(name, edges, internal=()):
    return Network(name, tuple(edges), internal=tuple(internal),
                   fixed=("c", "d"), norm="y")


def _attach(theta_on_c=0.0):
    return [_e("c", "u", theta_on_c, contractible=True), _e("d", "w")]


# segment edges: s = b + y and r = a + y, a = 0, so w - s = (w - y) - b
def _seg_s(letter, w, b):
    return _e(letter, "y", w, shift=tuple(-int(i) for i in b))


def _seg_r(letter, w, a):
    return _e(letter, "y", w, shift=tuple(-int(i) for i in a))


def _case_list():
    C = []

    def add(cid, anchor, geom, build, rhs, text, positive=False):
        C.append(SegmentCase(cid, anchor, geom, build, rhs, text, positive))

    add("1a-i", "segment-1a-i", "open",
        lambda f, t, **_: _open("1a-i", [_e("w", "x", f), _e("u", "x", t), _e("u", "w"),
                                         _e("a", "w", contractible=True), _e("b", "u")],
                                ("w", "u")),
        lambda Q, f, t, p: Q.W(f, t, p) * (Q.T(0) + Q.B(0)), "W(f,t)*(T0+B00)")
    add("1a-ii", "segment-1a-ii", "open",
        lambda f, t, **_: _open("1a-ii", [_e("w", "x", f), _e("u", "x"), _e("u", "w", t),
                                          _e("a", "w"), _e("b", "u")], ("w", "u")),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.T(t), "W(f,0)*T(t)")
    add("3a-n2", "segment-3a-n2", "open",
        lambda f, t, **_: _open("3a-n2", [_e("x", "b", f), _e("x", "a", t)]),
        lambda Q, f, t, p: Q.W(f, t, p), "W(f,t)")

    def psin1(name, w_tb, w_tz, w_za, w_zx, w_xt):
        return _open(name, [_e("t", "b", w_tb, contractible=True), _e("z", "a", w_za),
                            _e("t", "z", w_tz), _e("z", "x", w_zx), _e("x", "t", w_xt)],
                     ("t", "z"))

    add("3a-n1-i", "segment-3a-n1", "open",
        lambda f, t, **_: psin1("3a-n1-i", 0, 0, 0, t, f),
        lambda Q, f, t, p: Q.W(f, t, p) * Q.To(0), "W(f,t)*To(0)")
    add("3a-n1-i-flip", "segment-3a-n1", "open",
        lambda f, t, **_: psin1("3a-n1-i-flip", 0, 0, 0, f, t),
        lambda Q, f, t, p: Q.W(f, t, p) * Q.To(0), "W(f,t)*To(0)")
    add("3a-n1-ii", "segment-3a-n1", "open",
        lambda f, t, **_: psin1("3a-n1-ii", 0, 0, t, 0, f),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.To(t), "W(f,0)*To(t)")
    add("3a-n1-ii-flip", "segment-3a-n1", "open",
        lambda f, t, **_: psin1("3a-n1-ii-flip", t, 0, 0, f, 0),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.To(t), "W(f,0)*To(t)")
    add("3a-n1-iii", "segment-3a-n1-contracted", "open",
        lambda f, t, **_: _open("3a-n1-iii", [_e("z", "a", f), _e("b", "z"), _e("z", "x"),
                                              _e("x", "b", t)], ("z",)),
        lambda Q, f, t, p: Q.E(f) * (Q.T(t) / Q.lam + Q.E(t) * Q.B(0)),
        "E(f)*(T(t)/lam+E(t)*B00)")

    # middle segments; f and t are the two decorations, b the left shift
    def psi3(name, wf, wt, wc, b, a):
        return _segment(name, [_e("u", "w"), _seg_s("w", wf, b), _seg_r("u", wt, a)]
                        + _attach(wc), ("w", "u"))

    add("2a-psi3-i", "segment-2a-psi3", "segment",
        lambda f, t, b, a: psi3("2a-psi3-i", f, t, 0, b, a),
        lambda Q, f, t, p: Q.W(f, t, p) * Q.To(0), "W(f,t)*To(0)")
    add("2a-psi3-i-flip", "segment-2a-psi3", "segment",
        lambda f, t, b, a: psi3("2a-psi3-i-flip", t, f, 0, b, a),
        lambda Q, f, t, p: Q.W(f, t, p) * Q.To(0), "W(f,t)*To(0)")
    add("2a-psi3-ii", "segment-2a-psi3", "segment",
        lambda f, t, b, a: psi3("2a-psi3-ii", f, 0, t, b, a),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.To(t), "W(f,0)*To(t)")

    def psi1(name, w_ts, w_zr, w_uz, w_wu, w_zt, b, a):
        return _segment(name, [_e("w", "u", w_wu), _seg_s("t", w_ts, b), _e("t", "w"),
                               _e("u", "z", w_uz), _e("z", "t", w_zt), _seg_r("z", w_zr, a)]
                        + _attach(), ("w", "u", "t", "z"))

    add("2a-psi1-i", "segment-2a-psi1", "segment",
        lambda f, t, b, a: psi1("2a-psi1-i", f, t, 0, 0, 0, b, a),
        lambda Q, f, t, p: Q.W(f, t, p) * Q.To(0) ** 2, "W(f,t)*To(0)^2", True)
    add("2a-psi1-ii", "segment-2a-psi1", "segment",
        lambda f, t, b, a: psi1("2a-psi1-ii", f, 0, t, 0, 0, b, a),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.To(t) * Q.To(0), "W(f,0)*To(t)*To(0)", True)
    add("2a-psi1-rung", "segment-2a-psi1", "segment",
        lambda f, t, b, a: psi1("2a-psi1-rung", f, 0, 0, t, 0, b, a),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.To(t) * Q.To(0), "W(f,0)*To(t)*To(0)", True)
    add("2a-psi1-mid", "segment-2a-psi1", "segment",
        lambda f, t, b, a: psi1("2a-psi1-mid", f, 0, 0, 0, t, b, a),
        lambda Q, f, t, p: Q.W(f, 0, p) * Q.T(t) * Q.To(0), "W(f,0)*T(t)*To(0)", True)

    add("2a-psi4-i", "segment-2a-psi4", "segment",
        lambda f, t, b, a: _segment("2a-psi4-i", [_e("d", "y", f, shift=_neg(b)),
                                                   _e("c", "y", t, shift=_neg(a)),
                                                   _e("c", "q"), _e("q", "y", shift=_neg(b))],
                                    ("q",)),
        lambda Q, f, t, p: Q.E(f) * Q.ptri_bound(t), "E(f)*(T(t)/lam+E(t)*B00)")
    add("2a-psi4-ii", "segment-2a-psi4", "segment",
        lambda f, t, b, a: _segment("2a-psi4-ii", [_e("c", "y", shift=_neg(b)),
                                                    _e("c", "y", t, shift=_neg(a)),
                                                    _e("d", "y", f, shift=_neg(b))]),
        lambda Q, f, t, p: Q.E(0) * Q.W(f, t, p), "E(0)*W(f,t)")
    return C


def _neg(b):
    return tuple(-int(i) for i in b)


CASES = {c.case_id: c for c in _case_list()}


def segment_scan(d: int, n: int):
    """Small lattice of (b, c, d) offsets used for segment cases."""
    pts = [(0,) * d, (1,) + (0,) * (d - 1), tuple([2] + [1] * (d - 1)),
           tuple([n - 1] + [2] * (d - 1))]
    combos = [(pts[0], pts[0], pts[0]), (pts[1], pts[0], pts[2]),
              (pts[2], pts[3], pts[1]), (pts[3], pts[2], pts[0])]
    return combos


def case_lhs(ctx: DiagramContext, case: SegmentCase, f: float, t: float, p: float):
    """sup of the lhs over the scan; returns (value, location, resolution)."""
    d, n = ctx.ref.d, ctx.ref.n
    origin = (0,) * d
    if case.needs_positive and f <= 0:
        raise ValueError(f"case {case.case_id} needs a positive decoration")
    if case.geometry == "open":
        net = case.build(f, t)
        vals, _, _ = evaluate(ctx, net, {"a": origin})
        norms = lp_over_norm_letter(vals, ctx.cell, p)
        k = int(np.argmax(norms))
        loc = tuple(int(i) for i in np.unravel_index(k, ctx.ref.values.shape))
        return float(norms[k]), loc, "all b on grid"
    best, loc = -1.0, None
    for b, c, dd in segment_scan(d, n):
        net = case.build(f, t, b=b, a=origin)
        vals, _, _ = evaluate(ctx, net, {"c": c, "d": dd})
        val = float(lp_over_norm_letter(vals, ctx.cell, p))
        if val > best:
            best, loc = val, (b, c, dd)
    return best, loc, f"{len(segment_scan(d, n))} (b,c,d) lattice points"


def case_ids():
    return list(CASES)
