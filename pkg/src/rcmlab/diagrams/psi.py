"""
The psi building blocks and their compositions.

Every block is a sum of variants; each variant is a :class:`Piece` (edges,
explicit deltas, private internal letters).  Pieces are glued into
networks, so the same definitions serve pointwise evaluation, L^p norms and
the m-fold compositions.  Internal letters carry the vertex factor lam.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .engine import (DiagramContext, Delta, Edge, Network, PsiValue,
                     network_value)


@dataclass(frozen=True)
class Piece:
    name: str
    edges: tuple
    deltas: tuple = ()
    internal: tuple = ()

    def __mul__(self, other: "Piece") -> "Piece":
        return Piece(f"{self.name}.{other.name}", self.edges + other.edges,
                     self.deltas + other.deltas, self.internal + other.internal)


def _tau(u, v):
    return Edge(u, v, "tau")


def _tau_o(u, v):
    return Edge(u, v, "tau", contractible=True)


def psi0(w, u, s, lam, tag=""):
    t = f"t{tag}"
    return [
        Piece("psi0_1", (_tau(u, s), _tau(u, w), _tau(w, s))),
        Piece("psi0_2", (_tau(u, s), _tau(u, t), _tau(t, s)), (Delta(w, s, 1 / lam),), (t,)),
        Piece("psi0_3", (Edge(u, s, "phi"),), (Delta(w, s, 1 / lam),)),
    ]


def psi(w, u, r, s, lam, tag=""):
    t, z = f"t{tag}", f"z{tag}"
    return [
        Piece("psi_1", (_tau(w, u), _tau_o(t, s), _tau(t, w), _tau(u, z), _tau(z, t),
                        _tau(z, r)), (), (t, z)),
        Piece("psi_2", (_tau_o(w, s), _tau(t, z), _tau(z, u), _tau(u, t), _tau_o(t, w),
                        _tau(z, r)), (), (t, z)),
        Piece("psi_3", (_tau(u, w), _tau(w, s), _tau(u, r))),
        Piece("psi_4", (_tau(u, w), _tau(u, r)), (Delta(w, s, 1 / lam),)),
    ]


def psi_n(x, r, s, lam, tag=""):
    t, z = f"t{tag}", f"z{tag}"
    return [
        Piece("psin_1", (_tau_o(t, s), _tau(z, r), _tau(t, z), _tau(z, x), _tau(x, t)),
              (), (t, z)),
        Piece("psin_2", (_tau(x, s), _tau(x, r))),
    ]


def psibar0(w, u, s, lam, tag=""):
    return [
        Piece("psibar0_1", (_tau(w, s), _tau(w, u), _tau(u, s))),
        Piece("psibar0_2", (), (Delta(w, s, 1 / lam), Delta(u, s, 1 / lam))),
    ]


def psibar(w, u, r, s, lam, tag=""):
    t, z = f"t{tag}", f"z{tag}"
    return [
        Piece("psibar_1", (_tau(w, u), _tau(t, s), _tau(t, w), _tau(u, z), _tau(z, t),
                           _tau_o(z, r)), (), (t, z)),
        Piece("psibar_2", (_tau(w, s), _tau(t, z), _tau(z, u), _tau(u, t), _tau_o(t, w),
                           _tau_o(z, r)), (), (t, z)),
        Piece("psibar_3", (_tau(u, w), _tau(w, s), _tau(u, r))),
        Piece("psibar_4", (_tau(u, w), _tau(w, s)), (Delta(u, r, 1 / lam),)),
    ]


BLOCKS = {
    "psi0": (psi0, ("w", "u", "s")),
    "psi": (psi, ("w", "u", "r", "s")),
    "psin": (psi_n, ("x", "r", "s")),
    "psibar0": (psibar0, ("w", "u", "s")),
    "psibar": (psibar, ("w", "u", "r", "s")),
}


def psi_networks(kind: str, lam: float) -> list[Network]:
    """
    Networks for a block or a single variant, e.g. ``"psi"`` or ``"psi_3"``.

    External letters are named as in the block signature and are all fixed.
    """
    base, _, variant = kind.partition("_")
    if base not in BLOCKS:
        raise ValueError(f"unknown psi variant: {kind!r}")
    builder, letters = BLOCKS[base]
    pieces = builder(*letters, lam)
    if variant:
        pieces = [p for p in pieces if p.name == kind]
        if not pieces:
            raise ValueError(f"unknown psi variant: {kind!r}")
    return [Network(p.name, p.edges, p.internal, p.deltas, fixed=letters) for p in pieces]


def psi_value(kind: str, ctx: DiagramContext, points: dict) -> PsiValue:
    """Pointwise value of a psi block at grid points ``points[letter]``."""
    total = PsiValue(0.0)
    for net in psi_networks(kind, ctx.lam):
        total = total + network_value(ctx, net, points)
    return total


def composition_networks(m: int, side: str, lam: float) -> list[Network]:
    """
    All variant networks of the m-fold composition with both endpoints
    integrated against lam^2 da db and the start pinned at the origin ``o``.
    """
    if m < 0:
        raise ValueError("segment count must be non-negative")
    if side not in ("left", "right"):
        raise ValueError(f"unknown side: {side!r}")
    first, step = (psi0, psi) if side == "left" else (psibar0, psibar)
    ws = [f"w{j}" for j in range(m + 1)]
    us = [f"u{j}" for j in range(m + 1)]
    stages = [first(ws[0], us[0], "o", lam, tag="0")]
    for j in range(1, m + 1):
        stages.append(step(ws[j], us[j], ws[j - 1], us[j - 1], lam, tag=str(j)))
    nets = []
    for combo in itertools.product(*stages):
        piece = combo[0]
        for p in combo[1:]:
            piece = piece * p
        internal = tuple(ws) + tuple(us) + piece.internal
        nets.append(Network(piece.name, piece.edges, internal, piece.deltas, fixed=("o",)))
    return nets


def composition_value(m: int, side: str, ctx: DiagramContext) -> float:
    """lam^2 * double integral of the m-fold composition over its endpoints."""
    origin = (0,) * ctx.ref.d
    total = 0.0
    for net in composition_networks(m, side, ctx.lam):
        v = network_value(ctx, net, {"o": origin})
        total += v.regular
    return total
