"""Edges of diagrams: weighted two-point functions and contractible edges."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import grid as G
from ..grid import GridField


class DeltaDivergentError(ValueError):
    """Raised when a norm would have to integrate a power of a delta."""


@dataclass(frozen=True, eq=False)
class WeightedEdge:
    """
    ``|x|^weight * base(x)``, optionally with an extra ``lam^{-1} delta`` atom.

    A contractible edge stands for ``lam^{-1} delta + base``; the delta is
    kept as a coefficient and never sampled on the grid.
    """

    base: GridField
    weight: float = 0.0
    contractible: bool = False
    lam: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("edge weight must be non-negative")

    @property
    def delta_coefficient(self) -> float:
        # |x|^a delta(x) = 0 as soon as a > 0
        if not self.contractible or self.weight > 0:
            return 0.0
        return 1.0 / self.lam

    def smooth(self) -> GridField:
        return self.base.weighted(self.weight)


def tilde_tau(tau: GridField, phi: GridField, lam: float) -> GridField:
    """phi + lam (phi * tau), the pointwise majorant of tau."""
    if not tau.same_grid(phi):
        raise ValueError("shape mismatch between tau and phi")
    return phi.like(phi.values + lam * G.convolve(phi, tau).values, name="tau_tilde")


def tau_plus(tau: GridField, phi: GridField, lam: float) -> GridField:
    return phi.like(lam * G.convolve(phi, tau).values, name="tau_plus")


def edge_sup(edge: WeightedEdge, s: float = math.inf) -> float:
    """|| |x|^a base ||_{L^s}; s = inf gives the weighted sup."""
    if edge.delta_coefficient and not math.isinf(s):
        raise DeltaDivergentError("delta-divergent: contractible edge has a delta atom")
    return G.weighted_norm(edge.base, edge.weight, s)
