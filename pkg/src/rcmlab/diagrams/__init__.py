"""Diagram catalogue, tensor-network engine and inequality certification."""

from .edges import DeltaDivergentError, WeightedEdge, edge_sup, tau_plus, tilde_tau
from .engine import BudgetError, DiagramContext, Delta, Edge, Network, PsiValue, evaluate

__all__ = [
    "BudgetError", "DeltaDivergentError", "Delta", "DiagramContext", "Edge",
    "Network", "PsiValue", "WeightedEdge", "edge_sup", "evaluate", "tau_plus",
    "tilde_tau",
]
