"""Periodic box standing in for R^d, with minimal-image displacements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoxDomain:
    d: int
    L: float
    periodic: bool = True

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if not self.L > 0:
            raise ValueError("box side must be positive")
        if not self.periodic:
            raise ValueError("only periodic boxes are supported")

    @property
    def volume(self) -> float:
        return float(self.L) ** self.d

    def check_kernel(self, kernel) -> None:
        """Reject kernels whose range reaches around the torus."""
        if not self.L > 2 * kernel.r_cut:
            raise ValueError(
                f"box side {self.L} must exceed twice the kernel cutoff "
                f"{kernel.r_cut:.4g}")

    def minimal_image(self, dx) -> np.ndarray:
        dx = np.asarray(dx, dtype=float)
        return dx - self.L * np.round(dx / self.L)

    def wrap(self, x) -> np.ndarray:
        return np.mod(np.asarray(x, dtype=float), self.L)
