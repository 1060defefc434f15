"""
Bubbles, triangles, squares and the composite quantities, via FFT.

All functions take grid fields for tau (and tau tilde / phi where needed)
together with the intensity lam, and return plain floats or arrays; the
certification layer wraps them into reports.
"""

from __future__ import annotations

import math

import numpy as np

from .. import grid as G
from ..grid import GridField


def _pow_field(f: GridField, a: float) -> np.ndarray:
    return np.abs(f.values) * (f.radius**a if a else 1.0)


def bubble_profile(f: GridField, a: float, g: GridField, b: float, p: float) -> GridField:
    """
    W(u) = || f^(a)(x) g^(b)(u + x) ||_{L^p_x} for every grid offset u.

    Finite p uses the identity W(u)^p = (F * reflected G)(u) with F = |f^(a)|^p,
    so it is exact for every p; p = inf is a direct max over x.
    """
    if not f.same_grid(g):
        raise ValueError("shape mismatch between bubble edges")
    fa = _pow_field(f, a)
    gb = _pow_field(g, b)
    if math.isinf(p):
        return f.like(_sup_correlation(fa, gb), name="W_inf")
    prod = G.correlate(f.like(fa**p), f.like(gb**p)).values
    return f.like(np.clip(prod, 0, None) ** (1.0 / p), name=f"W_{p:g}")


def _sup_correlation(fa: np.ndarray, gb: np.ndarray) -> np.ndarray:
    """max_x fa(x) gb(u + x) for every u, in blocks of shifts."""
    n, d = fa.shape[0], fa.ndim
    flat_f = fa.reshape(-1)
    out = np.empty(fa.shape)
    shifts = np.indices(fa.shape).reshape(d, -1).T
    block = max(1, 2**22 // flat_f.size)
    for start in range(0, len(shifts), block):
        for sh in shifts[start:start + block]:
            rolled = np.roll(gb, tuple(-int(s) for s in sh), axis=tuple(range(d)))
            out[tuple(sh)] = np.max(flat_f * rolled.reshape(-1))
    return out


def bubble_W(f: GridField, a: float, g: GridField, b: float, p: float, u) -> float:
    """Bubble at one offset ``u`` (grid index tuple)."""
    fa = _pow_field(f, a)
    gb = np.roll(_pow_field(g, b), tuple(-int(s) for s in u), axis=tuple(range(f.d)))
    prod = fa * gb
    if math.isinf(p):
        return float(prod.max())
    return float((f.cell * np.sum(prod**p)) ** (1.0 / p))


def W_bar(tt: GridField, a: float, b: float, p: float) -> tuple[float, tuple[int, ...]]:
    """sup_u W_p^(a,b)(u) with both edges tau tilde; returns value and argmax."""
    prof = bubble_profile(tt, a, tt, b, p).values
    idx = np.unravel_index(int(np.argmax(prof)), prof.shape)
    return float(prof[idx]), tuple(int(i) for i in idx)


def triangle_profile(tau: GridField, lam: float, b: float = 0.0) -> GridField:
    """lam^2 (tau^(b) * tau * tau)(u)."""
    tb = tau.weighted(b)
    return tau.like(lam**2 * G.convolve_many(tb, tau, tau).values, name=f"T^{b:g}")


def triangle_T(tau: GridField, lam: float, b: float = 0.0) -> float:
    return float(triangle_profile(tau, lam, b).values.max())


def open_triangle_T(tau: GridField, tt: GridField, lam: float, b: float = 0.0) -> float:
    """Triangle with one tau replaced by tau tilde."""
    tb = tau.weighted(b)
    return float(lam**2 * G.convolve_many(tb, tau, tt).values.max())


def wedge_B1(tau: GridField, lam: float, theta: float = 0.0) -> float:
    """lam || tau^(theta) * tau ||_inf."""
    return float(lam * G.convolve(tau.weighted(theta), tau).values.max())


def contracted_T(tau: GridField, lam: float, theta: float = 0.0) -> float:
    """T^(theta) + B_1^(theta,0) + B_1^(0,0)."""
    return triangle_T(tau, lam, theta) + wedge_B1(tau, lam, theta) + wedge_B1(tau, lam, 0.0)


def square_S(tau: GridField, lam: float) -> float:
    """lam^3 || tau*tau*tau*tau ||_inf."""
    return float(lam**3 * G.convolve_many(tau, tau, tau, tau).values.max())


def p_triangle(tau: GridField, lam: float, theta: float, p: float) -> float:
    """sup_u || tau^(theta)(x) lam (tau*tau)(u + x) ||_{L^p_x}."""
    conv = tau.like(lam * G.convolve(tau, tau).values)
    return float(bubble_profile(tau, theta, conv, 0.0, p).values.max())


def p_triangle_bound(tau: GridField, lam: float, theta: float) -> float:
    """lam^{-1} T^(theta) + ||tau^(theta)||_inf B_1^(0,0), valid for every p."""
    return (triangle_T(tau, lam, theta) / lam
            + G.weighted_norm(tau, theta, math.inf) * wedge_B1(tau, lam, 0.0))


def composite_UV(phi: GridField, tau: GridField, lam: float) -> dict:
    tri = lam**2 * G.convolve_many(tau, tau, tau).values.max()
    tri_oo = tri + lam * G.convolve(tau, tau).values.max() + 1.0
    U = tri * tri_oo + tri_oo**2 + lam * G.weighted_norm(phi, 0, 1)
    V = 4 * math.sqrt(max(tri * tri_oo * U, 0.0))
    return {"triangle": float(tri), "triangle_oo": float(tri_oo), "U": float(U),
            "V": float(V), "V_below_one": bool(V < 1)}
