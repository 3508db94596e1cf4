"""Convex energetics of the flow: the curvature functional, indicator, and gradient.

With g = d2(w) + c0 the shifted discrete curvature:

    big_phi(x) = x^{-2}/2 on x > 0, +inf otherwise
    phi(w)     = dh * sum_i big_phi(g_i)
    psi(w)     = 0 if ||w||_tilde_v <= cap_C else +inf
    E(w)       = 0.5 * || d2(g^{-3}) ||_l2^2
    grad_phi   = -d2(g^{-3})

Grid fields are absolutely continuous by construction, so phi and E see the
full discrete curvature; a singular part only ever appears as a
refinement-limit diagnosis (see diagnostics.detect_atoms).  +inf is the
sentinel for out-of-domain states; it is returned, compared against, but
never fed into arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveCurvature
from .grid import Field, d2_values, l2_norm, norms

INF = math.inf


@dataclass(frozen=True)
class EnergyParams:
    """c0: conserved curvature mass; cap_C: radius of the invariant ball."""

    c0: float
    cap_C: float | None = None

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.cap_C is None:
            object.__setattr__(self, "cap_C", 2.0 * self.c0 + 1.0)
        elif self.cap_C < 2.0 * self.c0 + 1.0:
            raise ValueError(f"cap_C={self.cap_C} below the invariant-ball radius {2 * self.c0 + 1}")


def big_phi(x: float) -> float:
    return 0.5 * x**-2 if x > 0.0 else INF


def shifted_curvature(w: Field, p: EnergyParams) -> np.ndarray:
    """g = d2(w) + c0 as a raw array."""
    return d2_values(w.grid, w.values) + p.c0


def phi_of_curvature(g: np.ndarray) -> float:
    """phi from a precomputed g array (midpoint quadrature of big_phi)."""
    if np.min(g) <= 0.0:
        return INF
    return 0.5 * float(np.mean(g**-2))


def phi(w: Field, p: EnergyParams) -> float:
    return phi_of_curvature(shifted_curvature(w, p))


def psi(w: Field, p: EnergyParams) -> float:
    return 0.0 if norms(w).tilde_v <= p.cap_C else INF


def phi_plus_psi(w: Field, p: EnergyParams) -> float:
    v = phi(w, p)
    return v if psi(w, p) == 0.0 else INF


def mass(w: Field, p: EnergyParams) -> float:
    """dh * sum(d2 w + c0); equals c0 up to roundoff since d2 annihilates means."""
    return float(np.mean(shifted_curvature(w, p)))


def energy_E(w: Field, p: EnergyParams) -> float:
    g = shifted_curvature(w, p)
    if np.min(g) <= 0.0:
        return INF
    return 0.5 * l2_norm(d2_values(w.grid, g**-3)) ** 2


def grad_phi_values(grid, g: np.ndarray) -> np.ndarray:
    """Gradient from a precomputed strictly positive g array."""
    return -d2_values(grid, g**-3)


def grad_phi(w: Field, p: EnergyParams) -> Field:
    """L2 gradient of phi: -d2((d2 w + c0)^{-3}); mean-zero.

    The flow itself is w_t = -grad_phi(w) = [ (w_hh+c0)^{-3} ]_hh.
    """
    g = shifted_curvature(w, p)
    if np.min(g) <= 0.0:
        raise NonPositiveCurvature(f"min(d2 w + c0) = {np.min(g):.3e} <= 0: outside domain of phi")
    return Field(w.grid, grad_phi_values(w.grid, g))


def jensen_floor(p: EnergyParams) -> float:
    """Lower bound phi(w) >= big_phi(c0) on the whole domain (equality iff d2 w == 0)."""
    return big_phi(p.c0)
