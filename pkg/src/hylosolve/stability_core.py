"""The quadratic distance-to-level-set functional shared by dynamics and
the stability lab."""

from __future__ import annotations

from .grid import FieldState
from .models import ModelSpec, charge, energy

__all__ = ["lyapunov_v"]


def lyapunov_v(spec: ModelSpec, state: FieldState, e_ref: float, c_ref: float) -> float:
    """(E - e_ref)^2 + (C - c_ref)^2 with the charge kept signed.

    Vanishes exactly on the (e_ref, c_ref) level set; along a flow that
    conserves E and C it is constant up to integrator drift.
    """
    de = energy(spec, state) - e_ref
    dc = charge(spec, state) - c_ref
    return de * de + dc * dc
