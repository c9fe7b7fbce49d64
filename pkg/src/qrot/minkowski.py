"""Lorentz-Minkowski linear algebra in dimension n+2.

Vectors are plain float arrays with the time coordinate first; the metric
has signature (-, +, ..., +).  All functions accept stacked arrays and
operate along the last axis.
"""

import enum

import numpy as np

from .errors import ValidationError

__all__ = [
    "CausalCharacter", "as_vector", "lorentz_inner", "lorentz_norm_sq",
    "causal_character", "spatial_radius", "basis_vector",
]


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"
    ZERO = "zero"


def as_vector(components):
    v = np.asarray(components, dtype=float)
    if v.shape[-1] < 2:
        raise ValidationError("ambient vectors need a time and at least one "
                              "spatial component")
    return v


def basis_vector(dim, axis):
    v = np.zeros(dim)
    v[axis] = 1.0
    return v


def lorentz_inner(u, v):
    """<u, v> = -u0*v0 + sum_i ui*vi, along the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValidationError(
            f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def lorentz_norm_sq(v):
    return lorentz_inner(v, v)


def spatial_radius(v):
    """Euclidean norm of the spatial part, sqrt(sum_i xi^2)."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.sum(v[..., 1:] ** 2, axis=-1))


def causal_character(v, tol=1e-10):
    """Classify a single vector, with a tolerance band around the light cone.

    A vector with sup-norm below `tol` is ZERO; one with |<v,v>| below
    tol * ||v||_inf^2 is NULL; otherwise the sign of <v,v> decides.
    """
    if tol < 0:
        raise ValidationError("tolerance must be nonnegative")
    v = as_vector(v)
    sup = np.max(np.abs(v))
    if sup <= tol:
        return CausalCharacter.ZERO
    q = lorentz_inner(v, v)
    if abs(q) <= tol * sup * sup:
        return CausalCharacter.NULL
    return CausalCharacter.SPACELIKE if q > 0 else CausalCharacter.TIMELIKE
