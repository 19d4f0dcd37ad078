"""Dynamical-system definitions: vector fields, Jacobians, and a name registry.

A system is a plain container of callables evaluating du/dt = g(u, t) and,
optionally, the Jacobian dg/du. Builtin systems are autonomous, but the
interface carries t so nonautonomous fields plug in unchanged. SystemDef
values are immutable and stateless, so they are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, NotFoundError, NumericError

Array = np.ndarray
FieldFn = Callable[[Array, float], Array]
JacobianFn = Callable[[Array, float], Array]


@dataclass(frozen=True)
class SystemDef:
    """An n-dimensional ODE with an optional analytic Jacobian.

    ``jacobian`` may be None, in which case callers fall back to central
    finite differences (:func:`fd_jacobian`). ``params`` holds plain JSON-able
    values so records referencing the system can be serialized.
    """

    name: str
    dim: int
    params: dict
    field: FieldFn
    jacobian: JacobianFn | None = None


def as_state(sys: SystemDef, u) -> Array:
    """Validate and convert ``u`` to a float vector of the system dimension."""
    v = np.asarray(u, dtype=float)
    if v.shape != (sys.dim,):
        raise ArgumentError(
            f"state of shape {v.shape} does not match dimension {sys.dim} of '{sys.name}'"
        )
    if not np.all(np.isfinite(v)):
        raise ArgumentError(f"state contains non-finite components: {v}")
    return v


def eval_field(sys: SystemDef, u, t: float = 0.0) -> Array:
    """Evaluate g(u, t) with dimension and finiteness checks."""
    v = as_state(sys, u)
    g = np.asarray(sys.field(v, t), dtype=float)
    if g.shape != (sys.dim,):
        raise ArgumentError(f"field of '{sys.name}' returned shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericError(f"field of '{sys.name}' is non-finite at u={v}, t={t:g}")
    return g


def eval_jacobian(sys: SystemDef, u, t: float = 0.0) -> Array:
    """Evaluate dg/du, analytically if available, else by central differences."""
    v = as_state(sys, u)
    if sys.jacobian is None:
        J = fd_jacobian(sys, v, t)
    else:
        J = np.asarray(sys.jacobian(v, t), dtype=float)
    if J.shape != (sys.dim, sys.dim):
        raise ArgumentError(f"jacobian of '{sys.name}' returned shape {J.shape}")
    if not np.all(np.isfinite(J)):
        raise NumericError(f"jacobian of '{sys.name}' is non-finite at u={v}, t={t:g}")
    return J


def fd_jacobian(sys: SystemDef, u, t: float = 0.0, h: float | None = None) -> Array:
    """Central-difference Jacobian, column j = (g(u+h e_j) - g(u-h e_j)) / 2h.

    The default step h = 1e-6 * max(1, |u|_inf) balances truncation against
    roundoff for double precision.
    """
    v = as_state(sys, u)
    if h is None:
        h = 1e-6 * max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
    if h <= 0.0:
        raise ArgumentError(f"finite-difference step must be positive, got {h:g}")
    J = np.empty((sys.dim, sys.dim))
    for j in range(sys.dim):
        step = np.zeros(sys.dim)
        step[j] = h
        J[:, j] = (sys.field(v + step, t) - sys.field(v - step, t)) / (2.0 * h)
    return J


def _make_paper3d(A: float = 2.0, B: float = 1.0, C: float = -1.0, D: float = 0.2) -> SystemDef:
    """Three-dimensional flow with a single equilibrium at the origin.

    The xy components rotate by the saturating angle arctan(D z) while being
    stretched by A and B; the z component relaxes as C * arctan(z). For C < 0
    every orbit started on the z axis stays on it and decays to the origin,
    and the linearization there is diag(A, B, C).
    """

    def field(u: Array, t: float) -> Array:
        x, y, z = u
        phi = math.atan(D * z)
        c = math.cos(phi)
        s = math.sin(phi)
        return np.array([A * x * c - B * y * s, A * x * s + B * y * c, C * math.atan(z)])

    def jacobian(u: Array, t: float) -> Array:
        x, y, z = u
        w = D * z
        phi = math.atan(w)
        c = math.cos(phi)
        s = math.sin(phi)
        dphi = D / (1.0 + w * w)
        return np.array(
            [
                [A * c, -B * s, (-A * x * s - B * y * c) * dphi],
                [A * s, B * c, (A * x * c - B * y * s) * dphi],
                [0.0, 0.0, C / (1.0 + z * z)],
            ]
        )

    params = {"A": float(A), "B": float(B), "C": float(C), "D": float(D)}
    return SystemDef("paper3d", 3, params, field, jacobian)


def _make_diag_linear(diag=(2.0, 1.0, -1.0)) -> SystemDef:
    """Decoupled linear system du_i/dt = lam_i u_i; exact solutions are known."""
    lam = np.asarray(diag, dtype=float)
    if lam.ndim != 1 or lam.size < 1:
        raise ArgumentError("'diag' must be a nonempty sequence of rates")
    J = np.diag(lam)

    def field(u: Array, t: float) -> Array:
        return lam * u

    def jacobian(u: Array, t: float) -> Array:
        return J.copy()

    return SystemDef("diag-linear", lam.size, {"diag": [float(v) for v in lam]}, field, jacobian)


def _make_rotation_saddle(a: float = 0.5, b: float = 1.5) -> SystemDef:
    """Planar linear system [[a, -b], [b, -a]]: a saddle sheared by rotation.

    For b*b > a*a the eigenvalues are the complex pair +-i sqrt(b^2 - a^2),
    so the tangent frame never settles; useful for stressing the QR sweep.
    """
    M = np.array([[a, -b], [b, -a]])

    def field(u: Array, t: float) -> Array:
        return M @ u

    def jacobian(u: Array, t: float) -> Array:
        return M.copy()

    return SystemDef("rotation-saddle", 2, {"a": float(a), "b": float(b)}, field, jacobian)


_REGISTRY: dict[str, Callable[..., SystemDef]] = {
    "paper3d": _make_paper3d,
    "diag-linear": _make_diag_linear,
    "rotation-saddle": _make_rotation_saddle,
}


def make_system(name: str, params: dict | None = None) -> SystemDef:
    """Build a registered system by name, applying parameter overrides.

    Unknown names and unknown parameter keys are rejected, naming the
    offender.
    """
    factory = _REGISTRY.get(name)
    if factory is None:
        known = ", ".join(sorted(_REGISTRY))
        raise NotFoundError(f"unknown system '{name}' (known: {known})")
    defaults = factory()
    overrides = dict(params or {})
    for key in overrides:
        if key not in defaults.params:
            raise ArgumentError(f"unknown parameter '{key}' for system '{name}'")
    merged = {**defaults.params, **overrides}
    if name == "diag-linear":
        return factory(merged["diag"])
    return factory(**merged)


def builtin_systems() -> list[SystemDef]:
    """All registered systems with their default parameters."""
    return [factory() for factory in _REGISTRY.values()]
