"""Fixed-step classical Runge-Kutta propagation of states and tangent frames.

The tangent frame M obeys dM/dt = J(u, t) M along the orbit; one augmented
step advances (u, M) together with the Jacobian evaluated at every stage
state, which keeps the matrix update fourth order. The state arithmetic in
:func:`rk4_tangent_step` mirrors :func:`rk4_step` expression by expression so
that the propagated orbit is bit-identical whether or not a frame rides along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError
from .systems import SystemDef, as_state, fd_jacobian

Array = np.ndarray


@dataclass
class Trajectory:
    """States sampled on the uniform grid t = t0 + (index0 + k) dt.

    ``index0`` anchors the trajectory on the grid of a longer parent orbit so
    segments cut from it reproduce the parent's time column exactly.
    """

    t0: float
    dt: float
    states: Array
    index0: int = 0

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=float)
        if self.dt <= 0.0:
            raise ArgumentError(f"dt must be positive, got {self.dt:g}")
        if self.states.ndim != 2 or self.states.shape[0] < 1:
            raise ArgumentError("states must be a nonempty (steps+1, dim) array")

    @property
    def times(self) -> Array:
        return self.t0 + (self.index0 + np.arange(self.states.shape[0])) * self.dt


def _jacobian_fn(sys: SystemDef):
    if sys.jacobian is not None:
        return sys.jacobian
    return lambda u, t: fd_jacobian(sys, u, t)


def rk4_step(sys: SystemDef, u: Array, t: float, dt: float) -> Array:
    """One classical fourth-order Runge-Kutta step of du/dt = g(u, t)."""
    if dt <= 0.0:
        raise ArgumentError(f"dt must be positive, got {dt:g}")
    f = sys.field
    half = 0.5 * dt
    k1 = f(u, t)
    _require_finite(k1, "k1", sys.name, t)
    k2 = f(u + half * k1, t + half)
    _require_finite(k2, "k2", sys.name, t)
    k3 = f(u + half * k2, t + half)
    _require_finite(k3, "k3", sys.name, t)
    k4 = f(u + dt * k3, t + dt)
    _require_finite(k4, "k4", sys.name, t)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_tangent_step(
    sys: SystemDef, u: Array, t: float, M: Array, dt: float
) -> tuple[Array, Array]:
    """One RK4 step of the augmented system (du/dt, dM/dt) = (g, J M).

    Returns the pair at t + dt. The Jacobian is re-evaluated at each stage
    state, not frozen at u.
    """
    if dt <= 0.0:
        raise ArgumentError(f"dt must be positive, got {dt:g}")
    f = sys.field
    jac = _jacobian_fn(sys)
    half = 0.5 * dt

    k1 = f(u, t)
    _require_finite(k1, "k1", sys.name, t)
    K1 = jac(u, t) @ M
    u2 = u + half * k1
    M2 = M + half * K1
    k2 = f(u2, t + half)
    _require_finite(k2, "k2", sys.name, t)
    K2 = jac(u2, t + half) @ M2
    u3 = u + half * k2
    M3 = M + half * K2
    k3 = f(u3, t + half)
    _require_finite(k3, "k3", sys.name, t)
    K3 = jac(u3, t + half) @ M3
    u4 = u + dt * k3
    M4 = M + dt * K3
    k4 = f(u4, t + dt)
    _require_finite(k4, "k4", sys.name, t)
    K4 = jac(u4, t + dt) @ M4

    u_next = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    M_next = M + (dt / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
    if not np.all(np.isfinite(M_next)):
        raise NumericError(f"non-finite tangent frame for '{sys.name}' after step at t={t:g}")
    return u_next, M_next


def integrate_orbit(
    sys: SystemDef, u0, t0: float, dt: float, steps: int, substeps: int = 1
) -> Trajectory:
    """Propagate an orbit for ``steps`` grid intervals of width ``dt``.

    ``substeps`` splits each interval into that many RK4 steps; only the grid
    points are recorded.
    """
    if steps < 1:
        raise ArgumentError(f"steps must be >= 1, got {steps}")
    if substeps < 1:
        raise ArgumentError(f"substeps must be >= 1, got {substeps}")
    u = as_state(sys, u0)
    h = dt / substeps
    out = np.empty((steps + 1, sys.dim))
    out[0] = u
    for n in range(steps):
        t = t0 + n * dt
        try:
            for k in range(substeps):
                u = rk4_step(sys, u, t + k * h, h)
        except NumericError as exc:
            raise NumericError(f"integration failed at step {n + 1}: {exc}") from exc
        out[n + 1] = u
    return Trajectory(t0=t0, dt=dt, states=out)


def _require_finite(k: Array, stage: str, name: str, t: float) -> None:
    if not np.all(np.isfinite(k)):
        raise NumericError(f"non-finite RK4 stage {stage} for '{name}' at t={t:g}")
