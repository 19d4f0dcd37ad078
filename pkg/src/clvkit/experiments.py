"""End-to-end transient runs, alignment diagnostics, and steering experiments.

A steering experiment nudges an orbit point by a tiny multiple of one of the
computed tangent vectors and integrates forward; if the vector has a positive
growth rate the perturbed orbit leaves the equilibrium along the matching
eigendirection, which the xy exit direction makes measurable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, NotFoundError, RadiusNotReachedError
from .ginelli import (
    BackwardRecord,
    ExponentEstimate,
    ForwardRecord,
    VectorField,
    backward_pass,
    canonicalize_signs,
    compose_vectors,
    forward_pass,
    lyapunov_exponents,
    seed_coefficients,
)
from .integrate import Trajectory, rk4_step
from .linalg import random_orthogonal
from .systems import make_system

Array = np.ndarray

DEFAULT_EXIT_RADIUS = 10.0
DEFAULT_MAX_STEPS = 2000


@dataclass
class RunConfig:
    """Parameters of one transient run. Defaults reproduce the reference run
    on the builtin 3D system: start high on the z axis, step 0.1, equilibrium
    reached by step 15000, backward burn-in to step 30000."""

    system: str = "paper3d"
    params: dict = field(default_factory=dict)
    u0: tuple = (0.0, 0.0, 1000.0)
    t0: float = 0.0
    dt: float = 0.1
    n1: int = 15000
    n2: int = 30000
    substeps: int = 1
    q0_mode: str = "identity"
    q0_seed: int = 0
    backward_seed: int = 0
    eq_tol: float = 1e-8
    alignment_tol: float = 0.999
    targets: Array | None = None


@dataclass
class AlignmentReport:
    """|cosine| between each vector column and its target, per step.

    ``aligned_from[j]`` is the first absolute step from which column j stays
    above ``tol`` through the end of the range (None if it never does);
    transient frame rotation can cross the threshold briefly much earlier,
    so a sustained window is the meaningful notion of "converged".
    """

    steps: Array
    cosines: Array
    tol: float
    aligned_from: list

    @property
    def final(self) -> Array:
        return self.cosines[-1]


@dataclass
class PerturbationSpec:
    """One steering experiment: nudge the orbit point at ``base_index`` by
    ``amplitude`` times vector column ``column`` (1-based, matching the
    v1..vn naming in output files). ``steps=None`` integrates until the xy
    radius exits or a cap is hit; ``amplitude=0`` is the control run."""

    base_index: int
    column: int
    amplitude: float = 1e-12
    steps: int | None = None


@dataclass
class TransientRun:
    record: ForwardRecord
    coefficients: BackwardRecord
    vectors: VectorField
    exponents: ExponentEstimate
    alignment: AlignmentReport | None


def run_transient_clv(cfg: RunConfig) -> TransientRun:
    """Forward sweep, backward pullback, vector composition, and diagnostics.

    Vectors are composed on [0, n1]; exponents are averaged over [n1, n2]
    where the orbit sits at the equilibrium. Alignment targets default to the
    coordinate axes for the builtin systems whose linearization is diagonal.
    """
    sys = make_system(cfg.system, cfg.params)
    if cfg.q0_mode == "identity":
        q0 = None
    elif cfg.q0_mode == "random":
        q0 = random_orthogonal(sys.dim, cfg.q0_seed)
    else:
        raise ArgumentError(f"q0_mode must be 'identity' or 'random', got '{cfg.q0_mode}'")

    rec = forward_pass(
        sys,
        cfg.u0,
        q0,
        cfg.dt,
        cfg.n1,
        cfg.n2,
        t0=cfg.t0,
        substeps=cfg.substeps,
        eq_tol=cfg.eq_tol,
    )
    brec = backward_pass(rec, seed_coefficients(sys.dim, cfg.backward_seed))
    vf = compose_vectors(rec, brec, 0, rec.n1)
    exponents = lyapunov_exponents(rec, (rec.n1, rec.n2))

    targets = cfg.targets
    if targets is None and cfg.system in ("paper3d", "diag-linear"):
        targets = np.eye(sys.dim)
    alignment = None
    if targets is not None:
        alignment = alignment_report(vf, targets, cfg.alignment_tol)

    return TransientRun(
        record=rec, coefficients=brec, vectors=vf, exponents=exponents, alignment=alignment
    )


def alignment_report(vf: VectorField, targets, tol: float) -> AlignmentReport:
    """Per-step |cosine| of each column against the matching target column."""
    T = np.asarray(targets, dtype=float)
    dim = vf.vectors.shape[-1]
    if T.shape != (dim, dim):
        raise ArgumentError(f"targets must be a ({dim}, {dim}) matrix of columns")
    norms = np.sqrt(np.einsum("ij,ij->j", T, T))
    if np.any(norms == 0.0):
        raise ArgumentError("targets must have nonzero columns")
    T = T / norms
    # cos[k, j] = |V_k[:, j] . T[:, j]|; vector columns are unit by construction.
    cosines = np.abs(np.einsum("kij,ij->kj", vf.vectors, T))
    aligned_from: list = []
    for j in range(dim):
        ok = cosines[:, j] >= tol
        below = np.nonzero(~ok)[0]
        if below.size == 0:
            aligned_from.append(int(vf.n_lo))
        elif below[-1] == len(ok) - 1:
            aligned_from.append(None)
        else:
            aligned_from.append(int(vf.n_lo + below[-1] + 1))
    return AlignmentReport(steps=vf.steps, cosines=cosines, tol=tol, aligned_from=aligned_from)


def find_orbit_point(rec: ForwardRecord, z_target: float) -> int:
    """Index of the orbit point whose last component is nearest ``z_target``.

    Requires the last component to be nonincreasing along the record (true
    for orbits descending the stable axis); the target must lie within the
    swept range.
    """
    z = rec.states[:, -1]
    if np.any(np.diff(z) > 0.0):
        raise ArgumentError("orbit's last component is not nonincreasing; cannot search it")
    lo, hi = float(z.min()), float(z.max())
    if not lo <= z_target <= hi:
        raise NotFoundError(f"z={z_target:g} outside the orbit's range [{lo:g}, {hi:g}]")
    return int(np.argmin(np.abs(z - z_target)))


def perturb_and_evolve(
    rec: ForwardRecord,
    vf: VectorField,
    spec: PerturbationSpec,
    *,
    exit_radius: float = DEFAULT_EXIT_RADIUS,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Trajectory:
    """Integrate from the perturbed point u_{n*} + s * v, same grid and step.

    The vector's sign is canonicalized first so the run does not depend on
    the backward seed. With ``spec.steps`` set the run has that exact length;
    otherwise it stops at the first step whose xy radius reaches
    ``exit_radius``, or after ``max_steps`` steps.
    """
    if not np.isfinite(spec.amplitude):
        raise ArgumentError(f"amplitude must be finite, got {spec.amplitude}")
    if not vf.n_lo <= spec.base_index <= vf.n_hi:
        raise ArgumentError(
            f"base index {spec.base_index} outside vector range [{vf.n_lo}, {vf.n_hi}]"
        )
    dim = rec.dim
    if not 1 <= spec.column <= dim:
        raise ArgumentError(f"column must be in 1..{dim}, got {spec.column}")
    if spec.steps is None and dim < 2:
        raise ArgumentError("exit-radius mode needs at least two components")
    if spec.steps is not None and spec.steps < 1:
        raise ArgumentError(f"steps must be >= 1, got {spec.steps}")

    sys = rec.system()
    _, V = vf.at(spec.base_index)
    v = canonicalize_signs(V)[:, spec.column - 1]
    u = rec.states[spec.base_index] + spec.amplitude * v

    h = rec.dt / rec.substeps
    limit = spec.steps if spec.steps is not None else max_steps
    rows = [u]
    for n in range(limit):
        t = rec.time_at(spec.base_index + n)
        for k in range(rec.substeps):
            u = rk4_step(sys, u, t + k * h, h)
        rows.append(u)
        if spec.steps is None and float(np.hypot(u[0], u[1])) >= exit_radius:
            break
    return Trajectory(t0=rec.t0, dt=rec.dt, states=np.array(rows), index0=spec.base_index)


def first_radius_crossing(traj: Trajectory, radius: float) -> int:
    """Index of the first sample whose xy radius reaches ``radius``."""
    if traj.states.shape[1] < 2:
        raise ArgumentError("trajectory needs at least two components")
    r = np.hypot(traj.states[:, 0], traj.states[:, 1])
    hits = np.nonzero(r >= radius)[0]
    if hits.size == 0:
        raise RadiusNotReachedError(
            f"xy radius never reached {radius:g}; maximum attained {float(r.max()):.6e}"
        )
    return int(hits[0])


def direction_test(traj: Trajectory, target, radius: float = 1.0) -> float:
    """|cosine| between the xy projection and ``target`` at the first crossing
    of ``radius``."""
    t = np.asarray(target, dtype=float)
    if t.shape != (2,) or not np.any(t):
        raise ArgumentError("target must be a nonzero 2-vector")
    k = first_radius_crossing(traj, radius)
    xy = traj.states[k, :2]
    return float(abs(xy @ t) / (np.hypot(xy[0], xy[1]) * np.hypot(t[0], t[1])))
