"""Two-pass tangent-vector computation along an orbit.

Forward pass: evolve an orthonormal frame with the tangent flow and
re-orthonormalize by QR after every grid interval, keeping the whole
(u_n, Q_n, R_n) history. Backward pass: pull a random upper-triangular
coefficient matrix back through the stored R factors, renormalizing its
columns each step. The composition V_n = Q_n C_n gives unit tangent vectors
at each orbit point; along an orbit that settles onto an equilibrium they
converge to the eigenvectors of the linearization there, ordered by growth
rate, and the running log of the R diagonals estimates those rates.

Columns are only guaranteed to separate when the growth rates are distinct;
repeated rates leave the corresponding columns mixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    DegenerateCoefficientError,
    DegenerateFrameError,
    NotConvergedError,
    NumericError,
    SingularSolveError,
)
from .integrate import rk4_tangent_step
from .linalg import is_orthogonal, is_upper_triangular, normalize_columns, qr_positive, solve_upper
from .systems import SystemDef, as_state, make_system

Array = np.ndarray

DEFAULT_EQUILIBRIUM_TOL = 1e-8


@dataclass
class ForwardRecord:
    """Full history of one forward sweep.

    ``states[n]`` and ``frames[n]`` hold u_n and Q_n for n = 0..n2;
    ``factors[n-1]`` holds R_n for n = 1..n2. ``n1`` marks the step by which
    the orbit has reached the equilibrium; ``n2 >> n1`` fixes how much extra
    history the backward pass gets to burn in. Immutable by convention once
    the sweep completes.
    """

    system_name: str
    params: dict
    t0: float
    dt: float
    substeps: int
    n1: int
    n2: int
    states: Array
    frames: Array
    factors: Array

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def time_at(self, n: int) -> float:
        return self.t0 + n * self.dt

    def factor(self, n: int) -> Array:
        """R_n for n in 1..n2."""
        if not 1 <= n <= self.n2:
            raise ArgumentError(f"factor index {n} outside 1..{self.n2}")
        return self.factors[n - 1]

    def system(self) -> SystemDef:
        return make_system(self.system_name, self.params)


@dataclass
class BackwardRecord:
    """Coefficient history of one backward sweep.

    ``coeffs[n]`` holds C_n for n = 0..n2; ``col_norms[m]`` holds the column
    norms divided out when C_m was produced from C_{m+1}. The reciprocal of
    ``col_norms[m][j]`` is the one-step growth factor of vector j at step m.
    """

    coeffs: Array
    col_norms: Array


@dataclass
class VectorField:
    """Unit tangent vectors V_n = Q_n C_n attached to orbit points.

    ``vectors[k][:, j]`` is vector j at absolute step n_lo + k.
    """

    n_lo: int
    n_hi: int
    t0: float
    dt: float
    base_points: Array
    vectors: Array

    @property
    def steps(self) -> Array:
        return np.arange(self.n_lo, self.n_hi + 1)

    @property
    def times(self) -> Array:
        return self.t0 + self.steps * self.dt

    def at(self, n: int) -> tuple[Array, Array]:
        """(orbit point, vector matrix) at absolute step n."""
        if not self.n_lo <= n <= self.n_hi:
            raise ArgumentError(f"step {n} outside [{self.n_lo}, {self.n_hi}]")
        k = n - self.n_lo
        return self.base_points[k], self.vectors[k]


@dataclass
class ExponentEstimate:
    """Growth-rate estimates from averaged logs of the R diagonals."""

    values: Array
    window: tuple[int, int]
    dt: float


def forward_pass(
    sys: SystemDef,
    u0,
    q0,
    dt: float,
    n1: int,
    n2: int,
    *,
    t0: float = 0.0,
    substeps: int = 1,
    eq_tol: float = DEFAULT_EQUILIBRIUM_TOL,
) -> ForwardRecord:
    """Sweep the tangent frame along the orbit, factoring by QR every step.

    ``q0`` is the initial orthonormal frame (None for the identity). The
    field norm at step ``n1`` must fall below ``eq_tol``; otherwise the tail
    of the record would not sit at the equilibrium and the run aborts with a
    diagnostic suggesting a larger ``n1``.
    """
    if not (isinstance(n1, (int, np.integer)) and isinstance(n2, (int, np.integer))):
        raise ArgumentError("n1 and n2 must be integers")
    if not 0 < n1 < n2:
        raise ArgumentError(f"need 0 < n1 < n2, got n1={n1}, n2={n2}")
    if dt <= 0.0:
        raise ArgumentError(f"dt must be positive, got {dt:g}")
    if substeps < 1:
        raise ArgumentError(f"substeps must be >= 1, got {substeps}")
    u = as_state(sys, u0)
    dim = sys.dim
    if q0 is None:
        Q = np.eye(dim)
    else:
        Q = np.asarray(q0, dtype=float)
        if Q.shape != (dim, dim) or not is_orthogonal(Q, 1e-10):
            raise ArgumentError("q0 must be an orthogonal matrix of the system dimension")

    states = np.empty((n2 + 1, dim))
    frames = np.empty((n2 + 1, dim, dim))
    factors = np.empty((n2, dim, dim))
    states[0] = u
    frames[0] = Q
    h = dt / substeps

    for n in range(n2):
        t = t0 + n * dt
        M = Q
        try:
            for k in range(substeps):
                u, M = rk4_tangent_step(sys, u, t + k * h, M, h)
            Q, R = qr_positive(M)
        except (NumericError, DegenerateFrameError) as exc:
            raise type(exc)(f"forward pass failed at step {n + 1}: {exc}") from exc
        states[n + 1] = u
        frames[n + 1] = Q
        factors[n] = R
        if n + 1 == n1:
            g_norm = float(np.max(np.abs(sys.field(u, t0 + n1 * dt))))
            if not g_norm < eq_tol:
                raise NotConvergedError(
                    f"|field|_inf = {g_norm:.3e} at step n1={n1} exceeds {eq_tol:.1e}; "
                    "the orbit has not reached the equilibrium, increase n1"
                )

    return ForwardRecord(
        system_name=sys.name,
        params=dict(sys.params),
        t0=t0,
        dt=dt,
        substeps=substeps,
        n1=int(n1),
        n2=int(n2),
        states=states,
        frames=frames,
        factors=factors,
    )


def seed_coefficients(dim: int, seed: int) -> Array:
    """Random upper-triangular coefficient matrix with unit columns.

    Entries above the diagonal are uniform on (-1, 1), diagonal entries
    uniform on (0.1, 1) so they stay strictly positive; columns are then
    normalized. Deterministic in ``seed``.
    """
    if dim < 1:
        raise ArgumentError(f"dimension must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    upper = rng.uniform(-1.0, 1.0, size=(dim, dim))
    diag = rng.uniform(0.1, 1.0, size=dim)
    C = np.triu(upper, k=1) + np.diag(diag)
    C, _ = normalize_columns(C)
    return C


def backward_pass(rec: ForwardRecord, c_end) -> BackwardRecord:
    """Pull the coefficient matrix back through the stored R factors.

    Iterates n = n2..1: solve R_n X = C_n, then renormalize the columns of X
    to get C_{n-1}, recording the divided-out norms. Each C_n stays upper
    triangular with unit columns.
    """
    dim = rec.dim
    C = np.asarray(c_end, dtype=float)
    if C.shape != (dim, dim):
        raise ArgumentError(f"coefficient matrix shape {C.shape} does not match dimension {dim}")
    if not is_upper_triangular(C):
        raise ArgumentError("coefficient matrix must be upper triangular")
    norms = np.sqrt(np.einsum("ij,ij->j", C, C))
    if np.max(np.abs(norms - 1.0)) > 1e-10:
        raise ArgumentError("coefficient matrix columns must have unit norm")

    coeffs = np.empty((rec.n2 + 1, dim, dim))
    col_norms = np.empty((rec.n2, dim))
    coeffs[rec.n2] = C
    for n in range(rec.n2, 0, -1):
        try:
            pulled = solve_upper(rec.factors[n - 1], C)
            C, d = normalize_columns(pulled)
        except (SingularSolveError, DegenerateCoefficientError) as exc:
            raise type(exc)(f"backward pass failed at step {n}: {exc}") from exc
        coeffs[n - 1] = C
        col_norms[n - 1] = d
    return BackwardRecord(coeffs=coeffs, col_norms=col_norms)


def compose_vectors(
    rec: ForwardRecord, brec: BackwardRecord, n_lo: int, n_hi: int
) -> VectorField:
    """Combine frames and coefficients into unit vectors on [n_lo, n_hi].

    The range must lie within [0, n1]: beyond n1 the coefficients still carry
    the random seed and the columns are not meaningful directions.
    """
    if not 0 <= n_lo <= n_hi <= rec.n1:
        raise ArgumentError(
            f"requested range [{n_lo}, {n_hi}] is not within [0, {rec.n1}]"
        )
    sl = slice(n_lo, n_hi + 1)
    vectors = rec.frames[sl] @ brec.coeffs[sl]
    return VectorField(
        n_lo=int(n_lo),
        n_hi=int(n_hi),
        t0=rec.t0,
        dt=rec.dt,
        base_points=rec.states[sl].copy(),
        vectors=vectors,
    )


def canonicalize_signs(vectors) -> Array:
    """Flip column signs so each column's largest-magnitude entry is positive.

    The vectors are only defined up to sign; this picks a deterministic
    representative. Accepts a single matrix or a batch with matrices in the
    last two axes.
    """
    V = np.array(vectors, dtype=float, copy=True)
    cols = np.swapaxes(V, -2, -1)
    lead_idx = np.argmax(np.abs(cols), axis=-1)
    lead = np.take_along_axis(cols, lead_idx[..., None], axis=-1)[..., 0]
    sign = np.where(lead < 0.0, -1.0, 1.0)
    return V * sign[..., None, :]


def lyapunov_exponents(rec: ForwardRecord, window: tuple[int, int]) -> ExponentEstimate:
    """Average log R diagonals over steps n_a+1..n_b, divided by the step.

    On a window where the orbit sits at the equilibrium this recovers the
    real parts of the eigenvalues of the linearization, in QR order.
    """
    n_a, n_b = int(window[0]), int(window[1])
    if not 0 <= n_a < n_b <= rec.n2:
        raise ArgumentError(f"window [{n_a}, {n_b}] is empty or outside [0, {rec.n2}]")
    diags = rec.factors[n_a:n_b].diagonal(axis1=1, axis2=2)
    values = np.log(diags).sum(axis=0) / ((n_b - n_a) * rec.dt)
    return ExponentEstimate(values=values, window=(n_a, n_b), dt=rec.dt)


def replay_residual(rec: ForwardRecord, n: int, sys: SystemDef | None = None) -> float:
    """Max abs deviation of Q_{n+1} R_{n+1} from the re-propagated frame at n.

    Re-runs the tangent step from the stored (u_n, Q_n) and compares against
    the stored factorization; a consistency check on the record.
    """
    if not 0 <= n < rec.n2:
        raise ArgumentError(f"step {n} outside 0..{rec.n2 - 1}")
    if sys is None:
        sys = rec.system()
    u = rec.states[n].copy()
    M = rec.frames[n].copy()
    h = rec.dt / rec.substeps
    t = rec.time_at(n)
    for k in range(rec.substeps):
        u, M = rk4_tangent_step(sys, u, t + k * h, M, h)
    recomposed = rec.frames[n + 1] @ rec.factors[n]
    return float(np.max(np.abs(recomposed - M)))
