"""Lindblad master-equation right-hand sides and time integration.

The dissipator follows the convention used throughout this package,

    D(C) rho = 2 C rho C^+ - C^+ C rho - rho C^+ C,

i.e. the factor 2 lives inside D and rates multiply D exactly as they
appear in the master equations being modeled. hbar is set to 1: the
Hamiltonian is stored in angular-frequency units (rad/s) and enters the
generator as -i [H, rho]. Times are seconds, rates rad/s.

Two integration methods are provided:

* ``rk45`` (default): an embedded Dormand-Prince 5(4) pair with PI step
  control, operating directly on the density matrix. Trace and
  hermiticity are preserved structurally (every stage evaluates a
  traceless, hermiticity-preserving RHS), so drift is at roundoff level.
* ``expm``: exact stepping ``rho -> exp(L dt) rho`` with the dense
  superoperator matrix, for long horizons where explicit stepping would
  be stability-limited. Guarded to total_dim <= 48 (dim^4 memory).

``liouvillian_matrix`` exposes the dense superoperator for small spaces
(total_dim <= 8) as an independent oracle for the integrator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm as _expm

from .errors import DimensionError, IntegrationError
from .fock import DensityMatrix, Operator

__all__ = [
    "LindbladTerm",
    "LindbladModel",
    "IntegratorConfig",
    "Trajectory",
    "dissipator",
    "rhs",
    "evolve",
    "liouvillian_matrix",
]

HAMILTONIAN_HERMITICITY_TOL = 1e-10
ORACLE_MAX_DIM = 8      # liouvillian_matrix guard: dim^4 entries
EXPM_MAX_DIM = 48       # dense-superoperator propagator guard
_SPARSE_MIN_DIM = 64    # prepared RHS switches to sparse ops above this
_AUTO_STEP_LIMIT = 20_000


@dataclass(frozen=True)
class LindbladTerm:
    """One dissipative channel: rate (rad/s) times D(collapse)."""

    rate: float
    collapse: Operator

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0.0:
            raise ValueError(f"dissipator rate must be finite and >= 0, got {self.rate}")


@dataclass(frozen=True)
class LindbladModel:
    """Hermitian Hamiltonian (units of rad/s) plus dissipator terms."""

    hamiltonian: Operator
    terms: tuple[LindbladTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        h = self.hamiltonian.matrix
        herm = np.abs(h - h.conj().T).max()
        if herm > HAMILTONIAN_HERMITICITY_TOL:
            raise ValueError(f"Hamiltonian not hermitian: max |H - H^+| = {herm:.3e}")
        for t in self.terms:
            if t.collapse.space.mode_dims != self.hamiltonian.space.mode_dims:
                raise DimensionError("collapse operator space differs from Hamiltonian space")

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = np.inf
    min_step: float = 0.0
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.min_step > self.max_step:
            raise ValueError("min_step exceeds max_step")


@dataclass
class Trajectory:
    """Time grid, per-time observable records, optional state snapshots."""

    times: np.ndarray
    records: dict[str, np.ndarray]
    snapshots: list[tuple[float, DensityMatrix]]
    stats: dict

    def snapshot_at(self, t: float) -> DensityMatrix:
        for ts, rho in self.snapshots:
            if abs(ts - t) <= 1e-12 * max(1.0, abs(t)):
                return rho
        raise KeyError(f"no snapshot stored at t = {t}")


def _as_matrix(x) -> np.ndarray:
    return x.matrix if hasattr(x, "matrix") else np.asarray(x, dtype=complex)


def dissipator(collapse, rho) -> np.ndarray:
    """2 C rho C^+ - C^+ C rho - rho C^+ C (factor 2 inside)."""
    c = _as_matrix(collapse)
    r = _as_matrix(rho)
    if c.shape != r.shape:
        raise DimensionError(f"collapse {c.shape} vs state {r.shape}")
    cd = c.conj().T
    cdc = cd @ c
    return 2.0 * (c @ r @ cd) - cdc @ r - r @ cdc


class _PreparedRhs:
    """Precomputed evaluator for the master-equation right-hand side.

    rhs(rho) = A rho + rho A^+ + sum_k 2 r_k C_k rho C_k^+   with
    A = -iH - sum_k r_k C_k^+ C_k.

    For large sparse models (bipartite cavity x mechanics) the products
    run through scipy.sparse, which is several times faster than dense
    BLAS on these nearly-banded operators.
    """

    def __init__(self, model: LindbladModel):
        dim = model.dim
        a = -1j * model.hamiltonian.matrix.astype(complex)
        pairs = []
        for term in model.terms:
            c = term.collapse.matrix
            a = a - term.rate * (c.conj().T @ c)
            if term.rate > 0.0:
                pairs.append((2.0 * term.rate, c))
        self.dim = dim
        self.drift = a
        self.drift_dag = a.conj().T
        self.pairs = [(w, c, c.conj().T) for w, c in pairs]
        # bound on the stiffest decay scale, used for step heuristics
        # and for naming the limiting rate on failure
        self.rate_scale = 2.0 * float(np.abs(a).sum(axis=1).max())
        nnz = np.count_nonzero(a) + sum(np.count_nonzero(c) for _, c in pairs)
        total = dim * dim * (1 + len(pairs))
        self._sparse = dim >= _SPARSE_MIN_DIM and nnz < 0.05 * total
        if self._sparse:
            # X A^+ = (conj(A) X^T)^T, so right factors are stored
            # conjugated and applied through plain transpose views
            self._drift_sp = sp.csr_matrix(a)
            self._drift_conj_sp = sp.csr_matrix(a.conj())
            self._pairs_sp = [(w, sp.csr_matrix(c), sp.csr_matrix(c.conj())) for w, c in pairs]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if self._sparse:
            out = self._drift_sp @ rho
            out += (self._drift_conj_sp @ rho.T).T
            for w, c, c_conj in self._pairs_sp:
                m1 = c @ rho
                out += w * (c_conj @ m1.T).T
            return out
        out = self.drift @ rho
        out += rho @ self.drift_dag
        for w, c, cd in self.pairs:
            out += w * ((c @ rho) @ cd)
        return out


def rhs(model: LindbladModel, rho) -> np.ndarray:
    """-i[H, rho] + sum_k rate_k D(C_k) rho."""
    r = _as_matrix(rho)
    if r.shape != (model.dim, model.dim):
        raise DimensionError(f"state shape {r.shape} does not match model dim {model.dim}")
    return _PreparedRhs(model)(r)


def _superoperator(model: LindbladModel) -> np.ndarray:
    """Dense matrix L with vec(rhs(rho)) = L vec(rho), row-major vec."""
    d = model.dim
    eye = np.eye(d, dtype=complex)
    h = model.hamiltonian.matrix
    lmat = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for term in model.terms:
        c = term.collapse.matrix
        cdc = c.conj().T @ c
        lmat += term.rate * (
            2.0 * np.kron(c, c.conj()) - np.kron(cdc, eye) - np.kron(eye, cdc.T)
        )
    return lmat


def liouvillian_matrix(model: LindbladModel) -> np.ndarray:
    """Dense superoperator oracle; guarded to total_dim <= 8 (dim^4 entries)."""
    if model.dim > ORACLE_MAX_DIM:
        raise DimensionError(
            f"liouvillian_matrix supports total_dim <= {ORACLE_MAX_DIM}, got {model.dim}"
        )
    return _superoperator(model)


# Dormand-Prince 5(4) tableau (FSAL: stage 7 is the next step's stage 1).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = _DP_B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, rtol, atol) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, max_step):
    # Hairer-Norsett-Wanner starting step heuristic
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean(np.abs(y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(y1)
    d2 = float(np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


class _GridRecorder:
    """Collects observer records and snapshots along the time grid."""

    def __init__(self, t_grid, observers, snapshot_times, space):
        self.t_grid = t_grid
        self.observers = observers or {}
        self.snapshot_times = list(snapshot_times)
        self.space = space
        self.records = {name: [] for name in self.observers}
        self.snapshots = []
        self.max_trace_err = 0.0
        self.max_herm_err = 0.0

    def record(self, t, rho):
        self.max_trace_err = max(self.max_trace_err, abs(rho.trace().real - 1.0))
        self.max_herm_err = max(self.max_herm_err, float(np.abs(rho - rho.conj().T).max()))
        for name, fn in self.observers.items():
            self.records[name].append(fn(t, rho))
        if any(abs(t - ts) <= 1e-12 * max(1.0, abs(ts)) for ts in self.snapshot_times):
            self.snapshots.append((t, DensityMatrix(self.space, rho.copy())))

    def finish(self, times, stats) -> Trajectory:
        stats = dict(stats)
        stats["max_trace_err"] = self.max_trace_err
        stats["max_herm_err"] = self.max_herm_err
        records = {k: np.asarray(v) for k, v in self.records.items()}
        return Trajectory(np.asarray(times, dtype=float), records, self.snapshots, stats)


def _evolve_rk45(prepared, rho0_mat, t_grid, config, recorder):
    rtol, atol = config.rtol, config.atol
    f = prepared
    t = float(t_grid[0])
    y = rho0_mat.astype(complex).copy()
    recorder.record(t, y)

    k = [None] * 7
    k[0] = f(y)
    h = _initial_step(f, t, y, k[0], rtol, atol, config.max_step)
    err_old = 1e-4
    n_steps = n_rejected = 0
    eps_floor = 16.0 * np.finfo(float).eps

    for t_next in t_grid[1:]:
        t_next = float(t_next)
        while t < t_next * (1.0 - 1e-14):
            h = min(h, config.max_step, t_next - t)
            floor = max(config.min_step, eps_floor * max(abs(t), 1.0))
            if h < floor:
                raise IntegrationError(
                    f"step size underflow at t = {t:.6e} s (h = {h:.3e}); "
                    f"limiting decay scale ~ {prepared.rate_scale:.3e} rad/s"
                )
            for i in range(1, 7):
                yi = y + h * sum(aij * k[j] for j, aij in enumerate(_DP_A[i]))
                k[i] = f(yi)
            y_new = y + h * sum(b * k[j] for j, b in enumerate(_DP_B5) if b != 0.0)
            err_mat = h * sum(e * k[j] for j, e in enumerate(_DP_ERR) if e != 0.0)
            err = _error_norm(err_mat, y, y_new, rtol, atol)
            if err <= 1.0:
                t = t_next if abs(t + h - t_next) <= 1e-14 * max(abs(t_next), 1.0) else t + h
                y = y_new
                k[0] = k[6]  # FSAL
                fac = 0.9 * (err + 1e-30) ** -0.17 * err_old**0.04
                h *= min(10.0, max(0.2, fac))
                err_old = max(err, 1e-4)
                n_steps += 1
            else:
                h *= max(0.2, 0.9 * err**-0.2)
                n_rejected += 1
        t = t_next
        recorder.record(t, y)

    return recorder.finish(t_grid, {"method": "rk45", "steps": n_steps, "rejected": n_rejected})


def _evolve_expm(model, prepared, rho0_mat, t_grid, recorder):
    dim = model.dim
    if dim > EXPM_MAX_DIM:
        raise DimensionError(
            f"expm propagator supports total_dim <= {EXPM_MAX_DIM}, got {dim} "
            "(superoperator would need dim^4 entries)"
        )
    lmat = _superoperator(model)
    t_grid = np.asarray(t_grid, dtype=float)
    gaps = np.diff(t_grid)
    # cache one matrix exponential per distinct grid spacing
    keys = (np.round(gaps / gaps.max(), 12) * 10**12).astype(np.int64)
    propagators: dict[int, np.ndarray] = {}
    v = rho0_mat.astype(complex).reshape(-1).copy()
    recorder.record(float(t_grid[0]), v.reshape(dim, dim))
    for i, (gap, key) in enumerate(zip(gaps, keys)):
        prop = propagators.get(key)
        if prop is None:
            prop = propagators[key] = _expm(lmat * gap)
        v = prop @ v
        recorder.record(float(t_grid[i + 1]), v.reshape(dim, dim))
    return recorder.finish(
        t_grid, {"method": "expm", "steps": len(gaps), "expm_calls": len(propagators)}
    )


def evolve(
    model: LindbladModel,
    rho0: DensityMatrix,
    t_grid,
    config: IntegratorConfig | None = None,
    observers: dict | None = None,
    method: str = "auto",
) -> Trajectory:
    """Integrate d rho/dt = rhs(model, rho) over an increasing time grid.

    Records every observer at every grid time and stores full validated
    DensityMatrix snapshots at ``config.snapshot_times`` (which must lie
    on the grid). ``method`` is ``rk45``, ``expm`` or ``auto`` (rk45
    unless the horizon is so stiff that explicit stepping would need
    more than ~20k steps and the dense propagator fits in memory).
    """
    config = config or IntegratorConfig()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be 1-D and strictly increasing with >= 2 points")
    if rho0.space.mode_dims != model.hamiltonian.space.mode_dims:
        raise DimensionError("initial state space differs from model space")
    for ts in config.snapshot_times:
        if not np.any(np.abs(t_grid - ts) <= 1e-12 * np.maximum(1.0, abs(ts))):
            raise ValueError(f"snapshot time {ts} is not on the integration grid")

    prepared = _PreparedRhs(model)
    if method == "auto":
        est_steps = prepared.rate_scale * (t_grid[-1] - t_grid[0]) / 3.0
        method = "expm" if (est_steps > _AUTO_STEP_LIMIT and model.dim <= EXPM_MAX_DIM) else "rk45"

    recorder = _GridRecorder(t_grid, observers, config.snapshot_times, rho0.space)
    if method == "rk45":
        traj = _evolve_rk45(prepared, rho0.matrix, t_grid, config, recorder)
    elif method == "expm":
        traj = _evolve_expm(model, prepared, rho0.matrix, t_grid, recorder)
    else:
        raise ValueError(f"unknown integration method {method!r}")

    if traj.stats["max_trace_err"] > 1e-8:
        warnings.warn(
            f"trace drift {traj.stats['max_trace_err']:.2e} exceeded 1e-8", stacklevel=2
        )
    return traj
