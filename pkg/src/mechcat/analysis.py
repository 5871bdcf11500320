"""State diagnostics: fidelity, Wigner function, decoherence tracking.

Phase-space convention
----------------------
The Wigner function is the displaced-parity observable

    W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^+]
             = (2/pi) Tr[rho D(2 alpha) P],

evaluated on a grid in the coherent-amplitude plane (x = Re alpha,
p = Im alpha, cell area dx dp), so the vacuum origin value is 2/pi and
the cell sum times the cell area is 1 on a grid that encloses the
state. Grid values are computed with the exact Fock-dyad kernel via a
two-term recurrence (no FFT, exact at truncation level); the origin
value is just (2/pi) Tr[rho P].

The quantum non-Gaussianity witness restricts the Gaussian maps to
unitaries E(rho) = D(alpha) S(s) rho S(s)^+ D(alpha)^+ and evaluates

    NG = W[E(rho)](0) - (2/pi) exp[-2 <n_E> (<n_E> + 1)],

which is negative only for states outside the Gaussian convex hull.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionError
from .fock import DensityMatrix, HilbertSpace, coherent, displacement, squeeze

__all__ = [
    "GridSpec",
    "WignerGrid",
    "DecoherenceFit",
    "observables",
    "hs_fidelity",
    "wigner",
    "wigner_at_origin",
    "rho_app",
    "distance",
    "gamma_dec",
    "ng_witness",
    "ng_minimize",
    "fit_exponential_decay",
    "fit_decoherence_rate",
]

# default multi-start set for the witness search: origin, the reference
# displaced point, and its axis-rotated variants
NG_DEFAULT_STARTS = (
    (0.0, 0.0, 0.0),
    (0.0, 0.35, 0.01),
    (0.0, -0.35, 0.01),
    (0.35, 0.0, 0.01),
    (-0.35, 0.0, 0.01),
)


def _mat(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def observables(rho) -> dict[str, float]:
    """Mean excitation number, purity Tr[rho^2], parity <(-1)^n>."""
    m = _mat(rho)
    diag = np.diag(m).real
    n = np.arange(len(diag))
    return {
        "mean_phonon": float(diag @ n),
        "purity": float(np.vdot(m, m).real),
        "parity": float(diag @ (-1.0) ** n),
    }


def hs_fidelity(rho0, rho1) -> float:
    """Hilbert-Schmidt fidelity |Tr[rho0 rho1]| / sqrt(Tr rho0^2 Tr rho1^2)."""
    a, b = _mat(rho0), _mat(rho1)
    if a.shape != b.shape:
        raise DimensionError(f"state shapes differ: {a.shape} vs {b.shape}")
    pa = np.vdot(a, a).real
    pb = np.vdot(b, b).real
    if pa <= 0.0 or pb <= 0.0:
        raise ValueError("hs_fidelity needs nonzero-purity inputs")
    overlap = abs(np.einsum("ij,ji->", a, b))
    return float(min(overlap / np.sqrt(pa * pb), 1.0))


def distance(rho, rho_ref) -> float:
    """D = 1 - F(rho, rho_ref); zero iff the states are proportional."""
    return 1.0 - hs_fidelity(rho, rho_ref)


@dataclass(frozen=True)
class GridSpec:
    """Phase-space grid in the coherent-amplitude plane."""

    x_range: tuple[float, float] = (-5.0, 5.0)
    p_range: tuple[float, float] = (-5.0, 5.0)
    nx: int = 201
    n_p: int = 201

    def __post_init__(self):
        if self.nx < 2 or self.n_p < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if self.x_range[1] <= self.x_range[0] or self.p_range[1] <= self.p_range[0]:
            raise ValueError("grid ranges must be increasing")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(*self.p_range, self.n_p)

    @property
    def cell_area(self) -> float:
        return float(
            (self.x_range[1] - self.x_range[0])
            / (self.nx - 1)
            * (self.p_range[1] - self.p_range[0])
            / (self.n_p - 1)
        )


@dataclass(frozen=True)
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (nx, n_p), real
    cell_area: float

    @property
    def normalization(self) -> float:
        return float(self.values.sum() * self.cell_area)


def _wigner_dyad_sum(m: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Sum rho_mn over exact Fock-dyad Wigner kernels on grid points a.

    Two-term recurrences in the dyad indices; returns values scaled so
    the vacuum origin is 2/pi.
    """
    dim = m.shape[0]
    rows = np.empty((dim,) + a.shape, complex)  # rows[n] = kernel of |current m><n|
    rows[0] = np.exp(-2.0 * np.abs(a) ** 2) / np.pi
    w = m[0, 0].real * rows[0].real
    for n in range(1, dim):
        rows[n] = rows[n - 1] * (2.0 * a) / np.sqrt(n)
        w += 2.0 * (m[0, n] * rows[n]).real
    for row in range(1, dim):
        prev_diag = rows[row].copy()
        rows[row] = (2.0 * a.conj() * prev_diag - np.sqrt(row) * rows[row - 1]) / np.sqrt(row)
        w += (m[row, row] * rows[row]).real
        for n in range(row + 1, dim):
            next_row = (2.0 * a * rows[n - 1] - np.sqrt(row) * prev_diag) / np.sqrt(n)
            prev_diag = rows[n].copy()
            rows[n] = next_row
            w += 2.0 * (m[row, n] * rows[n]).real
    return 2.0 * w


def wigner(rho, grid: GridSpec | None = None) -> WignerGrid:
    """Wigner function on a phase-space grid (see module docstring).

    Warns instead of failing when the grid does not enclose the state's
    support (cell-sum normalization off by more than 1e-3).
    """
    grid = grid or GridSpec()
    m = _mat(rho)
    if m.shape[0] * grid.nx * grid.n_p > 4e7:
        raise DimensionError("wigner grid workspace too large; reduce grid or dim")
    a = grid.x[:, None] + 1j * grid.p[None, :]
    values = _wigner_dyad_sum(m, a)
    out = WignerGrid(grid.x.copy(), grid.p.copy(), values, grid.cell_area)
    if abs(out.normalization - 1.0) > 1e-3:
        warnings.warn(
            f"wigner grid normalization {out.normalization:.6f}; grid may not "
            "enclose the state support, normalization check skipped",
            stacklevel=2,
        )
    return out


def wigner_at_origin(rho) -> float:
    """W(0) = (2/pi) <parity>, computed without any grid."""
    diag = np.diag(_mat(rho)).real
    return float(2.0 / np.pi * (diag @ (-1.0) ** np.arange(len(diag))))


def gamma_dec(beta: complex, n_bar: float, gamma_m: float) -> float:
    """Thermal decoherence rate of the cat coherences, 2 gm |beta|^2 (2nb+1)."""
    return 2.0 * gamma_m * abs(beta) ** 2 * (2.0 * n_bar + 1.0)


def rho_app(
    t: float, t0: float, beta: complex, n_bar: float, gamma_m: float, dim: int
) -> DensityMatrix:
    """Analytic decohering-cat state for t >= t0.

    Coherent dyads |+-beta><+-beta| plus cross terms suppressed by
    exp(-gamma_dec (t - t0)) with gamma_dec = 2 gamma_m |beta|^2 (2 n_bar + 1),
    normalized by N(t) = 2 [1 + e^{-2|beta|^2} e^{-gamma_dec (t-t0)}] so the
    trace is exactly 1. Starts as the pure even cat at t = t0 and tends
    to the equal mixture of |beta> and |-beta>.
    """
    if t < t0:
        raise ValueError(f"rho_app defined for t >= t0, got t = {t} < t0 = {t0}")
    lam = float(np.exp(-gamma_dec(beta, n_bar, gamma_m) * (t - t0)))
    kp = coherent(beta, dim).amplitudes
    km = coherent(-beta, dim).amplitudes
    cross = np.outer(kp, km.conj())
    m = np.outer(kp, kp.conj()) + np.outer(km, km.conj()) + lam * (cross + cross.conj().T)
    norm = 2.0 * (1.0 + np.exp(-2.0 * abs(beta) ** 2) * lam)
    return DensityMatrix(HilbertSpace((dim,)), m / norm)


@lru_cache(maxsize=64)
def _gaussian_map(dim: int, alpha: complex, s: complex) -> np.ndarray:
    return displacement(alpha, dim).matrix @ squeeze(s, dim).matrix


def _ng_value(m: np.ndarray, alpha: complex, s: complex) -> tuple[float, float]:
    """Witness value plus the transformed state's truncation-edge mass."""
    dim = m.shape[0]
    g = _gaussian_map(dim, complex(alpha), complex(s))
    em = g @ m @ g.conj().T
    diag = np.diag(em).real
    top = max(1, dim // 10)
    edge = float(diag[-top:].sum())
    n_e = float(diag @ np.arange(dim))
    w0 = float(2.0 / np.pi * (diag @ (-1.0) ** np.arange(dim)))
    return w0 - 2.0 / np.pi * float(np.exp(-2.0 * n_e * (n_e + 1.0))), edge


def ng_witness(rho, alpha: complex, s: complex) -> float:
    """NG = W[E(rho)](0) - (2/pi) exp[-2 <n_E>(<n_E>+1)] for the Gaussian
    unitary E(rho) = D(alpha) S(s) rho S(s)^+ D(alpha)^+.

    NG < 0 certifies quantum non-Gaussianity; NG >= 0 is inconclusive.
    """
    value, edge = _ng_value(_mat(rho), alpha, s)
    if edge > 1e-8:
        warnings.warn(
            f"transformed state has {edge:.2e} population near the truncation "
            "edge; witness value may be truncation-limited",
            stacklevel=2,
        )
    return value


_NG_EDGE_LIMIT = 1e-6


def ng_minimize(rho, starts=NG_DEFAULT_STARTS):
    """Minimize the witness over (Re alpha, Im alpha, s), s real.

    Derivative-free simplex search from each start; deterministic for a
    fixed start set. Map parameters that push the transformed state
    into the truncation edge are rejected with a growing penalty, so
    the reported minimum always comes from numerically valid territory.
    Returns (ng_min, alpha, s) for the best point seen.
    """
    m = _mat(rho)

    def objective(x):
        value, edge = _ng_value(m, complex(x[0], x[1]), complex(x[2]))
        if edge > _NG_EDGE_LIMIT:
            return 1.0 + edge
        return value

    best = (np.inf, 0.0 + 0.0j, 0.0 + 0.0j)
    for start in starts:
        res = minimize(
            objective,
            np.asarray(start, dtype=float),
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-13, "maxiter": 2000},
        )
        candidates = [(float(res.fun), np.asarray(res.x)), (objective(start), np.asarray(start))]
        for val, x in candidates:
            if val < best[0]:
                best = (val, complex(x[0], x[1]), complex(x[2]))
    return best


@dataclass(frozen=True)
class DecoherenceFit:
    rate: float       # rad/s
    amplitude: float  # fitted value at t = 0
    residual: float   # RMS of log-domain residuals
    window: tuple[float, float]


def fit_exponential_decay(times, values, window: tuple[float, float]) -> DecoherenceFit:
    """Log-linear least squares of values ~ A exp(-rate t) inside window.

    Requires >= 8 strictly positive samples and a positive fitted rate.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    t, y = times[mask], values[mask]
    if len(t) < 8:
        raise ValueError(f"need >= 8 samples in window, got {len(t)}")
    if np.any(y <= 0.0):
        raise ValueError("signal must be strictly positive inside the fit window")
    slope, intercept = np.polyfit(t, np.log(y), 1)
    if slope >= 0.0:
        raise ValueError(f"signal is not decaying (fitted rate {-slope:.3e})")
    resid = float(np.sqrt(np.mean((np.log(y) - (intercept + slope * t)) ** 2)))
    return DecoherenceFit(float(-slope), float(np.exp(intercept)), resid, (float(lo), float(hi)))


_SIGNAL_COLUMNS = {"ng": "ng_fixed", "cat_coherence": "cat_coherence"}


def fit_decoherence_rate(trajectory, signal: str, window: tuple[float, float]) -> DecoherenceFit:
    """Fit the decay rate of a recorded trajectory signal.

    ``signal`` is ``"ng"`` (uses the negated fixed-parameter witness
    record) or ``"cat_coherence"`` (|<beta|rho|-beta>| record).
    """
    try:
        column = _SIGNAL_COLUMNS[signal]
    except KeyError:
        raise ValueError(f"unknown signal {signal!r}; use one of {sorted(_SIGNAL_COLUMNS)}")
    if column not in trajectory.records:
        raise KeyError(f"trajectory has no {column!r} record")
    y = np.real(trajectory.records[column])
    if signal == "ng":
        y = -y
    return fit_exponential_decay(trajectory.times, y, window)
