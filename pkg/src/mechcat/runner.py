"""Reproducible experiment driver.

A RunConfig declares everything about a run: physical parameters, model
flavor (reduced mechanical or bipartite cavity x mechanics), initial
state, integration stages (each with its own time span, sampling step,
mechanical truncation and integrator method), observable columns,
snapshot times and optional Wigner grids.

``run`` writes, per run directory:

* ``manifest.json``  - all physical/derived parameters, conventions,
  code version, config hash and validity warnings; written before
  integration starts.
* ``timeseries.csv`` - one row per grid time; a ``# config=<hash>``
  comment line, a header row, then values printed with 17 significant
  digits. Columns: t_seconds, fidelity_target, purity, mean_phonon,
  parity, distance_rho_app and optionally ng_fixed / ng_min.
* ``wigner_t<k>.csv`` - one file per requested snapshot: three comment
  lines (grid spec, time, config hash) then nx*np rows of "x,p,w".

Outputs are deterministic: identical config and code version give
byte-identical files (no randomness, fixed multi-starts, fixed float
formatting).

``sweep`` runs a cartesian product of axis overrides over a template
config and writes a summary table (one row per run: engineered rate,
cat amplitude, thermal occupation, fidelity peak, fitted decoherence
rate, reference gamma_dec) plus a report of failed grid points.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    GridSpec,
    _ng_value,
    fit_exponential_decay,
    gamma_dec,
    hs_fidelity,
    wigner,
)
from .errors import ConfigError
from .fock import coherent, tensor, truncated
from .lindblad import IntegratorConfig, Trajectory, evolve
from .protocol import (
    DerivedParams,
    InitialStateKind,
    PhysicalParams,
    build_bipartite_model,
    build_reduced_model,
    derive_params,
    initial_state,
    target_state,
)

__all__ = ["StageSpec", "RunConfig", "RunResult", "run", "sweep", "config_hash"]

CSV_COLUMN_ORDER = (
    "fidelity_target",
    "purity",
    "mean_phonon",
    "parity",
    "distance_rho_app",
    "ng_fixed",
    "ng_min",
)
DEFAULT_OBSERVABLES = CSV_COLUMN_ORDER[:5]
NG_REFERENCE_POINT = (0.35j, 0.01 + 0j)

CONVENTIONS = {
    "hbar": "1 internally; Hamiltonians stored in angular-frequency units (rad/s)",
    "dissipator": "D(C) rho = 2 C rho C+ - C+ C rho - rho C+ C; rates applied as printed",
    "tensor_order": "cavity (x) mechanics",
    "beta_phase": "principal complex square root of e1 / (i g2 alpha_s)",
    "wigner": "coherent-amplitude plane (x = Re alpha, p = Im alpha); "
    "W(alpha) = (2/pi) Tr[rho D(2 alpha) P]; cell area dx*dp",
    "time_units": "seconds on all grids and columns; rates rad/s",
}


@dataclass(frozen=True)
class StageSpec:
    """One integration stage: evolve to t_end sampling every dt."""

    t_end: float
    dt: float
    mech_dim: int
    method: str = "auto"

    def __post_init__(self):
        if self.t_end <= 0 or self.dt <= 0:
            raise ConfigError("stage t_end and dt must be positive")
        if self.mech_dim < 2:
            raise ConfigError("stage mech_dim must be >= 2")


@dataclass(frozen=True)
class RunConfig:
    name: str
    params: PhysicalParams
    stages: tuple[StageSpec, ...]
    mode: str = "paper"
    model: str = "reduced"  # "reduced" | "bipartite"
    init: str = "ground"    # "ground" | "cooled" | "thermal"
    init_n_bar: float | None = None  # defaults to params occupation
    cavity_dim: int = 4
    snapshot_times: tuple[float, ...] = ()
    observables: tuple[str, ...] = DEFAULT_OBSERVABLES
    wigner_enabled: bool = False
    wigner_grid: GridSpec = GridSpec()
    t0_app: float | None = None  # decohering-cat reference start, default 1/Gamma
    rtol: float = 1e-8
    atol: float = 1e-10
    jobs: int = 1
    description: str = ""

    def __post_init__(self):
        if self.model not in ("reduced", "bipartite"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.init not in ("ground", "cooled", "thermal"):
            raise ConfigError(f"unknown init {self.init!r}")
        if not self.stages:
            raise ConfigError("need at least one integration stage")
        ends = [s.t_end for s in self.stages]
        if any(b <= a for a, b in zip(ends, ends[1:])):
            raise ConfigError("stage end times must be strictly increasing")
        if self.model == "bipartite" and len(self.stages) > 1:
            raise ConfigError("bipartite runs support a single stage")
        unknown = set(self.observables) - set(CSV_COLUMN_ORDER)
        if unknown:
            raise ConfigError(f"unknown observables {sorted(unknown)}")

    @property
    def t_max(self) -> float:
        return self.stages[-1].t_end


@dataclass
class RunResult:
    config: RunConfig
    out_dir: Path
    derived: DerivedParams
    trajectory: Trajectory
    summary: dict
    timeseries_path: Path
    wigner_paths: list[Path]
    elapsed_seconds: float = 0.0  # wall time; kept out of summary.json so
    # byte-identical reruns stay byte-identical


def config_hash(config: RunConfig) -> str:
    payload = asdict(config)
    payload["code_version"] = __version__
    canon = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _stage_grid(t_start: float, stage: StageSpec) -> np.ndarray:
    span = stage.t_end - t_start
    n = max(1, int(round(span / stage.dt)))
    grid = t_start + span * np.arange(n + 1) / n
    grid[-1] = stage.t_end  # exact endpoint for stage hand-off
    return grid


def _is_close(t: float, times) -> bool:
    return any(abs(t - s) <= 1e-12 * max(1.0, abs(s)) for s in times)


def _complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


class _RhoAppReference:
    """Cached decohering-cat reference for the distance observable."""

    def __init__(self, derived: DerivedParams, dim: int, t0: float):
        self.t0 = t0
        self.rate = gamma_dec(derived.beta, derived.n_bar, derived.gamma_m)
        beta = derived.beta
        kp = coherent(beta, dim).amplitudes
        km = coherent(-beta, dim).amplitudes
        cross = np.outer(kp, km.conj())
        self.base = np.outer(kp, kp.conj()) + np.outer(km, km.conj())
        self.cross_sym = cross + cross.conj().T
        self.overlap = float(np.exp(-2.0 * abs(beta) ** 2))

    def state(self, t: float) -> np.ndarray:
        lam = float(np.exp(-self.rate * (t - self.t0)))
        return (self.base + lam * self.cross_sym) / (2.0 * (1.0 + self.overlap * lam))


def _make_observers(config, derived, mech_dim, t0_app):
    """Observable closures over the raw evolving matrix (mech or joint)."""
    n_diag = np.arange(mech_dim)
    par_diag = (-1.0) ** n_diag
    target = target_state(derived.beta, mech_dim).matrix
    ref = _RhoAppReference(derived, mech_dim, t0_app)

    if config.model == "bipartite":
        cdim = config.cavity_dim

        def reduce(m):
            return np.einsum("cmcn->mn", m.reshape(cdim, mech_dim, cdim, mech_dim))

    else:

        def reduce(m):
            return m

    def fidelity_target(t, m):
        return hs_fidelity(target, reduce(m))

    def purity(t, m):
        r = reduce(m)
        return np.vdot(r, r).real

    def mean_phonon(t, m):
        return float(np.diag(reduce(m)).real @ n_diag)

    def parity(t, m):
        return float(np.diag(reduce(m)).real @ par_diag)

    def distance_rho_app(t, m):
        if t < t0_app:
            return np.nan
        return 1.0 - hs_fidelity(reduce(m), ref.state(t))

    def ng_fixed(t, m):
        value, _ = _ng_value(reduce(m), *NG_REFERENCE_POINT)
        return value

    def ng_min(t, m):
        from .analysis import ng_minimize

        return ng_minimize(reduce(m))[0]

    table = {
        "fidelity_target": fidelity_target,
        "purity": purity,
        "mean_phonon": mean_phonon,
        "parity": parity,
        "distance_rho_app": distance_rho_app,
        "ng_fixed": ng_fixed,
        "ng_min": ng_min,
    }
    return {name: table[name] for name in config.observables}


def _initial_kind(config: RunConfig, derived: DerivedParams) -> InitialStateKind:
    n_bar = config.init_n_bar if config.init_n_bar is not None else derived.n_bar
    if config.init == "ground":
        return InitialStateKind.ground()
    if config.init == "cooled":
        return InitialStateKind.two_phonon_cooled(n_bar)
    return InitialStateKind.thermal(n_bar)


def _write_manifest(path: Path, config: RunConfig, derived: DerivedParams, chash: str):
    doc = {
        "name": config.name,
        "description": config.description,
        "code_version": __version__,
        "config_hash": chash,
        "conventions": CONVENTIONS,
        "physical_params": {
            k: v for k, v in asdict(config.params).items() if v is not None
        },
        "derived_params": {
            "e0": derived.e0,
            "e1": derived.e1,
            "delta0": derived.delta0,
            "drive_offset": derived.drive_offset,
            "alpha_s": _complex_json(derived.alpha_s),
            "omega_m_eff": derived.omega_m_eff,
            "gamma_eng": derived.gamma_eng,
            "beta": _complex_json(derived.beta),
            "n_bar": derived.n_bar,
            "gamma_m": derived.gamma_m,
            "omega_c": derived.omega_c,
            "gamma_dec": gamma_dec(derived.beta, derived.n_bar, derived.gamma_m),
            "mode": derived.mode,
        },
        "validity_warnings": list(derived.flags),
        "run": {
            "model": config.model,
            "init": config.init,
            "init_n_bar": config.init_n_bar,
            "cavity_dim": config.cavity_dim,
            "stages": [asdict(s) for s in config.stages],
            "snapshot_times": list(config.snapshot_times),
            "observables": list(config.observables),
            "t0_app": config.t0_app,
            "rtol": config.rtol,
            "atol": config.atol,
            "jobs": config.jobs,
            "wigner_enabled": config.wigner_enabled,
            "wigner_grid": asdict(config.wigner_grid) if config.wigner_enabled else None,
        },
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _write_timeseries(path: Path, traj: Trajectory, columns, chash: str):
    cols = [c for c in CSV_COLUMN_ORDER if c in columns]
    with path.open("w") as fh:
        fh.write(f"# config={chash}\n")
        fh.write(",".join(["t_seconds"] + cols) + "\n")
        for i, t in enumerate(traj.times):
            row = [f"{t:.17g}"] + [f"{np.real(traj.records[c][i]):.17g}" for c in cols]
            fh.write(",".join(row) + "\n")


def _write_wigner(path: Path, grid: GridSpec, w, t: float, chash: str):
    with path.open("w") as fh:
        fh.write(
            f"# grid x_range=({grid.x_range[0]:.17g},{grid.x_range[1]:.17g}) "
            f"p_range=({grid.p_range[0]:.17g},{grid.p_range[1]:.17g}) "
            f"nx={grid.nx} np={grid.n_p}\n"
        )
        fh.write(f"# t_seconds={t:.17g}\n")
        fh.write(f"# config={chash}\n")
        for i, x in enumerate(w.x):
            for j, p in enumerate(w.p):
                fh.write(f"{x:.17g},{p:.17g},{w.values[i, j]:.17g}\n")


def _stitch(trajs: list[Trajectory]) -> Trajectory:
    times = np.concatenate([trajs[0].times] + [t.times[1:] for t in trajs[1:]])
    records = {
        k: np.concatenate([trajs[0].records[k]] + [t.records[k][1:] for t in trajs[1:]])
        for k in trajs[0].records
    }
    snapshots = [s for t in trajs for s in t.snapshots]
    stats = {
        "stages": [t.stats for t in trajs],
        "max_trace_err": max(t.stats["max_trace_err"] for t in trajs),
        "max_herm_err": max(t.stats["max_herm_err"] for t in trajs),
    }
    return Trajectory(times, records, snapshots, stats)


def _ng_fit_summary(config, derived, traj) -> dict:
    gd = gamma_dec(derived.beta, derived.n_bar, derived.gamma_m)
    out = {"gamma_dec": gd, "ng_fit_rate": np.nan, "ng_fit_window": None}
    if "ng_fixed" not in traj.records or gd <= 0.0:
        return out
    t_g = 1.0 / derived.gamma_eng
    window = (2.0 * t_g, min(100.0 * t_g, 3.0 / gd))
    try:
        fit = fit_exponential_decay(
            traj.times, -np.real(traj.records["ng_fixed"]), window
        )
    except ValueError as exc:
        out["ng_fit_error"] = str(exc)
        return out
    out["ng_fit_rate"] = fit.rate
    out["ng_fit_window"] = list(fit.window)
    out["ng_fit_residual"] = fit.residual
    return out


def run(config: RunConfig, out_dir) -> RunResult:
    """Execute one configured run and write its artifacts to out_dir."""
    wall_start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # validity flags are captured on derived.flags
        derived = derive_params(config.params, config.mode)
    chash = config_hash(config)
    _write_manifest(out_dir / "manifest.json", config, derived, chash)

    t0_app = config.t0_app if config.t0_app is not None else 1.0 / derived.gamma_eng
    if config.model == "bipartite" and config.t_max > 3.0 / derived.gamma_eng:
        warnings.warn(
            "bipartite runs are intended for short-horizon validation (t <= 3/Gamma); "
            "long horizons are much cheaper on the reduced model",
            stacklevel=2,
        )

    rho_mech = initial_state(_initial_kind(config, derived), config.stages[0].mech_dim)
    snapshot_times = tuple(config.snapshot_times)
    trajs = []
    t_start = 0.0
    state = rho_mech
    for stage in config.stages:
        if state.space.mode_dims[-1] != stage.mech_dim:
            state = truncated(state, stage.mech_dim)
        if config.model == "bipartite":
            model = build_bipartite_model(derived, config.cavity_dim, stage.mech_dim)
            vac = initial_state(InitialStateKind.ground(), config.cavity_dim)
            state = tensor(vac, state)
        else:
            model = build_reduced_model(derived, stage.mech_dim)
        grid = _stage_grid(t_start, stage)
        snaps = tuple(
            ts for ts in snapshot_times if (t_start if trajs else -1.0) < ts <= stage.t_end
        )
        # always snapshot the stage end so the state can be carried over
        internal_snaps = tuple(sorted(set(snaps) | {stage.t_end}))
        cfg = IntegratorConfig(
            rtol=config.rtol, atol=config.atol, snapshot_times=internal_snaps
        )
        observers = _make_observers(config, derived, stage.mech_dim, t0_app)
        traj = evolve(model, state, grid, cfg, observers, method=stage.method)
        end_state = traj.snapshot_at(stage.t_end)
        traj.snapshots = [(ts, s) for ts, s in traj.snapshots if _is_close(ts, snaps)]
        if config.model == "bipartite":
            from .fock import partial_trace

            state = partial_trace(end_state, keep=1)
            traj.snapshots = [(ts, partial_trace(s, keep=1)) for ts, s in traj.snapshots]
        else:
            state = end_state
        trajs.append(traj)
        t_start = stage.t_end

    traj = _stitch(trajs)
    _write_timeseries(out_dir / "timeseries.csv", traj, config.observables, chash)

    wigner_paths = []
    if config.wigner_enabled:
        for k, (ts, rho) in enumerate(traj.snapshots):
            w = wigner(rho, config.wigner_grid)
            p = out_dir / f"wigner_t{k}.csv"
            _write_wigner(p, config.wigner_grid, w, ts, chash)
            wigner_paths.append(p)

    summary = {
        "config_hash": chash,
        "gamma_eng": derived.gamma_eng,
        "beta_abs": abs(derived.beta),
        "n_bar": derived.n_bar,
        "max_trace_err": traj.stats["max_trace_err"],
        "max_herm_err": traj.stats["max_herm_err"],
    }
    if "fidelity_target" in traj.records:
        fid = np.real(traj.records["fidelity_target"])
        i = int(np.nanargmax(fid))
        summary["f_max"] = float(fid[i])
        summary["t_f_max"] = float(traj.times[i])
        summary["f_final"] = float(fid[-1])
    summary.update(_ng_fit_summary(config, derived, traj))
    (out_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2, default=str) + "\n"
    )
    return RunResult(
        config,
        out_dir,
        derived,
        traj,
        summary,
        out_dir / "timeseries.csv",
        wigner_paths,
        elapsed_seconds=time.perf_counter() - wall_start,
    )


# --- sweep -------------------------------------------------------------------

_PARAM_FIELDS = set(PhysicalParams.__dataclass_fields__)
_RUN_FIELDS = {"model", "init", "init_n_bar", "cavity_dim", "rtol", "atol", "mode"}


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Apply axis/CLI overrides; keys are PhysicalParams or run fields."""
    params_kw = {}
    run_kw = {}
    for key, value in overrides.items():
        key = key.removeprefix("params.").removeprefix("run.")
        if key in _PARAM_FIELDS:
            params_kw[key] = value
        elif key in _RUN_FIELDS:
            run_kw[key] = value
        else:
            raise ConfigError(f"unknown override key {key!r}")
    if params_kw:
        run_kw["params"] = replace(config.params, **params_kw)
    return replace(config, **run_kw) if run_kw else config


def _axis_label(point: dict) -> str:
    def fmt(v):
        return f"{v:g}" if isinstance(v, float) else str(v)

    return "_".join(f"{k.split('.')[-1]}={fmt(v)}" for k, v in point.items())


def _run_sweep_point(args):
    config, point, out_dir = args
    label = _axis_label(point)
    try:
        result = run(apply_overrides(config, point), Path(out_dir) / label)
        return label, point, result.summary, None
    except Exception as exc:  # noqa: BLE001 - reported in the failure table
        return label, point, None, f"{type(exc).__name__}: {exc}"


def sweep(template: RunConfig, axes: dict[str, list], out_dir, jobs: int = 1):
    """Run the cartesian product of axis values over a template config.

    Returns (summary_rows, failures); writes sweep_summary.csv and, if
    any grid point failed, sweep_failures.csv listing them.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    keys = list(axes)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*axes.values())]
    tasks = [(template, point, str(out_dir)) for point in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_sweep_point, tasks))
    else:
        outcomes = [_run_sweep_point(t) for t in tasks]

    rows, failures = [], []
    for label, point, summary, error in outcomes:
        if error is not None:
            failures.append((label, error))
            continue
        rows.append(
            {
                "run": label,
                **{k.split(".")[-1]: v for k, v in point.items()},
                "config": summary["config_hash"],
                "gamma_eng": summary["gamma_eng"],
                "beta_abs": summary["beta_abs"],
                "n_bar": summary["n_bar"],
                "f_max": summary.get("f_max", np.nan),
                "t_f_max": summary.get("t_f_max", np.nan),
                "ng_fit_rate": summary.get("ng_fit_rate", np.nan),
                "gamma_dec": summary.get("gamma_dec", np.nan),
            }
        )

    if rows:
        cols = list(rows[0])
        with (out_dir / "sweep_summary.csv").open("w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in rows:
                fh.write(
                    ",".join(
                        f"{row[c]:.17g}" if isinstance(row[c], float) else str(row[c])
                        for c in cols
                    )
                    + "\n"
                )
    else:
        (out_dir / "sweep_summary.csv").write_text("")
    if failures:
        with (out_dir / "sweep_failures.csv").open("w") as fh:
            fh.write("run,error\n")
            for label, error in failures:
                fh.write(f"{label},\"{error}\"\n")
    return rows, failures
