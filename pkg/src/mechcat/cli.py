"""Command-line driver.

    mechcat run --preset fig1 [--out DIR] [--model reduced|bipartite]
                [--dims M[,C]] [--tmax S] [--snapshots t1,t2,...] [--jobs N]
    mechcat run --config run.ini [--out DIR] [...]
    mechcat sweep --template run.ini --axis n_bar=10,100 --out DIR [--jobs N]
    mechcat presets --list

Exit codes: 0 success, 2 configuration error, 3 integration failure,
4 I/O error.

Config files are INI-style with sections [params], [run], [wigner] and
[output]; all keys are documented in the README. Frequencies are
angular (rad/s) by default; set ``angular = false`` in [params] to
supply plain Hz values (they are multiplied by 2 pi at this boundary).
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import GridSpec
from .errors import ConfigError, IntegrationError
from .presets import preset, preset_catalog
from .protocol import PhysicalParams
from .runner import DEFAULT_OBSERVABLES, RunConfig, StageSpec, run, sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_IO = 4

# plain-Hz keys scaled by 2 pi when angular = false
_FREQUENCY_KEYS = ("omega_m", "omega_l", "kappa_t", "kappa_0", "g2", "d2wc_dz2", "e0", "e1")
_PARAM_KEYS = (
    "omega_m", "q_m", "mass", "g2", "theta", "d2wc_dz2", "omega_l",
    "p0", "p1", "e0", "e1", "kappa_t", "kappa_0", "temperature", "n_bar",
)


def _parse_value(text: str):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return text


def _load_config_file(path: Path) -> tuple[RunConfig, Path | None]:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "params" not in cp or "run" not in cp:
        raise ConfigError("config file needs [params] and [run] sections")

    psec = cp["params"]
    angular = psec.getboolean("angular", fallback=True)
    kwargs = {}
    for key in _PARAM_KEYS:
        if key in psec:
            value = psec.getfloat(key)
            if not angular and key in _FREQUENCY_KEYS:
                value *= 2.0 * np.pi
            kwargs[key] = value
    params = PhysicalParams(**kwargs)

    rsec = cp["run"]
    t_max = rsec.getfloat("t_max", fallback=None)
    dt = rsec.getfloat("dt", fallback=None)
    if t_max is None or t_max <= 0 or dt is None:
        raise ConfigError("[run] needs t_max > 0 and dt")
    mech_dim = rsec.getint("mech_dim", fallback=40)
    method = rsec.get("method", fallback="auto")
    stages = []
    if "dense_until" in rsec:
        stages.append(
            StageSpec(
                t_end=rsec.getfloat("dense_until"),
                dt=rsec.getfloat("dense_dt", fallback=dt),
                mech_dim=mech_dim,
                method=method,
            )
        )
    stages.append(StageSpec(t_end=t_max, dt=dt, mech_dim=mech_dim, method=method))

    def tuple_of(option, cast):
        raw = rsec.get(option, fallback="")
        return tuple(cast(x.strip()) for x in raw.split(",") if x.strip())

    observables = tuple_of("observables", str) or DEFAULT_OBSERVABLES
    wsec = cp["wigner"] if "wigner" in cp else None
    wigner_enabled = bool(wsec) and wsec.getboolean("enabled", fallback=True)
    grid = GridSpec()
    if wsec is not None:
        grid = GridSpec(
            x_range=(wsec.getfloat("x_min", -5.0), wsec.getfloat("x_max", 5.0)),
            p_range=(wsec.getfloat("p_min", -5.0), wsec.getfloat("p_max", 5.0)),
            nx=wsec.getint("nx", 201),
            n_p=wsec.getint("np", 201),
        )

    config = RunConfig(
        name=rsec.get("name", fallback=path.stem),
        params=params,
        stages=tuple(stages),
        mode=rsec.get("mode", fallback="paper"),
        model=rsec.get("model", fallback="reduced"),
        init=rsec.get("init", fallback="ground"),
        init_n_bar=rsec.getfloat("init_n_bar", fallback=None),
        cavity_dim=rsec.getint("cavity_dim", fallback=4),
        snapshot_times=tuple_of("snapshots", float),
        observables=observables,
        wigner_enabled=wigner_enabled,
        wigner_grid=grid,
        t0_app=rsec.getfloat("t0_app", fallback=None),
        rtol=rsec.getfloat("rtol", fallback=1e-8),
        atol=rsec.getfloat("atol", fallback=1e-10),
        jobs=rsec.getint("jobs", fallback=1),
    )
    out = Path(cp["output"]["dir"]) if "output" in cp and "dir" in cp["output"] else None
    return config, out


def _nearest_grid_times(config: RunConfig, wanted) -> tuple[float, ...]:
    from .runner import _stage_grid

    grids = []
    t0 = 0.0
    for stage in config.stages:
        grids.append(_stage_grid(t0, stage))
        t0 = stage.t_end
    allts = np.unique(np.concatenate(grids))
    return tuple(float(allts[np.argmin(np.abs(allts - t))]) for t in wanted)


def _apply_cli_overrides(config: RunConfig, args) -> RunConfig:
    if args.model:
        config = replace(config, model=args.model)
    if args.dims:
        parts = [int(x) for x in args.dims.split(",")]
        stages = tuple(replace(s, mech_dim=parts[0]) for s in config.stages)
        config = replace(config, stages=stages)
        if len(parts) > 1:
            config = replace(config, cavity_dim=parts[1])
    if args.tmax is not None:
        if args.tmax <= 0:
            raise ConfigError("--tmax must be positive")
        kept = [s for s in config.stages if s.t_end < args.tmax]
        last = config.stages[min(len(kept), len(config.stages) - 1)]
        stages = tuple(kept) + (replace(last, t_end=args.tmax),)
        snaps = tuple(t for t in config.snapshot_times if t <= args.tmax)
        config = replace(config, stages=stages, snapshot_times=snaps)
    if args.jobs is not None:
        config = replace(config, jobs=args.jobs)
    if args.snapshots:
        wanted = tuple(float(x) for x in args.snapshots.split(","))
        config = replace(config, snapshot_times=_nearest_grid_times(config, wanted))
    return config


def _cmd_run(args) -> int:
    if bool(args.preset) == bool(args.config):
        raise ConfigError("run needs exactly one of --preset or --config")
    if args.preset:
        config, file_out = preset(args.preset), None
    else:
        config, file_out = _load_config_file(Path(args.config))
    config = _apply_cli_overrides(config, args)
    out_dir = Path(args.out) if args.out else (file_out or Path("runs") / config.name)
    result = run(config, out_dir)
    s = result.summary
    print(f"run {config.name}: wrote {result.out_dir}")
    if "f_max" in s:
        print(f"  F_max = {s['f_max']:.5f} at t = {s['t_f_max']:.6e} s")
    print(f"  trace drift {s['max_trace_err']:.2e}, hermiticity {s['max_herm_err']:.2e}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    template, file_out = _load_config_file(Path(args.template))
    out_dir = Path(args.out) if args.out else (file_out or Path("runs") / "sweep")
    axes = {}
    for spec in args.axis or []:
        if "=" not in spec:
            raise ConfigError(f"bad axis spec {spec!r}; expected key=v1,v2,...")
        key, _, values = spec.partition("=")
        axes[key.strip()] = [_parse_value(v) for v in values.split(",") if v.strip()]
    if not axes:
        raise ConfigError("sweep needs at least one --axis")
    rows, failures = sweep(template, axes, out_dir, jobs=args.jobs or 1)
    print(f"sweep: {len(rows)} runs ok, {len(failures)} failed; summary in {out_dir}")
    for label, error in failures:
        print(f"  FAILED {label}: {error}")
    return EXIT_INTEGRATION if failures else EXIT_OK


def _cmd_presets(args) -> int:
    for name, config in preset_catalog().items():
        print(f"{name:20s} {config.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mechcat", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single configured run")
    p_run.add_argument("--preset", help="preset name (see `mechcat presets --list`)")
    p_run.add_argument("--config", help="INI config file")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--model", choices=["reduced", "bipartite"])
    p_run.add_argument("--dims", help="mechanical[,cavity] truncation, e.g. 40,4")
    p_run.add_argument("--tmax", type=float, help="horizon in seconds")
    p_run.add_argument("--snapshots", help="comma-separated snapshot times (seconds)")
    p_run.add_argument("--jobs", type=int, help="parallelism degree")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a grid of parameter overrides")
    p_sweep.add_argument("--template", required=True, help="INI config template")
    p_sweep.add_argument("--axis", action="append", help="key=v1,v2,... (repeatable)")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--jobs", type=int, help="worker pool size")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_presets = sub.add_parser("presets", help="list the preset catalog")
    p_presets.add_argument("--list", action="store_true", default=True)
    p_presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
