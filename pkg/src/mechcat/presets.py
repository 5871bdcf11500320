"""Catalog of reference run configurations.

All presets use the same experimental parameter set (mechanical mode at
1e7 rad/s with quality factor 1e8 and effective mass 1 ng, quadratic
coupling 5 rad/s, 1064 nm drive at 40 mW through a kappa_0 = 5e4 rad/s
input mirror of a kappa_t = 1e5 rad/s cavity, second tone amplitude
e1 = 1e5 rad/s) in paper mode, which pins |alpha_s| = 3.45e3. That
gives an engineered rate of ~2.98e3 rad/s and cat amplitude ~2.41.

Times inside presets are expressed in units of 1/gamma_eng at build
time; the catalog covers the Wigner/fidelity/distance/non-Gaussianity
figures plus the two-phonon-cooling and bipartite-validation runs:

========================  =====================================================
fig1                      Wigner snapshots, ground start, n_bar = 100
fig2-ground-n100          fidelity trajectory, ground start, n_bar = 100
fig3-cooled-n10           Wigner snapshots, cooled start, n_bar = 10, 1000/G
fig4-cooled-n100          Wigner snapshots, cooled start, n_bar = 100, 100/G
fig5a-ground-n100         distance to the decohering-cat reference, ground
fig5b-cooled-n10          distance, cooled start, n_bar = 10
fig5c-cooled-n100         distance, cooled start, n_bar = 100
fig6a-cooled-n10          fidelity peak after two-phonon precooling, n_bar = 10
fig6b-cooled-n100         fidelity peak after two-phonon precooling, n_bar = 100
cooling-n10               beta = 0 two-phonon cooling to the 0/1 mixture (2 s)
ng-decay-n10              non-Gaussianity decay, cooled start, n_bar = 10
ng-decay-n100             non-Gaussianity decay, cooled start, n_bar = 100
bipartite-check           short-horizon bipartite run validating the reduction
========================  =====================================================
"""

from __future__ import annotations

import warnings

from .errors import ConfigError
from .protocol import PhysicalParams, derive_params
from .runner import DEFAULT_OBSERVABLES, RunConfig, StageSpec

__all__ = ["paper_physical_params", "preset", "preset_names", "preset_catalog"]

MECH_DIM = 40
COOLING_MECH_DIM = 80
COOLING_TAIL_DIM = 32


def paper_physical_params(n_bar: float = 100.0, e1: float = 1e5) -> PhysicalParams:
    return PhysicalParams(
        omega_m=1e7,
        q_m=1e8,
        mass=1e-12,
        g2=5.0,
        omega_l=1.77e15,
        p0=0.040,
        e1=e1,
        kappa_t=1e5,
        kappa_0=5e4,
        n_bar=n_bar,
    )


def _t_gamma(params: PhysicalParams) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return 1.0 / derive_params(params, mode="paper").gamma_eng


def _build_catalog() -> dict[str, RunConfig]:
    obs = DEFAULT_OBSERVABLES
    obs_ng = obs + ("ng_fixed",)
    p100 = paper_physical_params(n_bar=100.0)
    p10 = paper_physical_params(n_bar=10.0)
    tg = _t_gamma(p100)  # ~3.36e-4 s; independent of n_bar

    def stages_two_phase(t_last: float, dt_late: float) -> tuple[StageSpec, ...]:
        # dense sampling through cat formation, coarse afterwards
        return (
            StageSpec(t_end=3.0 * tg, dt=0.01 * tg, mech_dim=MECH_DIM),
            StageSpec(t_end=t_last, dt=dt_late, mech_dim=MECH_DIM),
        )

    catalog = {}

    catalog["fig1"] = RunConfig(
        name="fig1",
        description="Wigner-function lifecycle of the cat, ground start, n_bar = 100",
        params=p100,
        stages=stages_two_phase(100.0 * tg, 0.25 * tg),
        init="ground",
        snapshot_times=(0.0, 0.71 * tg, 1.0 * tg, 100.0 * tg),
        observables=obs_ng,
        wigner_enabled=True,
    )
    catalog["fig2-ground-n100"] = RunConfig(
        name="fig2-ground-n100",
        description="fidelity to the target cat vs time, ground start, n_bar = 100",
        params=p100,
        stages=stages_two_phase(100.0 * tg, 0.25 * tg),
        init="ground",
        snapshot_times=(1.0 * tg, 100.0 * tg),
        observables=obs_ng,
    )
    catalog["fig3-cooled-n10"] = RunConfig(
        name="fig3-cooled-n10",
        description="Wigner snapshots over the full decoherence, cooled start, n_bar = 10",
        params=p10,
        stages=stages_two_phase(1000.0 * tg, 1.0 * tg),
        init="cooled",
        snapshot_times=(0.0, 1.0 * tg, 1000.0 * tg),
        observables=obs,
        wigner_enabled=True,
    )
    catalog["fig4-cooled-n100"] = RunConfig(
        name="fig4-cooled-n100",
        description="Wigner snapshots, cooled start, n_bar = 100",
        params=p100,
        stages=stages_two_phase(100.0 * tg, 0.25 * tg),
        init="cooled",
        snapshot_times=(0.0, 1.0 * tg, 100.0 * tg),
        observables=obs,
        wigner_enabled=True,
    )
    for tag, params, init in (
        ("fig5a-ground-n100", p100, "ground"),
        ("fig5b-cooled-n10", p10, "cooled"),
        ("fig5c-cooled-n100", p100, "cooled"),
    ):
        catalog[tag] = RunConfig(
            name=tag,
            description="distance to the decohering-cat reference state",
            params=params,
            stages=stages_two_phase(100.0 * tg, 0.25 * tg),
            init=init,
            snapshot_times=(1.0 * tg, 100.0 * tg),
            observables=obs_ng,
        )
    for tag, params in (("fig6a-cooled-n10", p10), ("fig6b-cooled-n100", p100)):
        catalog[tag] = RunConfig(
            name=tag,
            description="fidelity peak after two-phonon precooling",
            params=params,
            stages=(StageSpec(t_end=3.0 * tg, dt=0.01 * tg, mech_dim=MECH_DIM),),
            init="cooled",
            snapshot_times=(1.0 * tg,),
            observables=obs,
        )
    catalog["cooling-n10"] = RunConfig(
        name="cooling-n10",
        description="two-phonon cooling (weak tone off) from thermal n_bar = 10 to "
        "the zero/one phonon mixture",
        params=paper_physical_params(n_bar=10.0, e1=0.0),
        stages=(
            StageSpec(t_end=3.0 * tg, dt=0.01 * tg, mech_dim=COOLING_MECH_DIM),
            StageSpec(t_end=2.0, dt=0.01, mech_dim=COOLING_TAIL_DIM, method="expm"),
        ),
        init="thermal",
        snapshot_times=(3.0 * tg, 2.0),
        observables=obs,
    )
    catalog["ng-decay-n10"] = RunConfig(
        name="ng-decay-n10",
        description="non-Gaussianity witness decay, cooled start, n_bar = 10",
        params=p10,
        stages=stages_two_phase(0.25, 1.0 * tg),
        init="cooled",
        snapshot_times=(1.0 * tg,),
        observables=obs_ng,
    )
    catalog["ng-decay-n100"] = RunConfig(
        name="ng-decay-n100",
        description="non-Gaussianity witness decay, cooled start, n_bar = 100",
        params=p100,
        stages=stages_two_phase(100.0 * tg, 0.25 * tg),
        init="cooled",
        snapshot_times=(1.0 * tg,),
        observables=obs_ng,
    )
    catalog["bipartite-check"] = RunConfig(
        name="bipartite-check",
        description="bipartite cavity x mechanics model over the cat formation window "
        "(validates the adiabatic elimination)",
        params=p100,
        stages=(StageSpec(t_end=1.2 * tg, dt=0.02 * tg, mech_dim=MECH_DIM, method="rk45"),),
        model="bipartite",
        cavity_dim=4,
        init="ground",
        snapshot_times=(1.0 * tg,),
        observables=obs,
        rtol=1e-6,
    )
    return catalog


_CATALOG: dict[str, RunConfig] | None = None


def preset_catalog() -> dict[str, RunConfig]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return _CATALOG


def preset_names() -> list[str]:
    return list(preset_catalog())


def preset(name: str) -> RunConfig:
    try:
        return preset_catalog()[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
