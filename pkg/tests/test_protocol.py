import numpy as np
import pytest

from mechcat.errors import ConfigError, DimensionError
from mechcat.fock import cat_even, expect, fock, number
from mechcat.lindblad import rhs
from mechcat.protocol import (
    InitialStateKind,
    PhysicalParams,
    build_bipartite_model,
    build_reduced_model,
    derive_params,
    g2_from_geometry,
    initial_state,
    target_state,
    thermal_occupation,
)


def paper_params(n_bar=100.0, e1=1e5):
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


# --- derive_params ----------------------------------------------------------

def test_paper_mode_engineered_rate():
    d = derive_params(paper_params(), mode="paper")
    assert d.gamma_eng == pytest.approx(2.98e3, rel=0.01)


def test_paper_mode_cat_amplitude():
    d = derive_params(paper_params(), mode="paper")
    assert abs(d.beta) == pytest.approx(2.36, rel=0.05)


def test_paper_mode_main_drive_amplitude():
    d = derive_params(paper_params(), mode="paper")
    assert d.e0 == pytest.approx(1.5e11, rel=0.05)


def test_thermal_occupation_near_paper_value():
    # 10 mK at 1e7 rad/s: the quoted "about 100" is a rounded value
    n = thermal_occupation(1e7, 0.010)
    assert n == pytest.approx(100.0, rel=0.35)


def test_derived_invariants_hold_exactly():
    d = derive_params(paper_params(), mode="paper")
    assert d.gamma_eng * d.kappa_t == pytest.approx(d.g2**2 * abs(d.alpha_s) ** 2, rel=1e-12)
    assert d.beta**2 * (1j * d.g2 * d.alpha_s) == pytest.approx(d.e1, rel=1e-12)
    assert d.drive_offset == d.delta0
    assert d.delta0 == pytest.approx(2.0 * d.omega_m_eff, rel=1e-12)


def test_self_consistent_fixed_point_converges():
    d = derive_params(paper_params(), mode="self_consistent")
    # resonance condition satisfied at the fixed point
    assert d.delta0 == pytest.approx(2.0 * d.omega_m_eff, rel=1e-8)
    # known gap: the quoted 3.45e3 is NOT reproduced self-consistently
    assert abs(d.alpha_s) < 2.5e3


def test_fixed_detuning_mode_warns_off_resonance():
    with pytest.warns(UserWarning, match="resonance"):
        derive_params(paper_params(), mode="fixed_detuning", delta0=2e7)


def test_validity_flags_emitted_when_regime_violated():
    bad = PhysicalParams(
        omega_m=1e7, q_m=1e3, g2=5.0, omega_l=1.77e15,
        p0=0.040, e1=1e5, kappa_t=1e5, kappa_0=5e4, n_bar=1e4,
    )
    with pytest.warns(UserWarning, match="engineered rate"):
        d = derive_params(bad, mode="paper")
    assert any("engineered rate" in f for f in d.flags)


def test_paper_regime_raises_no_validity_flags():
    import warnings as w

    with w.catch_warnings():
        w.simplefilter("error")
        d = derive_params(paper_params(), mode="paper")
    assert d.flags == ()


# --- g2 from geometry -------------------------------------------------------

def test_g2_zero_overlap():
    assert g2_from_geometry(0.0, 2 * np.pi * 20e9 / 1e-18, 1e-12, 1e7) == 0.0


def test_g2_inverse_in_mass():
    a = g2_from_geometry(1.0, 1e29, 1e-12, 1e7)
    b = g2_from_geometry(1.0, 1e29, 2e-12, 1e7)
    assert a == pytest.approx(2.0 * b, rel=1e-12)


def test_g2_paper_inputs_and_implied_overlap():
    # verbatim formula with the quoted geometry gives ~0.66 rad/s, not
    # the quoted 5; the overlap that reproduces 5 is ~7.5 (logged here).
    d2 = 2 * np.pi * 20e9 / 1e-18  # rad/s per m^2
    g2_unit = g2_from_geometry(1.0, d2, 1e-12, 1e7)
    assert g2_unit == pytest.approx(0.6626, rel=1e-3)
    implied_theta = 5.0 / g2_unit
    assert implied_theta == pytest.approx(7.55, rel=0.01)


# --- models -----------------------------------------------------------------

def test_reduced_model_structure():
    d = derive_params(paper_params(), mode="paper")
    model = build_reduced_model(d, dim=40)
    assert np.abs(model.hamiltonian.matrix).max() == 0.0
    rates = [t.rate for t in model.terms]
    assert rates[0] == pytest.approx(d.gamma_eng)
    assert rates[1] == pytest.approx(d.gamma_m * (d.n_bar + 1) / 2)
    assert rates[2] == pytest.approx(d.gamma_m * d.n_bar / 2)


def test_reduced_model_fixed_point_without_thermal():
    d = derive_params(paper_params(), mode="paper")
    frozen = type(d)(**{**d.__dict__, "gamma_m": 0.0, "flags": ()})
    dim = 48  # enough headroom that the cat tail is below roundoff
    model = build_reduced_model(frozen, dim=dim)
    rho_inf = target_state(d.beta, dim)
    out = rhs(model, rho_inf)
    assert np.abs(out).max() / d.gamma_eng < 1e-8


def test_reduced_model_beta_zero_is_two_phonon_damping():
    p = paper_params(e1=0.0)
    d = derive_params(p, mode="paper")
    assert d.beta == 0.0
    model = build_reduced_model(d, dim=12)
    c = model.terms[0].collapse.matrix
    b = np.diag(np.sqrt(np.arange(1, 12, dtype=float)), 1)
    assert np.allclose(c, b @ b)


def test_bipartite_hamiltonian_is_hermitian_and_specializes():
    d = derive_params(paper_params(), mode="paper")
    model = build_bipartite_model(d, cavity_dim=4, mech_dim=30)
    h = model.hamiltonian.matrix
    assert np.abs(h - h.conj().T).max() < 1e-10 * np.abs(h).max()


def test_bipartite_dark_state():
    # vacuum (x) even cat is annihilated by H_eff up to truncation error
    d = derive_params(paper_params(), mode="paper")
    cavity_dim, mech_dim = 4, 40
    model = build_bipartite_model(d, cavity_dim, mech_dim)
    vac = fock(0, cavity_dim)
    cat = cat_even(d.beta, mech_dim)
    joint = np.kron(vac.amplitudes, cat.amplitudes)
    scale = d.g2 * abs(d.alpha_s) * abs(d.beta) ** 2
    assert np.linalg.norm(model.hamiltonian.matrix @ joint) / scale < 1e-6


def test_bipartite_dissipator_rates_and_ordering():
    d = derive_params(paper_params(), mode="paper")
    model = build_bipartite_model(d, cavity_dim=3, mech_dim=25)
    assert model.terms[0].rate == pytest.approx(d.kappa_t)
    # cavity collapse operator acts on the first tensor slot
    da = model.terms[0].collapse.matrix
    from mechcat.fock import annihilation

    assert np.allclose(da, np.kron(annihilation(3).matrix, np.eye(25)))


def test_bipartite_dimension_guards():
    d = derive_params(paper_params(), mode="paper")
    with pytest.raises(DimensionError):
        build_bipartite_model(d, cavity_dim=2, mech_dim=40)
    with pytest.raises(DimensionError):
        build_bipartite_model(d, cavity_dim=4, mech_dim=10)


# --- initial and target states ----------------------------------------------

def test_ground_state():
    rho = initial_state(InitialStateKind.ground(), 8)
    assert rho.matrix[0, 0].real == pytest.approx(1.0)


def test_two_phonon_cooled_populations():
    rho = initial_state(InitialStateKind.two_phonon_cooled(100.0), 10)
    assert rho.matrix[1, 1].real == pytest.approx(1.0 / (4.0 + 0.01), abs=1e-12)
    assert rho.matrix.trace().real == pytest.approx(1.0, abs=1e-15)

    rho10 = initial_state(InitialStateKind.two_phonon_cooled(10.0), 10)
    assert rho10.matrix[1, 1].real == pytest.approx(0.2439, abs=1e-4)


def test_thermal_state_mean_occupation():
    n_bar = 3.0
    rho = initial_state(InitialStateKind.thermal(n_bar), 90)
    got = expect(rho, number(90)).real
    assert got == pytest.approx(n_bar, abs=1e-6)


def test_thermal_tail_warning():
    with pytest.warns(UserWarning, match="trace"):
        initial_state(InitialStateKind.thermal(10.0), 40)


def test_target_state_purity_and_parity():
    rho = target_state(2.36, 40)
    purity = np.einsum("ij,ji->", rho.matrix, rho.matrix).real
    assert purity == pytest.approx(1.0, abs=1e-12)
    par = np.diag((-1.0) ** np.arange(40))
    assert np.einsum("ij,ji->", rho.matrix, par).real == pytest.approx(1.0, abs=1e-12)


def test_initial_state_kind_validation():
    with pytest.raises(ConfigError):
        InitialStateKind("squeezed")
    with pytest.raises(ConfigError):
        InitialStateKind("thermal")
