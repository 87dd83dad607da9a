import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinflavour.core import DimensionlessParams, diagonal_mixture, pure_state
from spinflavour.entropy import (
    SIGMA_X_PROJECTORS,
    SIGMA_Z_PROJECTORS,
    MeasurementSet,
    Q_eigenvalues,
    R_eigenvalues,
    binary_entropy,
    classical_correlation,
    conditional_entropies,
    discord,
    entropy_report,
    eur_terms,
    flavour_eigenvalues,
    incompatibility,
    initial_report,
    mutual_informations,
    project_Q,
    project_R,
    reduce_flavour,
    reduce_spin,
    spin_eigenvalues,
    vn_entropy,
)
from spinflavour.lindblad import evolve
from spinflavour.validation import random_density_matrices

MIXED = np.eye(4) / 4
REPORT_FIELDS = [
    "S_full", "S_nu", "S_sigma", "S_Rnu", "S_Qnu", "S_sigma_given_nu", "S_R_given_nu",
    "S_Q_given_nu", "I_sigma_nu", "I_sigmaz_nu", "I_sigmax_nu", "J_classical", "D_discord",
    "eur_lhs", "eur_rhs", "d_eur", "S_sigmaz", "S_sigmax",
]
SPECTRA = ["lam", "lam_nu", "lam_sigma", "lam_R", "lam_Q"]

states = st.integers(0, 2**32 - 1).map(
    lambda s: random_density_matrices(1, np.random.default_rng(s))[0]
)


# --- entropies and reductions -------------------------------------------------


def test_vn_entropy_values():
    assert vn_entropy(MIXED) == pytest.approx(2.0, abs=1e-14)
    assert vn_entropy(pure_state().data) == pytest.approx(0.0, abs=1e-14)
    assert vn_entropy(np.diag([0.5, 0.25, 0.125, 0.125])) == pytest.approx(1.75, abs=1e-14)


def test_vn_entropy_rejects_bad_trace():
    with pytest.raises(ValueError):
        vn_entropy(np.diag([0.5, 0.5, 0.5, 0.0]))


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0


def test_partial_traces():
    assert np.allclose(reduce_flavour(pure_state()), np.diag([1, 0]))
    assert np.allclose(reduce_spin(pure_state()), np.diag([1, 0]))
    assert np.allclose(reduce_flavour(MIXED), np.eye(2) / 2)
    assert np.allclose(reduce_spin(MIXED), np.eye(2) / 2)


def test_projections_of_simple_states():
    assert np.allclose(project_R(MIXED), MIXED)
    assert np.allclose(project_Q(MIXED), MIXED)
    a = np.array([0.1, 0.2, 0.3, 0.4])
    lam = np.linalg.eigvalsh(project_R(diagonal_mixture(a)))
    assert np.allclose(np.sort(lam), np.sort(a))


def test_measurement_projectors_resolve_identity():
    for pair in (SIGMA_Z_PROJECTORS, SIGMA_X_PROJECTORS):
        assert np.allclose(pair[0] + pair[1], np.eye(2))


def test_incompatibility_is_one_bit():
    assert incompatibility() == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(rho=states)
def test_closed_form_spectra(rho):
    pairs = [
        (flavour_eigenvalues(rho), reduce_flavour(rho)),
        (spin_eigenvalues(rho), reduce_spin(rho)),
        (R_eigenvalues(rho), project_R(rho)),
        (Q_eigenvalues(rho), project_Q(rho)),
    ]
    for closed, m in pairs:
        assert np.abs(np.sort(closed) - np.linalg.eigvalsh(m)).max() < 1e-10


@settings(max_examples=60, deadline=None)
@given(rho=states)
def test_dephasing_never_lowers_entropy(rho):
    s = vn_entropy(rho)
    for proj in (project_R, project_Q):
        out = proj(rho)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(out).min() > -1e-12
        assert vn_entropy(out) >= s - 1e-10


# --- information measures -----------------------------------------------------


def test_conditional_entropies_maximally_mixed():
    c = conditional_entropies(MIXED)
    assert c["sigma"] == pytest.approx(1.0, abs=1e-12)


def test_product_state_has_no_mutual_information():
    spin = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    flav = np.array([[0.4, 0.1], [0.1, 0.6]])
    mi = mutual_informations(np.kron(flav, spin))
    assert abs(mi["sigma"]) < 1e-12


def test_maximally_mixed_correlations_vanish():
    grid = MeasurementSet.bloch_grid(8)
    assert abs(classical_correlation(MIXED)) < 1e-12
    assert abs(classical_correlation(MIXED, grid)) < 1e-12
    assert abs(discord(MIXED)) < 1e-12


def test_empty_measurement_set_rejected():
    with pytest.raises(ValueError):
        MeasurementSet("bloch_grid", ())


@settings(max_examples=40, deadline=None)
@given(rho=states)
def test_measurement_cannot_raise_mutual_information(rho):
    mi = mutual_informations(rho)
    assert mi["sigma"] >= mi["sigma_z"] - 1e-10
    assert mi["sigma"] >= mi["sigma_x"] - 1e-10


@settings(max_examples=20, deadline=None)
@given(rho=states)
def test_grid_search_contains_paper_measurements(rho):
    grid = MeasurementSet.bloch_grid(8)
    assert classical_correlation(rho, grid) >= classical_correlation(rho) - 1e-12


def test_incompatible_spin_bases_for_x_eigenstate():
    # |+> spin, |e> flavour: sigma_x measurement gives full information on spin alone
    plus = np.array([1, 1]) / math.sqrt(2)
    rho = np.kron(np.diag([1.0, 0.0]), np.outer(plus, plus))
    rep = entropy_report(rho)
    assert rep.S_sigmaz == pytest.approx(1.0)
    assert rep.S_sigmax == pytest.approx(0.0, abs=1e-12)


# --- t = 0 closed forms -------------------------------------------------------


def _compare(rep, ref, tol):
    for name in REPORT_FIELDS:
        assert getattr(rep, name) == pytest.approx(getattr(ref, name), abs=tol), name
    for name in SPECTRA:
        assert np.allclose(np.sort(getattr(rep, name)), np.sort(getattr(ref, name)), atol=tol), name


def test_pipeline_reproduces_initial_report():
    rng = np.random.default_rng(1)
    for a in rng.dirichlet(np.ones(4), size=100):
        _compare(entropy_report(diagonal_mixture(a)), initial_report(a), 1e-10)


def test_initial_report_pure_right_electron():
    rep = initial_report([0, 0, 1, 0])
    assert rep.S_full == 0 and rep.S_nu == 0
    assert rep.S_Q_given_nu == 1.0 and rep.I_sigmax_nu == 0 and rep.D_discord == 0


def test_initial_report_uniform():
    rep = initial_report([0.25] * 4)
    assert rep.S_full == pytest.approx(2.0)
    assert rep.lam_nu[0] == pytest.approx(0.5) and rep.lam_sigma[0] == pytest.approx(0.5)
    assert rep.I_sigma_nu == pytest.approx(0.0, abs=1e-15)
    assert rep.J_classical == pytest.approx(0.0, abs=1e-15)
    assert rep.S_sigma_given_nu == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda a: sum(a) > 1e-3))
def test_initial_sigma_x_entropy_is_one_bit(a):
    a = np.array(a) / sum(a)
    assert entropy_report(diagonal_mixture(a)).S_sigmax == pytest.approx(1.0, abs=1e-12)
    assert initial_report(a).S_sigmax == 1.0


def test_initial_report_rejects_bad_weights():
    with pytest.raises(ValueError):
        initial_report([0.5, 0.5, 0.5, 0.0])


# --- uncertainty relation along trajectories ---------------------------------


def test_eur_terms_consistent_with_report():
    rho = random_density_matrices(1, np.random.default_rng(2))[0]
    t, rep = eur_terms(rho), entropy_report(rho)
    assert t["lhs"] == pytest.approx(rep.eur_lhs)
    assert t["d_eur"] == pytest.approx(rep.eur_lhs - rep.eur_rhs)
    assert rep.eur_rhs == pytest.approx(
        1 + rep.S_sigma_given_nu + max(0.0, rep.D_discord - rep.J_classical)
    )
    assert rep.D_discord_clamped == max(0.0, rep.D_discord)


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    w=st.floats(0.5, 8.0),
    b=st.floats(0.1, 3.0),
    beta=st.floats(0.05, math.pi / 2),
)
def test_eur_holds_along_trajectories(seed, w, b, beta):
    p = DimensionlessParams(omega_v_bar=w, omega_b_bar=b, beta=beta)
    rho0 = random_density_matrices(1, np.random.default_rng(seed))[0]
    for rho in evolve(rho0, p, tau_grid=np.linspace(0, 6, 25)).rho:
        assert eur_terms(rho)["d_eur"] >= -1e-8


def test_paper_scenario_discord_is_transient():
    taus = np.arange(0, 20.001, 0.1)
    traj = evolve(pure_state(), DimensionlessParams(), tau_grid=taus)
    d = np.array([discord(r) for r in traj.rho])
    assert abs(d[0]) < 1e-12
    assert d[(taus > 0.1) & (taus < 2)].max() > 0.01
    assert d[taus >= 15].max() < 1e-3
