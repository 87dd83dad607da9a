import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from spinflavour.core import (
    BasisMismatchError,
    BasisTag,
    DegenerateAngleError,
    DensityMatrix4,
    DimensionlessParams,
    PhysicalParams,
    build_effective_mass_hamiltonian,
    build_flavour_hamiltonian,
    build_magnetic_hamiltonian,
    build_matter_hamiltonian,
    build_vacuum_hamiltonian,
    change_basis,
    characteristic_levels,
    diagonal_mixture,
    eigenfrequencies,
    flavour_moments,
    magnetic_angle,
    pure_state,
    state_index,
    theta_from_sin2,
    transforms,
)

PAPER = DimensionlessParams()


def random_state(rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return DensityMatrix4(rho / np.trace(rho).real)


# --- density matrices ----------------------------------------------------------


def test_pure_state_layout():
    assert state_index("e", "R") == 0
    assert state_index("mu", "L") == 3
    rho = pure_state("e", "R").data
    assert rho[0, 0] == 1 and np.count_nonzero(rho) == 1


def test_diagonal_mixture_index_map():
    rho = diagonal_mixture([0.1, 0.2, 0.3, 0.4]).data
    # a1 |e L>, a2 |mu L>, a3 |e R>, a4 |mu R>
    assert np.allclose(np.diag(rho).real, [0.3, 0.1, 0.4, 0.2])


@pytest.mark.parametrize(
    "bad",
    [
        np.diag([0.5, 0.5, 0.5, 0.0]),
        np.diag([1.2, -0.2, 0.0, 0.0]),
        np.array([[0.5, 0.1j, 0, 0], [0.1j, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]),
    ],
    ids=["trace", "negative", "non-hermitian"],
)
def test_density_matrix_rejects_invalid(bad):
    with pytest.raises(ValueError):
        DensityMatrix4(bad)


def test_diagonal_mixture_rejects_off_simplex():
    with pytest.raises(ValueError):
        diagonal_mixture([0.5, 0.5, 0.5, -0.5])


# --- Hamiltonians -------------------------------------------------------------


def test_vacuum_frequency_from_solar_values():
    assert PhysicalParams().omega_nu == pytest.approx(1.8425e-25, rel=1e-12)


def test_vacuum_hamiltonian_zero_mixing():
    p = DimensionlessParams(omega_v_bar=3.0, theta_nu=0.0)
    assert np.allclose(build_vacuum_hamiltonian(p), 3.0 * np.diag([-1, -1, 1, 1]))


def test_solar_mixing_trig():
    theta = theta_from_sin2(0.297)
    assert math.cos(2 * theta) == pytest.approx(0.406, abs=1e-12)
    assert math.sin(2 * theta) == pytest.approx(0.913873, abs=1e-6)


def test_matter_hamiltonian_structure():
    assert np.count_nonzero(build_matter_hamiltonian(PhysicalParams())) == 0
    h = build_matter_hamiltonian(PhysicalParams(n_e=1.0))
    nz = np.argwhere(h != 0)
    assert nz.tolist() == [[1, 1]]


def test_matter_negligible_at_interstellar_density():
    # ~1 electron per cm^3
    h = build_matter_hamiltonian(PhysicalParams(n_e=1.0, n_n=1.0))
    mu_b = PhysicalParams().moment_energies()[0]
    assert np.abs(h).max() < 1e-4 * mu_b


def test_flavour_moments_zero_angle():
    m = flavour_moments(PhysicalParams(theta_nu=0.0, mu_jk=(1e-12, 2e-12, 3e-12)))
    assert m["mu_ee"] == pytest.approx(1e-12)
    assert m["mu_mumu"] == pytest.approx(2e-12)
    assert m["mu_emu"] == pytest.approx(3e-12)


def test_flavour_moments_equal_moments():
    p = PhysicalParams()
    mu = p.mu_jk[0]
    m = flavour_moments(p)
    assert m["mu_ee"] == pytest.approx(mu * (1 + math.sin(2 * p.theta_nu)), rel=1e-12)
    assert m["mu_emu"] == pytest.approx(mu * math.cos(2 * p.theta_nu), rel=1e-12)


def test_flavour_moments_over_gamma():
    p = PhysicalParams(gamma1=50.0, gamma2=50.0, mu_jk=(1e-12, 2e-12, 3e-12))
    m = flavour_moments(p)
    for key in ("ee", "emu", "mumu"):
        assert m[f"mu_over_gamma_{key}"] == pytest.approx(-m[f"mu_{key}"] / 50.0, rel=1e-12)


def test_magnetic_hamiltonian_zero_field():
    h = build_magnetic_hamiltonian(PhysicalParams(B_perp=0.0, B_par=0.0))
    assert np.count_nonzero(h) == 0


def test_magnetic_hamiltonian_is_spin_flip():
    h = build_magnetic_hamiltonian(PhysicalParams())
    assert np.abs(h).max() > 0
    for i in range(4):
        for j in range(4):
            if i % 2 == j % 2:
                assert h[i, j] == 0


def test_moment_energy_scale():
    assert PhysicalParams().moment_energies()[0] == pytest.approx(4.41e-26, rel=1e-3)


def test_effective_hamiltonian_without_field():
    p = DimensionlessParams(omega_v_bar=2.0, omega_b_bar=0.0)
    assert np.allclose(build_effective_mass_hamiltonian(p), np.diag([-2, -2, 2, 2]))


def test_paper_hamiltonian_spectrum():
    ev = np.linalg.eigvalsh(build_flavour_hamiltonian(PAPER))
    assert np.allclose(ev, [-5.524938, -4.524938, 4.524938, 5.524938], atol=1e-6)
    assert np.allclose(ev, characteristic_levels(5.0, 0.5), atol=1e-12)


# --- diagonalization ----------------------------------------------------------


def test_magnetic_angle_values():
    assert magnetic_angle(DimensionlessParams(omega_b_bar=0.0)) == 0.0
    assert magnetic_angle(PAPER) == pytest.approx(0.5 * math.atan(0.1), abs=1e-15)
    assert magnetic_angle(PAPER) == pytest.approx(0.0498343, abs=1e-7)


def test_magnetic_angle_degenerate():
    with pytest.raises(DegenerateAngleError):
        magnetic_angle(DimensionlessParams(omega_v_bar=0.0, omega_b_bar=0.0))


def test_eigenfrequencies_paper():
    ef = eigenfrequencies(PAPER)
    assert ef.omega_N == pytest.approx(math.sqrt(101), abs=1e-12)
    assert np.allclose(ef.kappa, [-5.524938, -4.524938, 4.524938, 5.524938], atol=1e-6)


def test_eigenfrequencies_limits():
    ef = eigenfrequencies(DimensionlessParams(omega_v_bar=3.0, omega_b_bar=0.0))
    assert ef.omega_N == pytest.approx(6.0)
    assert np.allclose(ef.kappa, [-3, -3, 3, 3])
    ef = eigenfrequencies(DimensionlessParams(omega_v_bar=0.0, omega_b_bar=2.0))
    assert np.allclose(ef.kappa, [-2, 0, 0, 2])


def test_unequal_diagonal_moments_rejected():
    with pytest.raises(ValueError):
        eigenfrequencies(PhysicalParams(mu_jk=(1e-12, 2e-12, 1e-12)))


def test_transforms_orthogonal():
    tr = transforms(PAPER)
    assert np.allclose(tr.T_S @ tr.T_S, np.eye(4), atol=1e-15)
    for t in (tr.T_S, tr.T_b, tr.T_B, tr.T_F):
        assert np.allclose(t @ t.T, np.eye(4), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    w=st.floats(0.0, 10.0),
    b=st.floats(0.01, 5.0),
    ratio=st.floats(-2.0, 2.0),
    theta=st.floats(0.0, 1.5),
)
def test_full_transform_diagonalizes(w, b, ratio, theta):
    assume(w > 1e-6 or abs(ratio) > 1e-6)
    p = DimensionlessParams(omega_v_bar=w, omega_b_bar=b, theta_nu=theta, mu12_ratio=ratio)
    u = transforms(p).flavour_to_B
    d = u @ build_flavour_hamiltonian(p) @ u.T
    assert np.abs(d - np.diag(np.diag(d))).max() < 1e-10
    assert np.allclose(np.diag(d), eigenfrequencies(p).levels, atol=1e-10)


def test_change_basis_round_trip():
    rng = np.random.default_rng(3)
    rho = random_state(rng)
    back = change_basis(change_basis(rho, BasisTag.B_EIGEN, PAPER), BasisTag.FLAVOUR, PAPER)
    assert back.basis is BasisTag.FLAVOUR
    assert np.abs(back.data - rho.data).max() < 1e-12


def test_change_basis_via_mass():
    rho = random_state(np.random.default_rng(4))
    via = change_basis(change_basis(rho, BasisTag.MASS, PAPER), BasisTag.B_EIGEN, PAPER)
    direct = change_basis(rho, BasisTag.B_EIGEN, PAPER)
    assert np.abs(via.data - direct.data).max() < 1e-12


def test_change_basis_rejects_unknown_tag():
    with pytest.raises((BasisMismatchError, ValueError, TypeError)):
        change_basis(pure_state(), "helicity", PAPER)
