"""Domain types, Hamiltonians and the diagonalisation chain.

State ordering
--------------
Every 4x4 matrix lives on flavour (outer) x helicity (inner). In the flavour
basis the canonical order is ``(e,R), (e,L), (mu,R), (mu,L)``; the helicity
label ``R`` is the spin state ``|1>`` and ``L`` is ``|0>``. The mass basis
uses ``(1,+), (1,-), (2,+), (2,-)``.

Basis conventions
-----------------
``rho_f = T_F rho_m T_F^T``  and  ``rho_B = T_B rho_m T_B^T``.

The mass->flavour direction of ``T_F`` is the one that maps the mass-basis
vacuum term ``diag(-w, -w, w, w)`` onto the flavour-basis vacuum Hamiltonian
and the mass-basis magnetic moments onto the rotated flavour moments, so the
three Hamiltonian builders below are mutually consistent.

Frequencies
-----------
``omega_nu = dm2 / (4 E)`` sits on the diagonal of the mass-basis Hamiltonian.
With equal diagonal moments ``mu11 == mu22`` the levels are
``E_{1,2} = (-w_N +- w_B)/2`` and ``E_{3,4} = (w_N +- w_B)/2`` with
``w_B = 2 mu11 B`` and ``w_N = sqrt(4 omega_nu**2 + (2 mu12 B)**2)``; for fully
equal moments this is ``w_N = sqrt(4 omega_nu**2 + w_B**2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MU_BOHR_EV_PER_GAUSS",
    "PARSEC_INV_EV",
    "FERMI_CONSTANT_EV2",
    "INV_CM3_TO_EV3",
    "SIN2_THETA_SOLAR",
    "BasisTag",
    "BasisMismatchError",
    "DegenerateAngleError",
    "DensityMatrix4",
    "PhysicalParams",
    "DimensionlessParams",
    "Eigenfrequencies",
    "Transforms",
    "state_index",
    "pure_state",
    "diagonal_mixture",
    "theta_from_sin2",
    "build_vacuum_hamiltonian",
    "build_matter_hamiltonian",
    "flavour_moments",
    "build_magnetic_hamiltonian",
    "build_effective_mass_hamiltonian",
    "build_flavour_hamiltonian",
    "magnetic_angle",
    "eigenfrequencies",
    "characteristic_levels",
    "transforms",
    "change_basis",
]

MU_BOHR_EV_PER_GAUSS = 5.79e-9
PARSEC_INV_EV = 1.5637e23
FERMI_CONSTANT_EV2 = 1.1663787e-23
# (hbar c)^3 with hbar c = 1.973269804e-5 eV cm
INV_CM3_TO_EV3 = 1.973269804e-5**3
SIN2_THETA_SOLAR = 0.297

_HERMITIAN_TOL = 1e-12
_TRACE_TOL = 1e-10
_PSD_TOL = 1e-8


class BasisTag(enum.Enum):
    FLAVOUR = "flavour"
    MASS = "mass"
    B_EIGEN = "B"


class BasisMismatchError(ValueError):
    """Raised when an operation receives a matrix in the wrong basis."""


class DegenerateAngleError(ValueError):
    """Raised when the magnetic rotation angle is undefined."""


def theta_from_sin2(sin2: float) -> float:
    """Mixing angle in ``[0, pi/2)`` from ``sin^2(theta)``."""
    if not 0.0 <= sin2 < 1.0:
        raise ValueError(f"sin^2(theta) must lie in [0, 1), got {sin2}")
    return math.asin(math.sqrt(sin2))


_FLAVOURS = ("e", "mu")
_HELICITIES = ("R", "L")


def state_index(flavour: str, helicity: str) -> int:
    """Position of ``|nu_flavour^helicity>`` in the canonical flavour ordering."""
    try:
        return 2 * _FLAVOURS.index(flavour) + _HELICITIES.index(helicity)
    except ValueError:
        raise ValueError(f"unknown state ({flavour!r}, {helicity!r})") from None


@dataclass(frozen=True)
class DensityMatrix4:
    """Hermitian, unit-trace, positive 4x4 matrix tagged with its basis."""

    data: np.ndarray
    basis: BasisTag = BasisTag.FLAVOUR
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if not isinstance(self.basis, BasisTag):
            raise TypeError(f"basis must be a BasisTag, got {self.basis!r}")
        if self.check:
            herm = np.abs(data - data.conj().T).max()
            if herm > _HERMITIAN_TOL:
                raise ValueError(f"matrix is not Hermitian (residual {herm:.3e})")
            tr = np.trace(data).real
            if abs(tr - 1.0) > _TRACE_TOL:
                raise ValueError(f"trace is {tr!r}, expected 1")
            lmin = np.linalg.eigvalsh(data).min()
            if lmin < -_PSD_TOL:
                raise ValueError(f"matrix is not positive (min eigenvalue {lmin:.3e})")

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.data)[::-1]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def pure_state(flavour: str = "e", helicity: str = "R") -> DensityMatrix4:
    rho = np.zeros((4, 4), dtype=complex)
    i = state_index(flavour, helicity)
    rho[i, i] = 1.0
    return DensityMatrix4(rho)


def diagonal_mixture(a) -> DensityMatrix4:
    """Flavour-basis mixture ``a1 |e L> + a2 |mu L> + a3 |e R> + a4 |mu R>``."""
    a = np.asarray(a, dtype=float)
    if a.shape != (4,):
        raise ValueError("need exactly four mixture weights")
    if (a < 0).any() or abs(a.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must lie on the probability simplex, got {a}")
    diag = np.empty(4)
    diag[state_index("e", "L")] = a[0]
    diag[state_index("mu", "L")] = a[1]
    diag[state_index("e", "R")] = a[2]
    diag[state_index("mu", "R")] = a[3]
    return DensityMatrix4(np.diag(diag))


@dataclass(frozen=True)
class PhysicalParams:
    """Physical inputs in natural units (eV, Gauss, pc, cm^-3).

    ``mu_jk`` holds the mass-basis moments ``(mu11, mu22, mu12)`` in Bohr
    magnetons. ``eta`` is the stochastic-to-regular field power ratio and
    ``L0`` the field correlation length.
    """

    delta_m2: float = 7.37e-5
    E_nu: float = 1e20
    theta_nu: float = field(default_factory=lambda: theta_from_sin2(SIN2_THETA_SOLAR))
    B_perp: float = 2.93e-6
    B_par: float = 0.0
    mu_jk: tuple[float, float, float] = (2.6e-12, 2.6e-12, 2.6e-12)
    gamma1: float = 1e20
    gamma2: float = 1e20
    n_e: float = 0.0
    n_n: float = 0.0
    G_F: float = FERMI_CONSTANT_EV2
    eta: float = 1.0
    L0: float = 50.0
    mu_B: float = MU_BOHR_EV_PER_GAUSS

    def __post_init__(self):
        object.__setattr__(self, "mu_jk", tuple(float(m) for m in self.mu_jk))
        if len(self.mu_jk) != 3:
            raise ValueError("mu_jk must hold (mu11, mu22, mu12)")
        if not self.E_nu > 0:
            raise ValueError(f"E_nu must be positive, got {self.E_nu}")
        if self.B_perp < 0:
            raise ValueError(f"B_perp must be non-negative, got {self.B_perp}")
        if not (self.gamma1 > 1 and self.gamma2 > 1):
            raise ValueError("Lorentz factors must exceed 1")
        if not 0.0 <= self.theta_nu < math.pi / 2:
            raise ValueError(f"theta_nu must lie in [0, pi/2), got {self.theta_nu}")
        if self.n_e < 0 or self.n_n < 0:
            raise ValueError("matter densities must be non-negative")
        if self.eta < 0 or self.L0 < 0:
            raise ValueError("eta and L0 must be non-negative")

    @property
    def omega_nu(self) -> float:
        """Vacuum frequency ``dm2 / (4 E)`` in eV."""
        return self.delta_m2 / (4.0 * self.E_nu)

    @property
    def gamma12(self) -> float:
        return 2.0 / (1.0 / self.gamma1 + 1.0 / self.gamma2)

    def moment_energies(self) -> tuple[float, float, float]:
        """``(mu11 B, mu22 B, mu12 B)`` in eV for the transverse field."""
        scale = self.mu_B * self.B_perp
        return tuple(m * scale for m in self.mu_jk)


@dataclass(frozen=True)
class DimensionlessParams:
    """Frequencies in units of ``2 w^2`` plus the two angles.

    ``mu12_ratio`` is ``mu12 / mu11`` (with ``mu11 == mu22``); the default 1
    is the equal-moments case.
    """

    omega_v_bar: float = 5.0
    omega_b_bar: float = 1.0
    beta: float = math.pi / 4
    theta_nu: float = field(default_factory=lambda: theta_from_sin2(SIN2_THETA_SOLAR))
    mu12_ratio: float = 1.0

    def __post_init__(self):
        if self.omega_b_bar < 0:
            raise ValueError(f"omega_b_bar must be non-negative, got {self.omega_b_bar}")
        if not 0.0 <= self.beta <= math.pi / 2:
            raise ValueError(f"beta must lie in [0, pi/2], got {self.beta}")
        if not 0.0 <= self.theta_nu < math.pi / 2:
            raise ValueError(f"theta_nu must lie in [0, pi/2), got {self.theta_nu}")

    @property
    def equal_moments(self) -> bool:
        return self.mu12_ratio == 1.0

    @property
    def omega_nu(self) -> float:
        return self.omega_v_bar

    @property
    def omega_n_bar(self) -> float:
        return math.hypot(2.0 * self.omega_v_bar, self.mu12_ratio * self.omega_b_bar)

    def moment_energies(self) -> tuple[float, float, float]:
        mu_b = 0.5 * self.omega_b_bar
        return (mu_b, mu_b, self.mu12_ratio * mu_b)


# --- Hamiltonians -----------------------------------------------------------


def build_vacuum_hamiltonian(p) -> np.ndarray:
    """Vacuum term in the flavour basis, ``omega * [[-c2 I, s2 I], [s2 I, c2 I]]``."""
    if isinstance(p, PhysicalParams) and not p.E_nu > 0:
        raise ValueError("E_nu must be positive")
    c2, s2 = math.cos(2 * p.theta_nu), math.sin(2 * p.theta_nu)
    return p.omega_nu * np.kron(np.array([[-c2, s2], [s2, c2]]), np.eye(2))


def build_matter_hamiltonian(p: PhysicalParams) -> np.ndarray:
    """Coherent forward scattering on electrons and neutrons (left-handed rows only).

    Densities are converted from cm^-3 to eV^3. The result is never part of
    the propagated Hamiltonian.
    """
    if p.n_e < 0 or p.n_n < 0:
        raise ValueError("matter densities must be non-negative")
    pref = p.G_F / math.sqrt(2.0) * INV_CM3_TO_EV3
    h = np.zeros((4, 4))
    h[state_index("e", "L"), state_index("e", "L")] = pref * (p.n_e - p.n_n / 2)
    h[state_index("mu", "L"), state_index("mu", "L")] = pref * (-p.n_n / 2)
    return h


def _rotate_moments(a11, a22, a12, theta):
    c, s = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    ee = a11 * c * c + a22 * s * s + a12 * s2
    emu = a12 * c2 + 0.5 * (a22 - a11) * s2
    mumu = a11 * s * s + a22 * c * c - a12 * s2
    return ee, emu, mumu


def flavour_moments(p: PhysicalParams) -> dict[str, float]:
    """Flavour-basis moments and the Lorentz-suppressed longitudinal moments.

    The ``*_over_gamma`` entries carry the sign of ``(mu/gamma)_{ll'}`` itself,
    i.e. they are minus the rotated combinations of ``mu_jk / gamma_jk``.
    """
    m11, m22, m12 = p.mu_jk
    ee, emu, mumu = _rotate_moments(m11, m22, m12, p.theta_nu)
    gee, gemu, gmumu = _rotate_moments(
        m11 / p.gamma1, m22 / p.gamma2, m12 / p.gamma12, p.theta_nu
    )
    return {
        "mu_ee": ee,
        "mu_emu": emu,
        "mu_mumu": mumu,
        "mu_over_gamma_ee": -gee,
        "mu_over_gamma_emu": -gemu,
        "mu_over_gamma_mumu": -gmumu,
    }


def _magnetic_matrix(ee, emu, mumu, g_ee=0.0, g_emu=0.0, g_mumu=0.0) -> np.ndarray:
    # transverse terms flip helicity; longitudinal terms (already multiplied
    # by -(mu/gamma) B_par) preserve it
    spin_flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.kron(np.array([[ee, emu], [emu, mumu]]), spin_flip) + np.kron(
        np.array([[g_ee, g_emu], [g_emu, g_mumu]]), np.eye(2)
    )


def build_magnetic_hamiltonian(p, drop_longitudinal: bool = False) -> np.ndarray:
    """Magnetic-moment interaction in the flavour basis.

    Accepts :class:`PhysicalParams` (energies in eV) or
    :class:`DimensionlessParams` (no longitudinal field).
    """
    if isinstance(p, DimensionlessParams):
        return _magnetic_matrix(*_rotate_moments(*p.moment_energies(), p.theta_nu))

    fm = flavour_moments(p)
    scale = p.mu_B * p.B_perp
    par = 0.0 if drop_longitudinal else p.mu_B * p.B_par
    return _magnetic_matrix(
        fm["mu_ee"] * scale,
        fm["mu_emu"] * scale,
        fm["mu_mumu"] * scale,
        -fm["mu_over_gamma_ee"] * par,
        -fm["mu_over_gamma_emu"] * par,
        -fm["mu_over_gamma_mumu"] * par,
    )


def build_effective_mass_hamiltonian(p) -> np.ndarray:
    """Vacuum plus transverse magnetic term in the mass basis."""
    w = p.omega_nu
    m11, m22, m12 = p.moment_energies()
    return np.array(
        [
            [-w, m11, 0.0, m12],
            [m11, -w, m12, 0.0],
            [0.0, m12, w, m22],
            [m12, 0.0, m22, w],
        ]
    )


def build_flavour_hamiltonian(p, include_matter: bool = False) -> np.ndarray:
    """Flavour-basis Hamiltonian used for propagation.

    Longitudinal magnetic terms are dropped. ``include_matter`` adds the
    matter term; the quadrant propagator is then no longer exact and only
    the numerical integrator applies.
    """
    h = build_vacuum_hamiltonian(p) + build_magnetic_hamiltonian(p, drop_longitudinal=True)
    if include_matter:
        if not isinstance(p, PhysicalParams):
            raise TypeError("the matter term needs physical parameters")
        h = h + build_matter_hamiltonian(p)
    return h


# --- diagonalisation ----------------------------------------------------------


def magnetic_angle(p) -> float:
    """Rotation angle completing the diagonalisation of the mass-basis Hamiltonian.

    Uses the two-argument arctangent so a negative denominator keeps the
    levels in ascending order inside each mass pair.
    """
    m11, m22, m12 = p.moment_energies()
    num = m12
    den = p.omega_nu - 0.5 * (m11 - m22)
    if num == 0.0 and den == 0.0:
        raise DegenerateAngleError("magnetic angle undefined: numerator and denominator vanish")
    return 0.5 * math.atan2(num, den)


def _require_equal_diagonal_moments(p):
    m11, m22, _ = p.moment_energies()
    if not math.isclose(m11, m22, rel_tol=1e-12, abs_tol=0.0) and not (m11 == m22 == 0.0):
        raise ValueError(
            "the two-step diagonalisation needs mu11 == mu22; "
            f"got mu11 B = {m11!r}, mu22 B = {m22!r}"
        )


@dataclass(frozen=True)
class Eigenfrequencies:
    omega_B: float
    omega_N: float
    levels: np.ndarray  # E1..E4 in the B-eigenbasis order
    kappa: np.ndarray  # same set, ascending


def eigenfrequencies(p) -> Eigenfrequencies:
    """Spin-field splitting, vacuum-magnetic splitting and the four levels."""
    _require_equal_diagonal_moments(p)
    m11, _, m12 = p.moment_energies()
    w_b = 2.0 * m11
    w_n = 2.0 * math.hypot(p.omega_nu, m12)
    levels = 0.5 * np.array([-w_n + w_b, -w_n - w_b, w_n + w_b, w_n - w_b])
    return Eigenfrequencies(w_b, w_n, levels, np.sort(levels))


def characteristic_levels(omega_nu: float, mu_b: float) -> np.ndarray:
    """``+-[sqrt(omega^2 + (mu B)^2) +- mu B]`` for equal moments, ascending."""
    r = math.hypot(omega_nu, mu_b)
    return np.sort(np.array([r + mu_b, r - mu_b, -(r + mu_b), -(r - mu_b)]))


@dataclass(frozen=True)
class Transforms:
    T_S: np.ndarray
    T_b: np.ndarray
    T_B: np.ndarray
    T_F: np.ndarray

    @property
    def flavour_to_B(self) -> np.ndarray:
        """``U`` with ``rho_B = U rho_f U^T``."""
        return self.T_B @ self.T_F.T


_T_S = np.kron(np.eye(2), np.array([[1.0, 1.0], [1.0, -1.0]])) / math.sqrt(2.0)


def transforms(p) -> Transforms:
    _require_equal_diagonal_moments(p)
    theta_b = magnetic_angle(p)
    cb, sb = math.cos(theta_b), math.sin(theta_b)
    sigma3 = np.diag([1.0, -1.0])
    t_b = np.block([[cb * np.eye(2), -sb * sigma3], [sb * sigma3, cb * np.eye(2)]])
    cn, sn = math.cos(p.theta_nu), math.sin(p.theta_nu)
    t_f = np.kron(np.array([[cn, sn], [-sn, cn]]), np.eye(2))
    return Transforms(_T_S.copy(), t_b, t_b @ _T_S, t_f)


def _basis_matrix(tag: BasisTag, tr: Transforms) -> np.ndarray:
    # maps flavour coordinates to `tag` coordinates
    if tag is BasisTag.FLAVOUR:
        return np.eye(4)
    if tag is BasisTag.MASS:
        return tr.T_F.T
    if tag is BasisTag.B_EIGEN:
        return tr.flavour_to_B
    raise BasisMismatchError(f"unknown basis {tag!r}")


def change_basis(rho: DensityMatrix4, to: BasisTag, p) -> DensityMatrix4:
    if not isinstance(to, BasisTag) or not isinstance(rho.basis, BasisTag):
        raise BasisMismatchError(f"unknown basis {to!r}")
    if rho.basis is to:
        return rho
    tr = transforms(p)
    u = _basis_matrix(to, tr) @ _basis_matrix(rho.basis, tr).T
    return DensityMatrix4(u @ rho.data @ u.T, to, check=rho.check)
