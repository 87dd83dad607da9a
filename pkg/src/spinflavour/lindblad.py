"""Exact propagation through the dissipative channel, and an RK4 cross-check.

In the eigenbasis of the effective Hamiltonian the dissipator acts as
``V = I (x) v`` with ``v = sin(beta) sigma_1 + cos(beta) sigma_3``, so the 16
master-equation components split into four 2x2 quadrants. Each quadrant is
written as ``phase * (r0 I + r . sigma)``; ``r0`` is conserved and ``r`` obeys
``dr/dtau = M r`` with a real 3x3 generator. Time is measured in units of
``1/(2 w^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .core import (
    BasisMismatchError,
    BasisTag,
    DensityMatrix4,
    DimensionlessParams,
    build_flavour_hamiltonian,
    transforms,
)

__all__ = [
    "DissipatorSpec",
    "QuadrantState",
    "PropagatorM",
    "Trajectory",
    "PAULI",
    "build_M",
    "decompose_quadrants",
    "recompose_quadrants",
    "propagate_quadrant",
    "evolve",
    "evolve_oracle",
    "evolve_oracle_many",
]

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

QUADRANTS = ((1, 1), (1, 2), (2, 1), (2, 2))
_EPSILON = {(1, 1): 0, (2, 2): 0, (1, 2): 1, (2, 1): -1}

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class DissipatorSpec:
    """Direction and strength of the stochastic-field coupling.

    ``w2`` multiplies the dissipative part of the generator relative to the
    natural time unit; 1 is the standard channel and 0 switches it off.
    """

    beta: float = math.pi / 4
    w2: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.beta <= math.pi / 2:
            raise ValueError(f"beta must lie in [0, pi/2], got {self.beta}")
        if self.w2 < 0:
            raise ValueError(f"w2 must be non-negative, got {self.w2}")

    @property
    def v_vector(self) -> np.ndarray:
        return np.array([math.sin(self.beta), 0.0, math.cos(self.beta)])

    @property
    def v_matrix(self) -> np.ndarray:
        return np.einsum("i,ijk->jk", self.v_vector, PAULI)


@dataclass(frozen=True)
class QuadrantState:
    """One 2x2 minor of the B-basis density matrix, ``phase * (r0 I + r . sigma)``."""

    quadrant: tuple[int, int]
    r0: complex
    r_vec: np.ndarray
    phase: complex = 1.0

    def minor(self) -> np.ndarray:
        return self.phase * (self.r0 * np.eye(2) + np.einsum("i,ijk->jk", self.r_vec, PAULI))


@dataclass(frozen=True)
class PropagatorM:
    """Real 3x3 generator of the Bloch-vector dynamics and its spectrum."""

    M: np.ndarray
    nu: np.ndarray = field(init=False)
    degenerate: bool = field(init=False)

    def __post_init__(self):
        nu = np.linalg.eigvals(self.M)
        scale = max(1.0, float(np.abs(nu).max()))
        gaps = [abs(nu[i] - nu[j]) for i in range(3) for j in range(i + 1, 3)]
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "degenerate", min(gaps) < DEGENERACY_TOL * scale)

    def moments(self, r0: np.ndarray):
        """``(B0, B1, B2) = (r, M r, M^2 r)``."""
        b0 = np.asarray(r0, dtype=float)
        b1 = self.M @ b0
        return b0, b1, self.M @ b1

    def constants(self, r0: np.ndarray) -> np.ndarray:
        """Integration constants ``C[i, k]`` with ``r_i(tau) = sum_k C[i,k] exp(nu_k tau)``."""
        if self.degenerate:
            raise ValueError("eigenvalues of M are degenerate; use the matrix exponential")
        b0, b1, b2 = self.moments(r0)
        n1, n2, n3 = self.nu
        c = np.empty((3, 3), dtype=complex)
        c[:, 0] = (b0 * n2 * n3 - b1 * (n2 + n3) + b2) / ((n1 - n2) * (n1 - n3))
        c[:, 1] = (b0 * n1 * n3 - b1 * (n1 + n3) + b2) / ((n2 - n1) * (n2 - n3))
        c[:, 2] = (b0 * n1 * n2 - b1 * (n1 + n2) + b2) / ((n3 - n1) * (n3 - n2))
        return c

    def solve(self, r0: np.ndarray, taus) -> np.ndarray:
        """Real Bloch vectors at each ``tau``; shape ``(len(taus), 3)``."""
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        r0 = np.asarray(r0, dtype=float)
        if self.degenerate:
            return np.array([expm(self.M * t) @ r0 for t in taus])
        c = self.constants(r0)
        return np.einsum("ik,tk->ti", c, np.exp(np.outer(taus, self.nu))).real

    def apply(self, r0: np.ndarray, taus) -> np.ndarray:
        """As :meth:`solve` but for complex Bloch vectors (off-diagonal quadrants)."""
        r0 = np.asarray(r0, dtype=complex)
        out = self.solve(r0.real, taus).astype(complex)
        if np.any(r0.imag):
            out += 1j * self.solve(r0.imag, taus)
        return out


def build_M(
    omega_b_bar: float, beta: float, w2: float = 1.0, convention: str = "master"
) -> PropagatorM:
    """Generator of ``dr/dtau = M r`` inside each quadrant.

    ``convention="master"`` is the generator implied by the master equation
    with ``V = I (x) v``: rotation ``dr1 = -w r2, dr2 = +w r1`` from the level
    splitting and damping ``-(I - n n^T)`` for the unit vector ``n``.

    ``convention="printed"`` reproduces the closed form with rotation
    ``+w r2, -w r1`` and ``-cos^2(beta)`` damping on ``r2``. It is kept for
    comparison only: it does not follow from the master equation and does
    not preserve positivity of the full 4x4 state.
    """
    if omega_b_bar < 0:
        raise ValueError(f"omega_b_bar must be non-negative, got {omega_b_bar}")
    if not 0.0 <= beta <= math.pi / 2:
        raise ValueError(f"beta must lie in [0, pi/2], got {beta}")
    c, s = math.cos(beta), math.sin(beta)
    w = omega_b_bar
    if convention == "master":
        rot = np.array([[0.0, -w, 0.0], [w, 0.0, 0.0], [0.0, 0.0, 0.0]])
        n = np.array([s, 0.0, c])
        damp = -(np.eye(3) - np.outer(n, n))
    elif convention == "printed":
        rot = np.array([[0.0, w, 0.0], [-w, 0.0, 0.0], [0.0, 0.0, 0.0]])
        damp = np.array([[-c * c, 0.0, s * c], [0.0, -c * c, 0.0], [s * c, 0.0, -s * s]])
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return PropagatorM(rot + w2 * damp)


def _as_b_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix4):
        if rho.basis is not BasisTag.B_EIGEN:
            raise BasisMismatchError(f"expected a B-eigenbasis matrix, got {rho.basis.value}")
        return rho.data
    return np.asarray(rho, dtype=complex)


def _block(rho: np.ndarray, a: int, b: int) -> np.ndarray:
    return rho[2 * (a - 1) : 2 * a, 2 * (b - 1) : 2 * b]


def decompose_quadrants(rho_B) -> dict[tuple[int, int], QuadrantState]:
    """Split a B-basis matrix into its four Pauli-expanded minors."""
    rho = _as_b_matrix(rho_B)
    out = {}
    for a, b in QUADRANTS:
        q = _block(rho, a, b)
        r0 = 0.5 * np.trace(q)
        r = 0.5 * np.einsum("jk,ikj->i", q, PAULI)
        if a == b:
            r0, r = r0.real, r.real
        out[(a, b)] = QuadrantState((a, b), r0, r)
    return out


def recompose_quadrants(quads) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    for (a, b), q in quads.items():
        rho[2 * (a - 1) : 2 * a, 2 * (b - 1) : 2 * b] = q.minor()
    return rho


def propagate_quadrant(
    q: QuadrantState, M: PropagatorM, tau: float, omega_n_bar: float
) -> QuadrantState:
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    r = M.apply(q.r_vec, [tau])[0]
    if q.quadrant[0] == q.quadrant[1]:
        r = r.real
    phase = q.phase * np.exp(1j * _EPSILON[q.quadrant] * omega_n_bar * tau)
    return QuadrantState(q.quadrant, q.r0, r, phase)


@dataclass(frozen=True)
class Trajectory:
    """Density matrices on a tau grid; ``rho`` has shape ``(len(tau), 4, 4)``."""

    tau: np.ndarray
    rho: np.ndarray
    basis: BasisTag = BasisTag.FLAVOUR

    def __len__(self):
        return len(self.tau)

    def __getitem__(self, i) -> DensityMatrix4:
        return DensityMatrix4(self.rho[i], self.basis)


def _check_grid(tau_grid) -> np.ndarray:
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise ValueError("tau grid must be a non-empty 1-d sequence")
    if taus[0] != 0.0:
        raise ValueError("tau grid must start at 0")
    if np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be strictly increasing")
    return taus


def _as_flavour_matrix(rho0) -> np.ndarray:
    if isinstance(rho0, DensityMatrix4):
        if rho0.basis is not BasisTag.FLAVOUR:
            raise BasisMismatchError(f"expected a flavour-basis state, got {rho0.basis.value}")
        return rho0.data
    return DensityMatrix4(rho0).data


def evolve(
    rho0,
    params: DimensionlessParams,
    dissipator: DissipatorSpec | None = None,
    tau_grid=(0.0,),
    propagator: PropagatorM | None = None,
) -> Trajectory:
    """Closed-form trajectory in the flavour basis.

    ``propagator`` overrides the generator built from ``params`` and
    ``dissipator`` (used for fault-injection checks).
    """
    taus = _check_grid(tau_grid)
    dissipator = dissipator or DissipatorSpec(params.beta)
    prop = propagator or build_M(params.omega_b_bar, dissipator.beta, dissipator.w2)
    u = transforms(params).flavour_to_B
    rho_b0 = u @ _as_flavour_matrix(rho0) @ u.T
    quads = decompose_quadrants(rho_b0)
    w_n = params.omega_n_bar

    out = np.zeros((len(taus), 4, 4), dtype=complex)
    for a, b in ((1, 1), (2, 2), (1, 2)):
        q = quads[(a, b)]
        r = prop.apply(q.r_vec, taus)
        if a == b:
            r = r.real
        minors = q.r0 * np.eye(2)[None] + np.einsum("ti,ijk->tjk", r, PAULI)
        minors = minors * np.exp(1j * _EPSILON[(a, b)] * w_n * taus)[:, None, None]
        out[:, 2 * (a - 1) : 2 * a, 2 * (b - 1) : 2 * b] = minors
    out[:, 2:, :2] = np.conj(np.swapaxes(out[:, :2, 2:], 1, 2))
    return Trajectory(taus, u.T @ out @ u, BasisTag.FLAVOUR)


def evolve_oracle_many(
    rho0s,
    params: DimensionlessParams,
    dissipator: DissipatorSpec | None = None,
    tau_grid=(0.0,),
    step: float = 1e-3,
    hamiltonian: np.ndarray | None = None,
) -> list[Trajectory]:
    """Fixed-step RK4 on the flavour-basis master equation, batched over states.

    Each grid interval is split into the smallest number of equal substeps
    not longer than ``step``. ``hamiltonian`` replaces the default
    flavour-basis Hamiltonian (in units of ``2 w^2``).
    """
    taus = _check_grid(tau_grid)
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if len(taus) > 1 and step > np.diff(taus).min() * (1 + 1e-12):
        raise ValueError("step must not exceed the grid spacing")
    dissipator = dissipator or DissipatorSpec(params.beta)

    h = build_flavour_hamiltonian(params) if hamiltonian is None else np.asarray(hamiltonian)
    u = transforms(params).flavour_to_B
    v = u.T @ np.kron(np.eye(2), dissipator.v_matrix) @ u
    v2 = v @ v
    g = 0.25 * dissipator.w2

    def rhs(rho):
        return (
            -1j * (h @ rho - rho @ h)
            - g * (rho @ v2 + v2 @ rho)
            + 2.0 * g * (v @ rho @ v)
        )

    rho = np.array([_as_flavour_matrix(r) for r in rho0s], dtype=complex)
    out = np.empty((len(taus), *rho.shape), dtype=complex)
    out[0] = rho
    for i in range(1, len(taus)):
        span = taus[i] - taus[i - 1]
        n = max(1, math.ceil(span / step - 1e-9))
        dt = span / n
        for _ in range(n):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * dt * k1)
            k3 = rhs(rho + 0.5 * dt * k2)
            k4 = rhs(rho + dt * k3)
            rho = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = rho
    return [Trajectory(taus, out[:, j], BasisTag.FLAVOUR) for j in range(rho.shape[0])]


def evolve_oracle(
    rho0,
    params: DimensionlessParams,
    dissipator: DissipatorSpec | None = None,
    tau_grid=(0.0,),
    step: float = 1e-3,
    hamiltonian: np.ndarray | None = None,
) -> Trajectory:
    return evolve_oracle_many([rho0], params, dissipator, tau_grid, step, hamiltonian)[0]
