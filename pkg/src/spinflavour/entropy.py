"""Entropic quantities of the spin-flavour state.

All entropies are in bits. The spin (helicity) index is the inner factor of
the flavour-basis ordering, with spin state ``|1>`` = R first and ``|0>`` = L
second, so ``rho[2*f + s, 2*f' + s']`` is ``rho^{(f f')}_{s s'}``.

The two spin measurements are the ``sigma_z`` eigenbasis ``{|1>, |0>}``
(register R) and the ``sigma_x`` eigenbasis ``|+-> = (|1> +- |0>)/sqrt(2)``
(register Q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .core import BasisMismatchError, BasisTag, DensityMatrix4

__all__ = [
    "MeasurementSet",
    "EntropyReport",
    "binary_entropy",
    "shannon_entropy",
    "vn_entropy",
    "reduce_flavour",
    "reduce_spin",
    "project_R",
    "project_Q",
    "dephase",
    "two_level_eigenvalues",
    "flavour_eigenvalues",
    "spin_eigenvalues",
    "R_eigenvalues",
    "Q_eigenvalues",
    "incompatibility",
    "conditional_entropies",
    "mutual_informations",
    "measured_mutual_information",
    "classical_correlation",
    "discord",
    "eur_terms",
    "entropy_report",
    "initial_report",
]

EIGEN_CLAMP = 1e-14
_TRACE_TOL = 1e-8
_PSD_TOL = 1e-8

_KET_1 = np.array([1.0, 0.0], dtype=complex)
_KET_0 = np.array([0.0, 1.0], dtype=complex)
SIGMA_Z_PROJECTORS = (np.outer(_KET_1, _KET_1), np.outer(_KET_0, _KET_0))
_PLUS = (_KET_1 + _KET_0) / math.sqrt(2.0)
_MINUS = (_KET_1 - _KET_0) / math.sqrt(2.0)
SIGMA_X_PROJECTORS = (np.outer(_PLUS, _PLUS.conj()), np.outer(_MINUS, _MINUS.conj()))


def _as_flavour(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix4):
        if rho.basis is not BasisTag.FLAVOUR:
            raise BasisMismatchError(f"expected a flavour-basis state, got {rho.basis.value}")
        return rho.data
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    return rho


# --- measurement sets --------------------------------------------------------


def _direction_projectors(polar: float, azimuth: float):
    up = np.array([math.cos(polar / 2), math.sin(polar / 2) * np.exp(1j * azimuth)])
    down = np.array([-math.sin(polar / 2) * np.exp(-1j * azimuth), math.cos(polar / 2)])
    return np.outer(up, up.conj()), np.outer(down, down.conj())


@dataclass(frozen=True)
class MeasurementSet:
    """Complete projective spin measurements considered when maximising J."""

    mode: str
    projectors: tuple = field(repr=False)

    def __post_init__(self):
        if not self.projectors:
            raise ValueError("measurement set is empty")
        for p0, p1 in self.projectors:
            if np.abs(p0 + p1 - np.eye(2)).max() > 1e-12:
                raise ValueError("projector pair does not resolve the identity")

    @classmethod
    def paper(cls) -> "MeasurementSet":
        return cls("paper", (SIGMA_Z_PROJECTORS, SIGMA_X_PROJECTORS))

    @classmethod
    def bloch_grid(cls, resolution: int = 64) -> "MeasurementSet":
        """``resolution`` azimuths x ``resolution // 2`` polar angles on a hemisphere.

        Opposite Bloch directions give the same measurement, so polar angles
        run over ``[0, pi/2]``. ``sigma_z`` (polar 0) and ``sigma_x`` (polar
        pi/2, azimuth 0) are always on the grid.
        """
        if resolution < 2:
            raise ValueError("bloch grid resolution must be at least 2")
        polars = np.linspace(0.0, math.pi / 2, max(2, resolution // 2))
        azimuths = np.arange(resolution) * (2 * math.pi / resolution)
        pairs = [_direction_projectors(0.0, 0.0)]
        pairs += [_direction_projectors(t, f) for t in polars[1:] for f in azimuths]
        return cls(f"bloch_grid({resolution})", tuple(pairs))

    def __len__(self):
        return len(self.projectors)


# --- entropies ---------------------------------------------------------------


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = np.where(p > EIGEN_CLAMP, p, 0.0)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])


def vn_entropy(m) -> float:
    """Von Neumann entropy in bits; eigenvalues below 1e-14 count as zero."""
    m = np.asarray(m, dtype=complex)
    tr = np.trace(m).real
    if abs(tr - 1.0) > _TRACE_TOL:
        raise ValueError(f"trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if lam.min() < -_PSD_TOL:
        raise ValueError(f"matrix is not positive (min eigenvalue {lam.min():.3e})")
    return shannon_entropy(lam)


# --- reductions and projections ----------------------------------------------


def reduce_flavour(rho) -> np.ndarray:
    """Flavour state after tracing out the spin."""
    return np.einsum("aibi->ab", _as_flavour(rho).reshape(2, 2, 2, 2))


def reduce_spin(rho) -> np.ndarray:
    """Spin state in ``(R, L)`` order after tracing out the flavour."""
    return np.einsum("aiaj->ij", _as_flavour(rho).reshape(2, 2, 2, 2))


def dephase(rho, pair) -> np.ndarray:
    """Non-selective projective spin measurement ``sum_x (I (x) P_x) rho (I (x) P_x)``."""
    rho = _as_flavour(rho)
    out = np.zeros((4, 4), dtype=complex)
    for p in pair:
        big = np.kron(np.eye(2), p)
        out += big @ rho @ big
    return out


def project_R(rho) -> np.ndarray:
    """Dephase in the ``sigma_z`` basis: helicity-off-diagonal entries vanish."""
    out = _as_flavour(rho).copy()
    out[0::2, 1::2] = 0.0
    out[1::2, 0::2] = 0.0
    return out


def project_Q(rho) -> np.ndarray:
    """Dephase in the ``sigma_x`` basis."""
    return dephase(rho, SIGMA_X_PROJECTORS)


def _spin_blocks(rho):
    # rho^{(f f')}_{s s'} as an array indexed [f, f', s, s']
    return _as_flavour(rho).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)


def two_level_eigenvalues(aa: float, bb: float, ab: complex) -> np.ndarray:
    """Closed-form eigenvalues ``(+, -)`` of ``[[aa, ab], [ab*, bb]]``."""
    mean = 0.5 * (aa + bb)
    half = 0.5 * math.sqrt((aa - bb) ** 2 + 4.0 * abs(ab) ** 2)
    return np.array([mean + half, mean - half])


def flavour_eigenvalues(rho) -> np.ndarray:
    m = reduce_flavour(rho)
    return two_level_eigenvalues(m[0, 0].real, m[1, 1].real, m[0, 1])


def spin_eigenvalues(rho) -> np.ndarray:
    m = reduce_spin(rho)
    return two_level_eigenvalues(m[0, 0].real, m[1, 1].real, m[0, 1])


def R_eigenvalues(rho) -> np.ndarray:
    """Spectrum of the sigma_z-dephased state: the ``|1>`` block, then ``|0>``."""
    blk = _spin_blocks(rho)
    out = []
    for s in (0, 1):
        out.extend(two_level_eigenvalues(blk[0, 0, s, s].real, blk[1, 1, s, s].real, blk[0, 1, s, s]))
    return np.array(out)


def Q_eigenvalues(rho) -> np.ndarray:
    """Spectrum of the sigma_x-dephased state: the ``|+>`` block, then ``|->``."""
    blk = _spin_blocks(rho)
    diag = blk[..., 0, 0] + blk[..., 1, 1]
    cross = blk[..., 1, 0] + blk[..., 0, 1]
    out = []
    for sign in (1.0, -1.0):
        m = 0.5 * (diag + sign * cross)
        out.extend(two_level_eigenvalues(m[0, 0].real, m[1, 1].real, m[0, 1]))
    return np.array(out)


def incompatibility(pair_a=SIGMA_Z_PROJECTORS, pair_b=SIGMA_X_PROJECTORS) -> float:
    """``-2 log2 c`` with ``c`` the largest overlap between the two eigenbases."""
    vecs_a = [np.linalg.eigh(p)[1][:, -1] for p in pair_a]
    vecs_b = [np.linalg.eigh(p)[1][:, -1] for p in pair_b]
    c = max(abs(np.vdot(a, b)) for a in vecs_a for b in vecs_b)
    return -2.0 * math.log2(c)


# --- information measures ----------------------------------------------------


def conditional_entropies(rho) -> dict[str, float]:
    rho = _as_flavour(rho)
    s_nu = vn_entropy(reduce_flavour(rho))
    return {
        "sigma": vn_entropy(rho) - s_nu,
        "R": vn_entropy(project_R(rho)) - s_nu,
        "Q": vn_entropy(project_Q(rho)) - s_nu,
    }


def _spin_outcome_probabilities(rho, pair) -> np.ndarray:
    rs = reduce_spin(rho)
    return np.array([np.trace(p @ rs).real for p in pair])


def measured_mutual_information(rho, pair) -> float:
    """``I(X, nu)`` for the post-measurement state of the spin measurement ``pair``."""
    rho = _as_flavour(rho)
    s_x = shannon_entropy(_spin_outcome_probabilities(rho, pair))
    s_nu = vn_entropy(reduce_flavour(rho))
    return s_x + s_nu - vn_entropy(dephase(rho, pair))


def mutual_informations(rho) -> dict[str, float]:
    """``I(sigma, nu)``, ``I(sigma_z, nu)`` and ``I(sigma_x, nu)``."""
    rho = _as_flavour(rho)
    cond = conditional_entropies(rho)
    s_z = shannon_entropy(_spin_outcome_probabilities(rho, SIGMA_Z_PROJECTORS))
    s_x = shannon_entropy(_spin_outcome_probabilities(rho, SIGMA_X_PROJECTORS))
    return {
        "sigma": vn_entropy(reduce_spin(rho)) - cond["sigma"],
        "sigma_z": s_z - cond["R"],
        "sigma_x": s_x - cond["Q"],
    }


def classical_correlation(rho, ms: MeasurementSet | None = None) -> float:
    ms = ms or MeasurementSet.paper()
    if len(ms) == 0:
        raise ValueError("measurement set is empty")
    return max(measured_mutual_information(rho, pair) for pair in ms.projectors)


def discord(rho, ms: MeasurementSet | None = None) -> float:
    """Raw discord ``I(sigma, nu) - J``; may dip below zero by round-off."""
    return mutual_informations(rho)["sigma"] - classical_correlation(rho, ms)


def eur_terms(rho, ms: MeasurementSet | None = None) -> dict[str, float]:
    cond = conditional_entropies(rho)
    j = classical_correlation(rho, ms)
    d = mutual_informations(rho)["sigma"] - j
    lhs = cond["R"] + cond["Q"]
    rhs = incompatibility() + cond["sigma"] + max(0.0, d - j)
    return {"lhs": lhs, "rhs": rhs, "d_eur": lhs - rhs}


# --- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class EntropyReport:
    tau: float
    S_full: float
    S_nu: float
    S_sigma: float
    S_Rnu: float
    S_Qnu: float
    S_sigma_given_nu: float
    S_R_given_nu: float
    S_Q_given_nu: float
    I_sigma_nu: float
    I_sigmaz_nu: float
    I_sigmax_nu: float
    J_classical: float
    D_discord: float
    eur_lhs: float
    eur_rhs: float
    d_eur: float
    S_sigmaz: float
    S_sigmax: float
    lam: np.ndarray = field(repr=False)
    lam_nu: np.ndarray = field(repr=False)
    lam_sigma: np.ndarray = field(repr=False)
    lam_R: np.ndarray = field(repr=False)
    lam_Q: np.ndarray = field(repr=False)

    @property
    def D_discord_clamped(self) -> float:
        return max(0.0, self.D_discord)

    @property
    def incompatibility_term(self) -> float:
        return self.eur_rhs - self.S_sigma_given_nu - max(0.0, self.D_discord - self.J_classical)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def entropy_report(
    rho,
    tau: float = 0.0,
    ms: MeasurementSet | None = None,
    r_source=None,
    q_source=None,
) -> EntropyReport:
    """Every entropic quantity of ``rho`` at one time.

    ``r_source`` / ``q_source`` replace ``rho`` as the state measured by the
    R / Q register (sequential-measurement mode); by default both registers
    measure ``rho`` itself.
    """
    rho = _as_flavour(rho)
    ms = ms or MeasurementSet.paper()
    r_src = rho if r_source is None else _as_flavour(r_source)
    q_src = rho if q_source is None else _as_flavour(q_source)

    s_full = vn_entropy(rho)
    s_nu = vn_entropy(reduce_flavour(rho))
    s_sigma = vn_entropy(reduce_spin(rho))
    s_rnu = vn_entropy(project_R(r_src))
    s_qnu = vn_entropy(project_Q(q_src))
    s_sigmaz = shannon_entropy(_spin_outcome_probabilities(r_src, SIGMA_Z_PROJECTORS))
    s_sigmax = shannon_entropy(_spin_outcome_probabilities(q_src, SIGMA_X_PROJECTORS))

    cond_sigma = s_full - s_nu
    cond_r = s_rnu - vn_entropy(reduce_flavour(r_src))
    cond_q = s_qnu - vn_entropy(reduce_flavour(q_src))
    i_sigma = s_sigma - cond_sigma
    i_z = s_sigmaz - cond_r
    i_x = s_sigmax - cond_q
    if ms.mode == "paper":
        j = max(i_z, i_x)
    else:
        j = classical_correlation(rho, ms)
    d = i_sigma - j
    lhs = cond_r + cond_q
    rhs = incompatibility() + cond_sigma + max(0.0, d - j)
    return EntropyReport(
        tau=float(tau),
        S_full=s_full,
        S_nu=s_nu,
        S_sigma=s_sigma,
        S_Rnu=s_rnu,
        S_Qnu=s_qnu,
        S_sigma_given_nu=cond_sigma,
        S_R_given_nu=cond_r,
        S_Q_given_nu=cond_q,
        I_sigma_nu=i_sigma,
        I_sigmaz_nu=i_z,
        I_sigmax_nu=i_x,
        J_classical=j,
        D_discord=d,
        eur_lhs=lhs,
        eur_rhs=rhs,
        d_eur=lhs - rhs,
        S_sigmaz=s_sigmaz,
        S_sigmax=s_sigmax,
        lam=np.linalg.eigvalsh(rho)[::-1],
        lam_nu=flavour_eigenvalues(rho),
        lam_sigma=spin_eigenvalues(rho),
        lam_R=R_eigenvalues(r_src),
        lam_Q=Q_eigenvalues(q_src),
    )


def initial_report(a) -> EntropyReport:
    """Closed-form report for the diagonal mixture with weights ``a1..a4`` at tau = 0.

    Weights follow ``a1 |e L> + a2 |mu L> + a3 |e R> + a4 |mu R>``. Uses only
    the t = 0 identities, so it serves as an independent check of
    :func:`entropy_report`.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (4,) or (a < 0).any() or abs(a.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must be a point of the 4-simplex, got {a}")
    a1, a2, a3, a4 = a
    lam1, lam2, lam3, lam4 = a3, a1, a4, a2
    p_nu = lam1 + lam2
    p_sigma = lam1 + lam3
    s0 = shannon_entropy(a)
    h_nu, h_sigma = binary_entropy(p_nu), binary_entropy(p_sigma)

    cond_sigma = s0 - h_nu
    i_sigma = h_sigma + h_nu - s0
    # I(sigma_x, nu) = 0, so J = I(sigma_z, nu) = I(sigma, nu) and D = 0
    j = i_sigma

    def pm(x, y):
        return np.array([max(x, y), min(x, y)])

    half_e, half_mu = 0.5 * p_nu, 0.5 * (lam3 + lam4)
    return EntropyReport(
        tau=0.0,
        S_full=s0,
        S_nu=h_nu,
        S_sigma=h_sigma,
        S_Rnu=s0,
        S_Qnu=1.0 + h_nu,
        S_sigma_given_nu=cond_sigma,
        S_R_given_nu=cond_sigma,
        S_Q_given_nu=1.0,
        I_sigma_nu=i_sigma,
        I_sigmaz_nu=i_sigma,
        I_sigmax_nu=0.0,
        J_classical=j,
        D_discord=0.0,
        eur_lhs=cond_sigma + 1.0,
        eur_rhs=1.0 + cond_sigma,
        d_eur=0.0,
        S_sigmaz=h_sigma,
        S_sigmax=1.0,
        lam=np.sort(a)[::-1],
        lam_nu=pm(p_nu, 1.0 - p_nu),
        lam_sigma=pm(p_sigma, 1.0 - p_sigma),
        lam_R=np.concatenate([pm(lam1, lam3), pm(lam2, lam4)]),
        lam_Q=np.concatenate([pm(half_e, half_mu), pm(half_e, half_mu)]),
    )
