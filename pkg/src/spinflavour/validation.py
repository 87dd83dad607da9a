"""Acceptance checks shared by the ``validate`` subcommand and the test suite."""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    DimensionlessParams,
    build_flavour_hamiltonian,
    characteristic_levels,
    diagonal_mixture,
    eigenfrequencies,
    pure_state,
    transforms,
)
from .entropy import (
    Q_eigenvalues,
    R_eigenvalues,
    binary_entropy,
    entropy_report,
    flavour_eigenvalues,
    incompatibility,
    project_Q,
    project_R,
    reduce_flavour,
    shannon_entropy,
    spin_eigenvalues,
    reduce_spin,
)
from .lindblad import (
    DissipatorSpec,
    PropagatorM,
    Trajectory,
    build_M,
    evolve,
    evolve_oracle_many,
)
from .scenario import check_trajectory, paper_config, run, write_timeseries

__all__ = [
    "CriterionResult",
    "FAULTS",
    "random_density_matrices",
    "r0_drift",
    "criterion_t0_identities",
    "criterion_incompatibility",
    "criterion_oracle",
    "criterion_conservation",
    "criterion_eur",
    "criterion_discord",
    "criterion_thermalization",
    "criterion_spectra",
    "criterion_determinism",
    "run_all",
]

SEED = 20240611
N_RANDOM_STATES = 20
ORACLE_GRID_STEP = 0.1
ORACLE_TAU_MAX = 20.0
ORACLE_RK_STEP = 1e-3
LATE_WINDOW = (15.0, 20.0)
FAULTS = ("m-sign",)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    metric: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{self.name} {'PASS' if self.passed else 'FAIL'} {self.metric:.6g}"


def random_density_matrices(n: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank states drawn from the Ginibre ensemble."""
    g = rng.normal(size=(n, 4, 4)) + 1j * rng.normal(size=(n, 4, 4))
    rho = g @ np.conj(np.swapaxes(g, 1, 2))
    return rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]


def _propagator(params: DimensionlessParams, fault: str | None) -> PropagatorM:
    prop = build_M(params.omega_b_bar, params.beta)
    if fault is None:
        return prop
    if fault == "m-sign":
        m = prop.M.copy()
        m[0, 1], m[1, 0] = -m[0, 1], -m[1, 0]
        return PropagatorM(m)
    raise ValueError(f"unknown fault {fault!r}")


def r0_drift(traj: Trajectory, params: DimensionlessParams) -> float:
    """Largest change of each quadrant's ``r0`` along a trajectory.

    The off-diagonal quadrant carries the free phase ``exp(i w_N tau)``,
    which is removed before comparing.
    """
    u = transforms(params).flavour_to_B
    rho_b = u @ traj.rho @ u.T
    r0_11 = 0.5 * np.trace(rho_b[:, :2, :2], axis1=1, axis2=2)
    r0_22 = 0.5 * np.trace(rho_b[:, 2:, 2:], axis1=1, axis2=2)
    r0_12 = 0.5 * np.trace(rho_b[:, :2, 2:], axis1=1, axis2=2)
    r0_12 = r0_12 * np.exp(-1j * params.omega_n_bar * traj.tau)
    return float(max(np.abs(r - r[0]).max() for r in (r0_11, r0_22, r0_12)))


# --- criteria -----------------------------------------------------------------


def criterion_t0_identities(n: int = 100, seed: int = SEED) -> CriterionResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for a in rng.dirichlet(np.ones(4), size=n):
        rep = entropy_report(diagonal_mixture(a))
        s0 = shannon_entropy(a)
        h_nu = binary_entropy(a[0] + a[2])
        errors = (
            rep.S_sigma_given_nu - (s0 - h_nu),
            rep.S_R_given_nu - (s0 - h_nu),
            rep.S_Q_given_nu - 1.0,
            rep.I_sigmax_nu,
            rep.J_classical - rep.I_sigmaz_nu,
            rep.D_discord,
            rep.d_eur,
        )
        worst = max(worst, max(abs(e) for e in errors))
    elapsed = time.perf_counter() - start
    return CriterionResult(
        "c1_t0_identities", worst <= 1e-9 and elapsed < 1.0, worst, {"seconds": elapsed}
    )


def criterion_incompatibility() -> CriterionResult:
    err = abs(incompatibility() - 1.0)
    return CriterionResult("c2_incompatibility", err <= 1e-12, err)


def _oracle_states(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    paper_state = np.asarray(pure_state("e", "R").data)[None]
    return np.concatenate([paper_state, random_density_matrices(N_RANDOM_STATES, rng)])


def _oracle_grid() -> np.ndarray:
    return np.arange(int(round(ORACLE_TAU_MAX / ORACLE_GRID_STEP)) + 1) * ORACLE_GRID_STEP


def analytic_sweep(seed: int = SEED, fault: str | None = None) -> list[Trajectory]:
    params = DimensionlessParams()
    prop = _propagator(params, fault)
    taus = _oracle_grid()
    return [evolve(rho, params, DissipatorSpec(params.beta), taus, prop) for rho in _oracle_states(seed)]


def criterion_oracle(
    seed: int = SEED, fault: str | None = None, analytic: list[Trajectory] | None = None
) -> CriterionResult:
    params = DimensionlessParams()
    start = time.perf_counter()
    analytic = analytic or analytic_sweep(seed, fault)
    oracle = evolve_oracle_many(
        _oracle_states(seed), params, DissipatorSpec(params.beta), _oracle_grid(), ORACLE_RK_STEP
    )
    dev = max(float(np.abs(a.rho - o.rho).max()) for a, o in zip(analytic, oracle))
    elapsed = time.perf_counter() - start
    return CriterionResult(
        "c3_oracle_equivalence", dev <= 1e-6 and elapsed < 30.0, dev, {"seconds": elapsed}
    )


def criterion_conservation(
    seed: int = SEED, fault: str | None = None, analytic: list[Trajectory] | None = None
) -> CriterionResult:
    params = DimensionlessParams()
    analytic = analytic or analytic_sweep(seed, fault)
    trace = herm = drift = 0.0
    min_eig = math.inf
    for traj in analytic:
        inv = check_trajectory(traj)
        trace = max(trace, inv["trace"])
        herm = max(herm, inv["hermiticity"])
        min_eig = min(min_eig, inv["min_eigenvalue"])
        drift = max(drift, r0_drift(traj, params))
    passed = trace <= 1e-10 and herm <= 1e-12 and min_eig >= -1e-8 and drift <= 1e-12
    detail = {"trace": trace, "hermiticity": herm, "min_eigenvalue": min_eig, "r0_drift": drift}
    # the reported metric is the most negative eigenvalue, the usual culprit
    return CriterionResult("c4_conservation", passed, min_eig, detail)


def _paper_series(reports) -> dict[str, np.ndarray]:
    keys = ("tau", "d_eur", "D_discord", "S_sigma", "S_nu")
    return {k: np.array([getattr(r, k) for r in reports]) for k in keys}


def _late(series) -> np.ndarray:
    t = series["tau"]
    return (t >= LATE_WINDOW[0] - 1e-9) & (t <= LATE_WINDOW[1] + 1e-9)


def criterion_eur(series, extra_reports=()) -> CriterionResult:
    d = series["d_eur"]
    d_min = float(min([d.min()] + [r.d_eur for r in extra_reports]))
    d_max = float(d.max())
    late_mean = float(d[_late(series)].mean())
    passed = d_min >= -1e-8 and d_max >= 0.01 and late_mean <= 0.02
    return CriterionResult(
        "c5_eur_inequality", passed, d_max, {"min": d_min, "max": d_max, "late_mean": late_mean}
    )


def criterion_discord(series) -> CriterionResult:
    D = series["D_discord"]
    d0, d_max = float(abs(D[0])), float(D.max())
    late_mean = float(D[_late(series)].mean())
    passed = d0 <= 1e-9 and d_max >= 0.01 and late_mean <= 0.02
    return CriterionResult(
        "c6_discord_lifecycle", passed, d_max, {"D0": d0, "max": d_max, "late_mean": late_mean}
    )


def criterion_thermalization(series) -> CriterionResult:
    late = _late(series)
    spin_std = float(series["S_sigma"][late].std())
    # peak-to-peak excursion: the most lenient reading of "oscillation amplitude"
    flavour_amp = float(np.ptp(series["S_nu"][late]))
    passed = spin_std <= 0.01 and flavour_amp >= 0.02
    return CriterionResult(
        "c7_spin_thermalization",
        passed,
        flavour_amp,
        {"S_sigma_std": spin_std, "S_nu_amplitude": flavour_amp},
    )


def _random_params(rng: np.random.Generator) -> DimensionlessParams:
    return DimensionlessParams(
        omega_v_bar=rng.uniform(0.0, 10.0),
        omega_b_bar=rng.uniform(0.0, 5.0),
        beta=rng.uniform(0.0, math.pi / 2),
        theta_nu=rng.uniform(0.0, math.pi / 2),
        mu12_ratio=rng.uniform(-2.0, 2.0),
    )


def criterion_spectra(n: int = 100, seed: int = SEED) -> CriterionResult:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0

    def compare(closed, matrix):
        return float(np.abs(np.sort(closed) - np.linalg.eigvalsh(matrix)).max())

    for rho in random_density_matrices(n, rng):
        worst = max(
            worst,
            compare(flavour_eigenvalues(rho), reduce_flavour(rho)),
            compare(spin_eigenvalues(rho), reduce_spin(rho)),
            compare(R_eigenvalues(rho), project_R(rho)),
            compare(Q_eigenvalues(rho), project_Q(rho)),
        )
    for _ in range(n):
        p = _random_params(rng)
        h = build_flavour_hamiltonian(p)
        worst = max(worst, compare(eigenfrequencies(p).levels, h))
        w, mu_b = rng.uniform(0.0, 10.0, size=2)
        h_eq = build_flavour_hamiltonian(DimensionlessParams(w, 2.0 * mu_b, theta_nu=p.theta_nu))
        worst = max(worst, compare(characteristic_levels(w, mu_b), h_eq))
    return CriterionResult("c8_spectral_closed_forms", worst <= 1e-10, worst)


def criterion_determinism(config=None) -> CriterionResult:
    config = config or paper_config(tau_max=2.0)
    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(tmp) / f"run{i}.csv" for i in range(2)]
        for path in paths:
            write_timeseries(run(config).reports, path)
        a, b = (p.read_bytes() for p in paths)
    return CriterionResult("c9_determinism", a == b, float(a != b), {"bytes": len(a)})


def run_all(quick: bool = False, fault: str | None = None, seed: int = SEED) -> list[CriterionResult]:
    """Every criterion in order; ``quick`` skips the RK4 oracle sweep."""
    results = [criterion_t0_identities(seed=seed), criterion_incompatibility()]
    analytic = analytic_sweep(seed, fault)
    if not quick:
        results.append(criterion_oracle(seed, fault, analytic))
    results.append(criterion_conservation(seed, fault, analytic))

    paper = run(paper_config())
    series = _paper_series(paper.reports)
    extra = [] if quick else [entropy_report(r) for traj in analytic[1:] for r in traj.rho]
    results.append(criterion_eur(series, extra))
    results.append(criterion_discord(series))
    results.append(criterion_thermalization(series))
    results.append(criterion_spectra(seed=seed))
    results.append(criterion_determinism())
    return results
