"""Scenario configuration, unit conversion, orchestration and file output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import (
    PARSEC_INV_EV,
    DensityMatrix4,
    DimensionlessParams,
    PhysicalParams,
    diagonal_mixture,
    pure_state,
)
from .entropy import EntropyReport, MeasurementSet, entropy_report, project_R
from .lindblad import DissipatorSpec, Trajectory, evolve, evolve_oracle

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "ScenarioConfig",
    "ScenarioResult",
    "TIMESERIES_COLUMNS",
    "FIGURE_COLUMNS",
    "dissipation_strength",
    "to_dimensionless",
    "load_config",
    "paper_config",
    "tau_grid",
    "check_trajectory",
    "run",
    "write_timeseries",
    "figure_datasets",
]

TIMESERIES_COLUMNS = (
    ["tau"]
    + [f"lam{i}" for i in range(1, 5)]
    + [f"lamR{i}" for i in range(1, 5)]
    + [f"lamQ{i}" for i in range(1, 5)]
    + [
        "S_full",
        "S_nu",
        "S_sigma",
        "S_Rnu",
        "S_Qnu",
        "S_sigma_given_nu",
        "S_R_given_nu",
        "S_Q_given_nu",
        "I_sigma_nu",
        "I_sigmaz_nu",
        "I_sigmax_nu",
        "J_classical",
        "D_discord",
        "eur_lhs",
        "eur_rhs",
        "d_eur",
    ]
)

FIGURE_COLUMNS = {
    "fig1": ["tau", "lam1", "lam2", "lam3", "lam4"],
    "fig2": ["tau", "lamR1", "lamR2", "lamR3", "lamR4"],
    "fig3": ["tau", "lamQ1", "lamQ2", "lamQ3", "lamQ4"],
    "fig4": ["tau", "S_full", "S_nu", "S_sigma", "S_Rnu", "S_Qnu"],
    "fig5": ["tau", "S_sigma_given_nu", "S_R_given_nu", "S_Q_given_nu"],
    "fig6": ["tau", "I_sigma_nu", "I_sigmaz_nu", "I_sigmax_nu", "J_classical", "D_discord"],
    "fig7": ["tau", "lhs", "rhs_part1", "rhs_part2", "d_eur"],
}

MAX_GRID_POINTS = 10_000_000
ORACLE_TOL = 1e-6
TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-8


class ConfigError(ValueError):
    """Invalid or malformed scenario configuration."""


class InvariantViolation(RuntimeError):
    """A numerical invariant failed during a run."""


# --- units --------------------------------------------------------------------


def dissipation_strength(p: PhysicalParams) -> float:
    """``W^2 = 2 eta (mu B)^2 L0`` in eV, with ``L0`` converted from pc.

    ``B`` is the magnitude of the full regular field, which sets the scale
    of its stochastic part; ``mu`` is the diagonal moment ``mu11``.
    """
    mu_b = p.mu_jk[0] * p.mu_B * math.hypot(p.B_perp, p.B_par)
    return 2.0 * p.eta * mu_b**2 * p.L0 * PARSEC_INV_EV


def to_dimensionless(p: PhysicalParams, beta: float = math.pi / 4) -> DimensionlessParams:
    """Frequencies in units of ``2 W^2``.

    Needs ``mu11 == mu22 != 0``; ``mu12`` enters through ``mu12_ratio``.
    """
    mu11, mu22, mu12 = p.mu_jk
    if mu11 == 0.0 or not math.isclose(mu11, mu22, rel_tol=1e-12):
        raise ConfigError("physical mode needs equal, non-zero diagonal moments mu11 == mu22")
    w2 = dissipation_strength(p)
    if w2 == 0.0:
        raise ConfigError(
            "zero dissipation strength: dimensionless time is undefined; "
            "use dimensionless mode instead"
        )
    scale = 1.0 / (2.0 * w2)
    return DimensionlessParams(
        omega_v_bar=p.omega_nu * scale,
        omega_b_bar=2.0 * p.moment_energies()[0] * scale,
        beta=beta,
        theta_nu=p.theta_nu,
        mu12_ratio=mu12 / mu11,
    )


# --- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str = "dimensionless"
    dimensionless: DimensionlessParams | None = field(default_factory=DimensionlessParams)
    physical: PhysicalParams | None = None
    beta: float = math.pi / 4
    tau_max: float = 20.0
    tau_step: float = 0.01
    initial_state: dict = field(default_factory=lambda: {"pure": ["e", "R"]})
    measurement_mode: object = "paper"
    timing: str = "simultaneous"
    oracle_check: bool = False
    oracle_step: float = 1e-3
    output_format: str = "csv"

    def __post_init__(self):
        if self.mode not in ("dimensionless", "physical"):
            raise ConfigError(f"mode must be 'dimensionless' or 'physical', got {self.mode!r}")
        if self.mode == "dimensionless" and self.dimensionless is None:
            raise ConfigError("dimensionless mode needs a 'dimensionless' block")
        if self.mode == "physical" and self.physical is None:
            raise ConfigError("physical mode needs a 'physical' block")
        if not self.tau_step > 0:
            raise ConfigError(f"tau_step must be positive, got {self.tau_step}")
        if self.tau_max < 0:
            raise ConfigError(f"tau_max must be non-negative, got {self.tau_max}")
        if self.tau_max / self.tau_step > MAX_GRID_POINTS:
            raise ConfigError("tau_max / tau_step exceeds 1e7 grid points")
        if not self.oracle_step > 0:
            raise ConfigError(f"oracle_step must be positive, got {self.oracle_step}")
        if self.timing not in ("simultaneous", "sequential"):
            raise ConfigError(f"timing must be 'simultaneous' or 'sequential', got {self.timing!r}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be 'csv' or 'json', got {self.output_format!r}")
        self.initial_rho()
        self.measurements()

    def params(self) -> DimensionlessParams:
        if self.mode == "physical":
            return to_dimensionless(self.physical, self.beta)
        return self.dimensionless

    def initial_rho(self) -> DensityMatrix4:
        spec = self.initial_state
        if not isinstance(spec, dict) or len(spec) != 1:
            raise ConfigError("initial_state must be {'weights': [...]} or {'pure': [flavour, helicity]}")
        (kind, value), = spec.items()
        try:
            if kind == "weights":
                return diagonal_mixture(value)
            if kind == "pure":
                flavour, helicity = value
                return pure_state(flavour, helicity)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad initial_state: {exc}") from None
        raise ConfigError(f"unknown initial_state kind {kind!r}")

    def measurements(self) -> MeasurementSet:
        mm = self.measurement_mode
        if mm == "paper":
            return MeasurementSet.paper()
        if isinstance(mm, dict) and set(mm) == {"bloch_grid"}:
            res = mm["bloch_grid"]
            if isinstance(res, int) and not isinstance(res, bool) and res >= 2:
                return MeasurementSet.bloch_grid(res)
        raise ConfigError(f"measurement_mode must be 'paper' or {{'bloch_grid': N}}, got {mm!r}")

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("dimensionless", "physical") and value is not None:
                value = asdict(value)
            out[f.name] = value
        return out


def paper_config(**overrides) -> ScenarioConfig:
    """The reference scenario: omega_V = 5, omega_B = 1, beta = pi/4, pure |e R>."""
    return ScenarioConfig(**overrides)


def _build_block(cls, block, name):
    if not isinstance(block, dict):
        raise ConfigError(f"'{name}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    try:
        return cls(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{name}' block: {exc}") from None


def load_config(source) -> ScenarioConfig:
    """Read a JSON config from a path or an already-parsed mapping.

    Unknown keys are rejected.
    """
    if isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    kwargs = {k: v for k, v in raw.items() if not (k in ("dimensionless", "physical") and v is None)}
    mode = kwargs.get("mode", "dimensionless")
    if "dimensionless" in kwargs:
        kwargs["dimensionless"] = _build_block(DimensionlessParams, kwargs["dimensionless"], "dimensionless")
    elif mode != "dimensionless":
        kwargs["dimensionless"] = None
    if "physical" in kwargs:
        kwargs["physical"] = _build_block(PhysicalParams, kwargs["physical"], "physical")
    for key in ("tau_max", "tau_step", "beta", "oracle_step"):
        if key in kwargs and (isinstance(kwargs[key], bool) or not isinstance(kwargs[key], (int, float))):
            raise ConfigError(f"'{key}' must be a number")
    try:
        return ScenarioConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# --- running ------------------------------------------------------------------


def tau_grid(tau_max: float, tau_step: float) -> np.ndarray:
    n = int(math.floor(tau_max / tau_step + 1e-9))
    return np.arange(n + 1) * tau_step


def check_trajectory(traj: Trajectory) -> dict[str, float]:
    """Worst trace, Hermiticity and positivity residuals along a trajectory."""
    rho = traj.rho
    trace_err = float(np.abs(np.trace(rho, axis1=1, axis2=2) - 1.0).max())
    herm_err = float(np.abs(rho - np.conj(np.swapaxes(rho, 1, 2))).max())
    min_eig = float(np.linalg.eigvalsh(rho).min())
    return {"trace": trace_err, "hermiticity": herm_err, "min_eigenvalue": min_eig}


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    params: DimensionlessParams
    trajectory: Trajectory
    reports: list[EntropyReport]
    invariants: dict[str, float]
    oracle_deviation: float | None = None


def run(config: ScenarioConfig) -> ScenarioResult:
    """Evolve the initial state over the tau grid and report every entropy.

    Raises :class:`InvariantViolation` if trace, Hermiticity or positivity
    checks fail, or if the oracle check is on and deviates by more than 1e-6.
    """
    params = config.params()
    taus = tau_grid(config.tau_max, config.tau_step)
    rho0 = config.initial_rho()
    dissipator = DissipatorSpec(params.beta)
    traj = evolve(rho0, params, dissipator, taus)

    inv = check_trajectory(traj)
    if inv["trace"] > TRACE_TOL or inv["hermiticity"] > HERMITIAN_TOL or inv["min_eigenvalue"] < -PSD_TOL:
        raise InvariantViolation(f"trajectory invariants violated: {inv}")

    oracle_dev = None
    if config.oracle_check:
        step = min(config.oracle_step, config.tau_step)
        oracle = evolve_oracle(rho0, params, dissipator, taus, step=step)
        oracle_dev = float(np.abs(oracle.rho - traj.rho).max())
        if oracle_dev > ORACLE_TOL:
            raise InvariantViolation(f"analytic and oracle trajectories differ by {oracle_dev:.3e}")

    ms = config.measurements()
    if config.timing == "sequential":
        r_state = project_R(rho0)
        q_traj = evolve(r_state, params, dissipator, taus)
        reports = [
            entropy_report(rho, tau, ms, r_source=r_state, q_source=q_traj.rho[i])
            for i, (tau, rho) in enumerate(zip(taus, traj.rho))
        ]
    else:
        reports = [entropy_report(rho, tau, ms) for tau, rho in zip(taus, traj.rho)]
    return ScenarioResult(config, params, traj, reports, inv, oracle_dev)


# --- output -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{float(x) + 0.0:.12g}"


def _row(report) -> dict[str, float]:
    if isinstance(report, EntropyReport):
        row = {
            "tau": report.tau,
            **{f"lam{i + 1}": v for i, v in enumerate(report.lam)},
            **{f"lamR{i + 1}": v for i, v in enumerate(report.lam_R)},
            **{f"lamQ{i + 1}": v for i, v in enumerate(report.lam_Q)},
        }
        for name in TIMESERIES_COLUMNS[13:]:
            row[name] = getattr(report, name)
        return row
    missing = [c for c in TIMESERIES_COLUMNS if c not in report]
    if missing:
        raise ValueError(f"report is missing fields: {missing}")
    return {c: report[c] for c in TIMESERIES_COLUMNS}


def write_timeseries(reports, path, fmt: str = "csv") -> Path:
    """One row per tau in the fixed column order; 12 significant digits."""
    if not reports:
        raise ValueError("no reports to write")
    rows = [_row(r) for r in reports]
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TIMESERIES_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in TIMESERIES_COLUMNS])
    elif fmt == "json":
        payload = [{c: float(_fmt(row[c])) for c in TIMESERIES_COLUMNS} for row in rows]
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def figure_datasets(reports, outdir) -> list[Path]:
    """Write ``fig1.csv`` .. ``fig7.csv`` with the curves of each figure.

    ``fig7`` holds the EUR left side, ``1 + S(sigma|nu)``, ``D - J`` and the slack.
    """
    if not reports:
        raise ValueError("no reports to write")
    rows = [_row(r) for r in reports]
    for row in rows:
        row["lhs"] = row["eur_lhs"]
        row["rhs_part1"] = 1.0 + row["S_sigma_given_nu"]
        row["rhs_part2"] = row["D_discord"] - row["J_classical"]
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, cols in FIGURE_COLUMNS.items():
        path = outdir / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in cols])
        paths.append(path)
    return paths
