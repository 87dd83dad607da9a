"""Spin-flavour dynamics of ultrahigh-energy neutrinos in noisy magnetic fields."""

from .core import (
    BasisTag,
    DensityMatrix4,
    DimensionlessParams,
    PhysicalParams,
    change_basis,
    diagonal_mixture,
    pure_state,
)
from .entropy import EntropyReport, MeasurementSet, entropy_report, initial_report
from .lindblad import DissipatorSpec, Trajectory, build_M, evolve, evolve_oracle
from .scenario import ScenarioConfig, load_config, run, write_timeseries

__version__ = "0.1.0"
