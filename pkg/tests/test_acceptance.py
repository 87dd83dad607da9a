"""Acceptance criteria 1-9, each at its stated tolerance.

Thresholds are written out here rather than read from the package so that a
change in the library cannot silently loosen them. Every test prints one
``ACCEPTANCE <criterion> PASS|FAIL <metrics>`` line, collected again in the
terminal summary.
"""

import math
import time

import numpy as np
import pytest

from spinflavour.core import DimensionlessParams, diagonal_mixture
from spinflavour.entropy import binary_entropy, entropy_report, incompatibility, shannon_entropy
from spinflavour.scenario import paper_config, run
from spinflavour import validation as v

from conftest import ACCEPTANCE_LINES


def report(name, passed, **metrics):
    body = " ".join(f"{k}={val:.6g}" for k, val in metrics.items())
    line = f"ACCEPTANCE {name} {'PASS' if passed else 'FAIL'} {body}"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
    return passed


@pytest.fixture(scope="module")
def sweep():
    return v.analytic_sweep()


@pytest.fixture(scope="module")
def paper_series():
    reports = run(paper_config()).reports
    tau = np.array([r.tau for r in reports])
    late = (tau >= 15.0 - 1e-9) & (tau <= 20.0 + 1e-9)
    series = {k: np.array([getattr(r, k) for r in reports]) for k in ("d_eur", "D_discord", "S_sigma", "S_nu")}
    return tau, late, series


def test_criterion_1_t0_identities():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for a in rng.dirichlet(np.ones(4), size=100):
        rep = entropy_report(diagonal_mixture(a))
        s0, h_nu = shannon_entropy(a), binary_entropy(a[0] + a[2])
        worst = max(
            worst,
            abs(rep.S_sigma_given_nu - (s0 - h_nu)),
            abs(rep.S_R_given_nu - (s0 - h_nu)),
            abs(rep.S_Q_given_nu - 1.0),
            abs(rep.I_sigmax_nu),
            abs(rep.J_classical - rep.I_sigmaz_nu),
            abs(rep.D_discord),
            abs(rep.d_eur),
        )
    elapsed = time.perf_counter() - start
    ok = report("c1_t0_identities", worst <= 1e-9 and elapsed < 1.0, max_err=worst, seconds=elapsed)
    assert ok


def test_criterion_2_incompatibility():
    c = 1 / math.sqrt(2)
    err = abs(incompatibility() - 1.0)
    ok = report("c2_incompatibility", err <= 1e-12 and -2 * math.log2(c) == pytest.approx(1.0), err=err)
    assert ok


def test_criterion_3_oracle_equivalence(sweep):
    res = v.criterion_oracle(analytic=sweep)
    dev, secs = res.metric, res.detail["seconds"]
    ok = report("c3_oracle_equivalence", dev <= 1e-6 and secs < 30.0, max_dev=dev, seconds=secs)
    assert len(sweep) == 21 and len(sweep[0].tau) == 201
    assert ok


def test_criterion_4_conservation(sweep):
    params = DimensionlessParams()
    trace = herm = drift = 0.0
    min_eig = math.inf
    for traj in sweep:
        rho = traj.rho
        trace = max(trace, np.abs(np.trace(rho, axis1=1, axis2=2) - 1).max())
        herm = max(herm, np.abs(rho - rho.conj().swapaxes(1, 2)).max())
        min_eig = min(min_eig, np.linalg.eigvalsh(rho).min())
        drift = max(drift, v.r0_drift(traj, params))
    ok = report(
        "c4_conservation",
        trace <= 1e-10 and herm <= 1e-12 and min_eig >= -1e-8 and drift <= 1e-12,
        trace=trace, hermiticity=herm, min_eigenvalue=min_eig, r0_drift=drift,
    )
    assert ok


def test_criterion_5_eur(paper_series, sweep):
    _, late, s = paper_series
    d = s["d_eur"]
    d_min = min(d.min(), min(entropy_report(r).d_eur for traj in sweep[1:] for r in traj.rho))
    ok = report(
        "c5_eur_inequality",
        d_min >= -1e-8 and d.max() >= 0.01 and d[late].mean() <= 0.02,
        min=d_min, max=d.max(), late_mean=d[late].mean(),
    )
    assert ok


def test_criterion_6_discord(paper_series):
    _, late, s = paper_series
    D = s["D_discord"]
    ok = report(
        "c6_discord_lifecycle",
        abs(D[0]) <= 1e-9 and D.max() >= 0.01 and D[late].mean() <= 0.02,
        D0=abs(D[0]), max=D.max(), late_mean=D[late].mean(),
    )
    assert ok


def test_criterion_7_spin_thermalization(paper_series):
    _, late, s = paper_series
    spin_std = s["S_sigma"][late].std()
    # peak-to-peak is the most generous reading of "oscillation amplitude"
    flavour_amp = np.ptp(s["S_nu"][late])
    ok = report(
        "c7_spin_thermalization",
        spin_std <= 0.01 and flavour_amp >= 0.02,
        S_sigma_std=spin_std, S_nu_amplitude=flavour_amp,
    )
    assert ok


def test_criterion_8_spectral_closed_forms():
    res = v.criterion_spectra(n=100, seed=202)
    ok = report("c8_spectral_closed_forms", res.metric <= 1e-10, max_err=res.metric)
    assert ok


def test_criterion_9_determinism():
    res = v.criterion_determinism(paper_config())
    ok = report("c9_determinism", res.passed, bytes=res.detail["bytes"])
    assert ok
