"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion prints one PASS/FAIL line (also repeated in the terminal
summary). Criteria that this implementation does not meet are marked
``xfail(strict=True)``: the measured numbers are still computed and asserted
at the stated tolerance, and the analysis lives in the decisions ledger.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from bingham_dg.benchmarks import (
    SLOPE_ALPHA,
    constant_free_surface_reference,
    error_norms,
    parallel_free_surface_reference,
    setup_constant_free_surface,
    setup_dam_break,
    setup_parallel_free_surface,
    stoker_features,
    stoker_solution,
    yield_threshold,
)
from bingham_dg.constitutive import PhysicalParams, RegularizationConfig
from bingham_dg.time_newton import NewtonConfig, run_simulation

from conftest import record

pytestmark = pytest.mark.acceptance

TESTS_DIR = Path(__file__).parent


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def run_slope(n_el, orders, eta, sigma0, variant):
    params = PhysicalParams(alpha=SLOPE_ALPHA, eta=eta, sigma0=sigma0)
    setup, state = setup_constant_free_surface(n_el, orders, params, RegularizationConfig(variant, 1e3, 1e3))
    final, run = run_simulation(state, 1.0, setup, NewtonConfig(dt=1e-2))
    return error_norms(final, constant_free_surface_reference(setup), setup, run), run


def run_dam(variant, gamma, beta, t_final, sigma0=0.2, cont=None, n_el=100):
    reg = RegularizationConfig(variant, gamma, beta, continuation=cont)
    setup, state = setup_dam_break(n_el, (1, 1, 1, 0), PhysicalParams(eta=0.02, sigma0=sigma0), reg)
    final, run = run_simulation(state, t_final, setup, NewtonConfig(dt=1e-5))
    return setup, final, run


@pytest.fixture(scope="module")
def imbalance_runs():
    """L2_h etc. for Reg1/2/3 at every mesh of criteria 2 and 3, with wall times."""
    out = {}
    for variant in (1, 2, 3):
        for n in (50, 100, 200, 500, 1000):
            (rep, run), secs = timed(run_slope, n, (2, 1, 1, 1), 1.0, 1.0, variant)
            out[variant, n] = (rep, run, secs)
    return out


@pytest.fixture(scope="module")
def dam_break_reg1():
    (res, secs) = timed(run_dam, 1, 1e2, 1e2, 0.05)
    return res, secs


# ---------------------------------------------------------------------------------------------


def test_criterion_1_well_balanced_preservation():
    worst_h, worst_u, total = 0.0, 0.0, 0.0
    for eta, sigma0 in ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)):
        (rep, _), secs = timed(run_slope, 100, (1, 1, 1, 1), eta, sigma0, 1)
        worst_h, worst_u, total = max(worst_h, rep.Linf_h), max(worst_u, rep.Linf_u), total + secs
    ok = worst_h <= 1e-13 and worst_u == 0.0 and total <= 120
    record("criterion 1", ok, f"max Linf_h={worst_h:.2e} (<=1e-13), max Linf_u={worst_u:.1e} (=0), {total:.1f}s")
    assert ok


def test_criterion_2_imbalance_decay(imbalance_runs):
    L2 = {n: imbalance_runs[1, n][0].L2_h for n in (50, 100, 200, 500, 1000)}
    secs = sum(imbalance_runs[1, n][2] for n in L2)
    near100 = 4.0e-5 / 3 <= L2[100] <= 3 * 4.0e-5
    near1000 = 4.0e-9 / 3 <= L2[1000] <= 3 * 4.0e-9
    seq = [L2[n] for n in (50, 100, 200, 500)]
    decreasing = all(a > b for a, b in zip(seq, seq[1:]))
    ok = near100 and near1000 and decreasing and secs <= 600
    detail = ", ".join(f"n{n} {v:.2e}" for n, v in L2.items())
    record("criterion 2", ok, f"L2_h {detail}; decreasing={decreasing}; {secs:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="n_el=50 Reg1 Newton does not converge at dt=1e-2; see decisions ledger")
def test_criterion_3_regularization_equivalence(imbalance_runs):
    same12, close3 = True, True
    parts = []
    for n in (50, 100, 200, 500, 1000):
        r1, r2, r3 = (imbalance_runs[v, n][0] for v in (1, 2, 3))
        d12 = max(abs(r1.L2_h - r2.L2_h), abs(r1.Linf_h - r2.Linf_h))
        rel3 = abs(r3.L2_h - r1.L2_h) / r1.L2_h
        same12 &= d12 <= 1e-12
        # "differs only in velocity": the height error agrees with Reg1 to within 5%
        close3 &= rel3 <= 0.05
        parts.append(f"n{n}: |d12|={d12:.1e} Reg3 dL2_h={100 * rel3:.1f}%")
    ok = same12 and close3
    record("criterion 3", ok, f"Reg1==Reg2 {same12}, Reg3 height within 5% {close3}; " + "; ".join(parts))
    assert ok


def test_criterion_4_rigid_preservation():
    params = PhysicalParams(alpha=SLOPE_ALPHA, eta=1.0, sigma0=9.035)
    t0 = time.perf_counter()
    setup, state = setup_parallel_free_surface(100, (1, 1, 1, 1), params, RegularizationConfig(1, 1e4, 1e4))
    final, run = run_simulation(state, 1e-3, setup, NewtonConfig(dt=1e-6))
    secs = time.perf_counter() - t0
    rep = error_norms(final, parallel_free_surface_reference(setup), setup, run)
    thr = yield_threshold(params)
    ok = (params.sigma0 >= thr and run.n_steps == 1000 and rep.active_pct == 0.0 and rep.Linf_u <= 2e-3
          and run.mean_newton_iters <= 2 and secs <= 300)
    record("criterion 4", ok, f"threshold {thr:.6f}, steps {run.n_steps}, active {rep.active_pct:.1f}%, "
           f"Linf_u {rep.Linf_u:.3e} (<=2e-3), NR/step {run.mean_newton_iters:.3f} (<=2), {secs:.1f}s")
    assert ok


def _active_regions(setup, state):
    B = setup.bases
    x = setup.mesh.physical_points(B["E"].quad_nodes).ravel()
    E = state.E.at_quadrature(B["E"]).ravel()
    active = np.abs(E) - setup.params.sigma0 / setup.reg.gamma >= 0
    active = active[np.argsort(x, kind="stable")]
    runs = [bool(active[0])]
    for a in active[1:]:
        if a != runs[-1]:
            runs.append(bool(a))
    return runs


def test_criterion_5_dam_break_structure(dam_break_reg1):
    (setup, final, run), secs = dam_break_reg1
    hmin = float(final.h.at_quadrature(setup.bases["h"]).min())
    regions = _active_regions(setup, final)
    ok = hmin > 0 and regions == [False, True, False, True, False] and run.mean_newton_iters <= 3
    label = "".join("A" if r else "I" for r in regions)
    record("criterion 5", ok, f"min h {hmin:.6f}, regions {label} (want IAIAI), NR/step "
           f"{run.mean_newton_iters:.3f} (<=3), unconverged {run.n_unconverged}, {secs:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="Reg1 and Reg2 differ inside the smoothing band; see decisions ledger")
def test_criterion_6_reg1_equals_reg2_on_dam_break(dam_break_reg1):
    (setup, f1, _), _ = dam_break_reg1
    _, f2, _ = run_dam(2, 1e2, 1e2, 0.05)
    B = setup.bases
    diffs = {
        name: float(np.max(np.abs(getattr(f1, name).at_quadrature(B[name]) - getattr(f2, name).at_quadrature(B[name]))))
        for name in ("h", "u", "E")
    }
    ok = max(diffs.values()) <= 1e-10
    record("criterion 6", ok, "Linf |Reg1 - Reg2| " + ", ".join(f"{k} {v:.2e}" for k, v in diffs.items())
           + " (<=1e-10)")
    assert ok


def test_criterion_7_inviscid_limit_vs_stoker():
    setup, final, run = run_dam(1, 1e2, 1e2, 0.05, sigma0=0.0)
    feats = stoker_features(0.05, 1.5, 0.5, 9.81, x0=1.5)
    half = 1.5 * setup.mesh.widths[0]  # window three elements wide

    def mask(x):
        return np.all([np.abs(x - v) > half for v in feats.values()], axis=0)

    def ref(x):
        return stoker_solution(x, 0.05, 1.5, 0.5, 9.81, x0=1.5)

    rep = error_norms(final, ref, setup, run, mask=mask)
    ok = rep.L2_h <= 5e-2
    record("criterion 7", ok, f"masked L2_h {rep.L2_h:.3e} (<=5e-2), masked Linf_h {rep.Linf_h:.3e}, "
           f"NR/step {run.mean_newton_iters:.2f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="continuation also stalls at dt=1e-5; see decisions ledger")
def test_criterion_8_continuation_convergence():
    _, _, direct = run_dam(1, 1e3, 1e2, 0.02)
    conts = {n: run_dam(1, 1e3, 1e2, 0.02, cont=(1e2, n))[2] for n in (2, 3)}
    direct_stalls = direct.max_iter_hits >= 1
    all_converge = all(r.max_iter_hits == 0 and r.n_unconverged == 0 for r in conts.values())
    complete = direct.n_steps == 2000 and all(r.n_steps == 2000 for r in conts.values())
    ok = direct_stalls and all_converge and complete
    parts = [f"direct: {direct.max_iter_hits} max-iter steps"]
    parts += [f"n_gamma={n}: {r.n_unconverged}/{r.n_steps} unconverged" for n, r in conts.items()]
    record("criterion 8", ok, "; ".join(parts) + f"; completed={complete}")
    assert ok


PROPERTY_TESTS = [
    "test_mesh_basis.py::test_order4_orthonormality_against_high_precision_oracle",
    "test_mesh_basis.py::test_gram_is_identity",
    "test_fluxes.py::test_hll_consistency_random_states",
    "test_constitutive.py::test_odd_symmetry",
    "test_constitutive.py::test_boundedness",
    "test_constitutive.py::test_continuity_across_branch_boundaries",
    "test_constitutive.py::test_derivative_matches_central_differences",
    "test_assembly.py::test_jacobian_matches_finite_differences",
    "test_time_newton.py::test_equilibrium_is_a_fixed_point",
    "test_time_newton.py::test_quadratic_convergence_on_dam_break_step",
    "test_properties.py",
]


def test_criterion_9_property_suites():
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_TESTS],
        cwd=TESTS_DIR, capture_output=True, text=True,
    )
    secs = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and secs <= 60
    record("criterion 9", ok, f"{summary} in {secs:.1f}s (<=60s)")
    assert ok, proc.stdout[-3000:]
