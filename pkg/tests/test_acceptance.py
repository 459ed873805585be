"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (see ``conftest.py``); the lines are
repeated in the terminal summary of every pytest run.
"""

import csv
import io
import time

import numpy as np

from chansim import fock
from chansim import gaussian as gs
from chansim.cli import main
from chansim.dv_channels import KINDS, apply_channel, correction_table, make_channel
from chansim.dv_channels import random_kraus_channel
from chansim.estimation import run_block_experiment, sql_scaling_fit
from chansim.linalg import tensor
from chansim.metrology import closed_form_dv_qfi, dv_family, qfi_fidelity, qfi_sld, state_qfi_sld
from chansim.teleport import simulate_and_compare

P_GRID = np.round(np.arange(0.1, 1.0, 0.1), 10)
ETA_GRID = (0.2, 0.3, 0.5, 0.6, 0.8, 0.9, 1.0, 1.5, 2.0, 3.0)
NU_OFFSETS = (0.01, 0.05, 0.25, 0.5, 1.0, 2.0, 5.0)


def eta_nu_grid():
    return [(eta, abs(1 - eta) / 2 + d) for eta in ETA_GRID for d in NU_OFFSETS]


def test_criterion_01_dv_closed_forms(report):
    start = time.perf_counter()
    worst = 0.0
    for kind in KINDS:
        fam = dv_family(kind)
        for p in P_GRID:
            closed = closed_form_dv_qfi(kind, p)
            for q in (qfi_sld(fam, p), qfi_fidelity(fam, p)):
                worst = max(worst, abs(q.value - closed) / closed)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-3 and elapsed < 5.0
    assert report(1, ok, f"max rel err {worst:.2e} (tol 1e-3), {elapsed:.2f} s (limit 5 s)")


def test_criterion_02_teleportation_identity(report):
    worst = 0.0
    for i, kind in enumerate(KINDS):
        for j, p in enumerate(P_GRID):
            dev = simulate_and_compare(make_channel(kind, p), correction_table(kind),
                                       trials=100, seed=1000 * i + j)
            worst = max(worst, dev)
    assert report(2, worst <= 1e-10, f"max trace distance {worst:.2e} over 2700 inputs "
                                     "(tol 1e-10)")


def test_criterion_03_finite_resource_identity(report):
    worst = 0.0
    for eta, nu in eta_nu_grid():
        ch = gs.bk_teleport_channel(gs.finite_resource(eta, nu), np.sqrt(eta))
        worst = max(worst, np.abs(ch.T - np.sqrt(eta) * np.eye(2)).max(),
                    np.abs(ch.N - nu * np.eye(2)).max())
    assert report(3, worst <= 1e-12, f"max entry deviation {worst:.2e} over "
                                     f"{len(eta_nu_grid())} (eta, nu) points (tol 1e-12)")


def test_criterion_04_nu_identity(report):
    worst = 0.0
    for eta, nu in eta_nu_grid():
        res = gs.finite_resource(eta, nu)
        a, b, c = res.A[0, 0], res.B[0, 0], res.C[0, 0]
        g = np.sqrt(eta)
        worst = max(worst, abs(a * g ** 2 - 2 * c * g + b - nu))
    assert report(4, worst <= 1e-12, f"max |a g^2 - 2 c g + b - nu| = {worst:.2e} (tol 1e-12)")


def test_criterion_05_asymptotic_qfi(report):
    worst_closed = 0.0
    worst_spread = 0.0
    for kind, etas in (("thermal_loss", (0.3, 0.6, 0.9)), ("amplifier", (1.5, 2.0, 3.0))):
        for nbar in (0.5, 1.0, 2.0, 5.0):
            vals = [gs.qfi_choi_limit(gs.gaussian_family(kind, eta), nbar).value
                    for eta in etas]
            target = gs.qfi_asymptotic_closed(kind, nbar)
            worst_closed = max(worst_closed, max(abs(v - target) / target for v in vals))
            worst_spread = max(worst_spread, (max(vals) - min(vals)) / np.mean(vals))
    ok = worst_closed < 0.02 and worst_spread < 0.01
    assert report(5, ok, f"max rel err vs 1/[n(n+1)] {worst_closed:.2e} (tol 2e-2), "
                         f"eta spread {worst_spread:.2e} (tol 1e-2)")


def test_criterion_06_suboptimal_qfi(report):
    fam = gs.gaussian_family("thermal_loss")
    worst_loss = max(abs(gs.qfi_suboptimal(fam, n).value * n ** 2 - 1)
                     for n in (0.5, 1.0, 2.0, 5.0))
    add = gs.gaussian_family("additive")
    worst_nu = 0.0
    worst_routes = 0.0
    for nu in (0.5, 1.0, 2.0):
        sub = gs.qfi_suboptimal(add, nu).value
        worst_nu = max(worst_nu, abs(sub * nu ** 2 - 1))
        worst_routes = max(worst_routes, abs(sub - gs.qfi_choi_limit(add, nu).value) / sub)
    ok = worst_loss <= 1e-3 and worst_nu <= 1e-3 and worst_routes <= 1e-3
    assert report(6, ok, f"loss vs 1/n^2 {worst_loss:.2e}, additive vs 1/nu^2 {worst_nu:.2e}, "
                         f"additive routes {worst_routes:.2e} (tol 1e-3)")


def _fig_rows(capsys, *extra):
    assert main(["fig-finite-qfi", "--nbar", "0.25,0.5,1,2,5,10,50", *extra]) == 0
    out = capsys.readouterr().out
    return [tuple(float(r[k]) for k in ("nbar", "qfi_asymptotic", "qfi_suboptimal"))
            for r in csv.DictReader(io.StringIO(out))]


def test_criterion_07_figure_rows(report, capsys):
    closed = _fig_rows(capsys)
    numeric = _fig_rows(capsys, "--numeric")
    row = next(r for r in closed if r[0] == 1.0)
    nrow = next(r for r in numeric if r[0] == 1.0)
    dominates = all(s >= a for _, a, s in closed) and all(s >= a for _, a, s in numeric)
    num_err = max(abs(nrow[1] - 0.5) / 0.5, abs(nrow[2] - 1.0))
    ok = row[1:] == (0.5, 1.0) and num_err < 1e-3 and dominates
    assert report(7, ok, f"n=1 row {row[1:]}, numeric row ({nrow[1]:.6f}, {nrow[2]:.6f}), "
                         f"sub-optimal dominates: {dominates}")


def test_criterion_08_fock_oracle(report):
    rng = np.random.default_rng(8)
    start = time.perf_counter()
    worst = 0.0
    for k in range(50):
        make = fock.random_two_mode_spec if k % 2 else fock.random_mode_spec
        a, b = make(rng, 2 * rng.random()), make(rng, 2 * rng.random())
        assert a.mean_photons() <= 2 and b.mean_photons() <= 2
        fa, fb = a.fock(40, max_tail=1e-4), b.fock(40, max_tail=1e-4)
        closed = gs.gaussian_fidelity(gs.GaussianState(a.mean(), a.cm()),
                                      gs.GaussianState(b.mean(), b.cm()))
        worst = max(worst, abs(closed - fock.oracle_fidelity(fa, fb)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 60
    assert report(8, ok, f"max |F_gauss - F_fock| {worst:.2e} over 50 pairs (tol 1e-4), "
                         f"{elapsed:.1f} s (limit 60 s)")


def test_criterion_09_qfi_properties(report):
    rng = np.random.default_rng(9)
    worst_add = 0.0
    worst_mono = -np.inf
    for _ in range(200):
        ka, kb = rng.choice(KINDS, 2)
        p = float(rng.uniform(0.05, 0.95))
        fa, fb = dv_family(ka), dv_family(kb)
        joint = state_qfi_sld(lambda t: tensor(fa.state(t), fb.state(t)), p).value
        parts = qfi_sld(fa, p).value + qfi_sld(fb, p).value
        worst_add = max(worst_add, abs(joint - parts) / parts)

        kind = rng.choice(KINDS)
        fam = dv_family(kind)
        dim = fam.state(p).shape[0]
        d_out = int(rng.integers(2, 6))
        lam = random_kraus_channel(dim, d_out, -(-dim // d_out) + int(rng.integers(0, 3)), rng)
        processed = state_qfi_sld(lambda t: apply_channel(lam, fam.state(t)), p).value
        worst_mono = max(worst_mono, processed - qfi_sld(fam, p).value)
    ok = worst_add <= 1e-6 and worst_mono <= 1e-8
    assert report(9, ok, f"additivity rel err {worst_add:.2e} (tol 1e-6), max monotonicity "
                         f"excess {worst_mono:.2e} (tol 1e-8), 200 instances each")


def test_criterion_10_achievability(report):
    trials = 500
    results = [run_block_experiment("dephasing", 0.3, n, trials, seed=2024)
               for n in (100, 1000, 10000)]
    zs = [abs(r.empirical_var - r.qcrb) / r.variance_se for r in results]
    slope = sql_scaling_fit(results)
    floor_ok = all(r.empirical_var >= r.qcrb * (1 - 3 / np.sqrt(trials)) for r in results)
    ok = max(zs) < 3 and abs(slope + 1) <= 0.05 and floor_ok
    assert report(10, ok, f"max |var - p(1-p)/n| = {max(zs):.2f} SE (tol 3), slope {slope:.3f} "
                          f"(-1 +/- 0.05), var >= QCRB(1 - 3/sqrt(trials)): {floor_ok}")


def test_criterion_11_bk_convergence(report):
    r_grid = np.arange(0.0, 4.01, 0.5)
    monotone = True
    for n_max in (0.5, 1.0, 2.0):
        vals = [gs.bk_error_lower_bound(r, n_max).lower for r in r_grid]
        monotone &= all(b < a for a, b in zip(vals, vals[1:]))
    at4 = gs.bk_error_lower_bound(4.0, 1.0).lower
    ok = monotone and at4 < 1e-3
    assert report(11, ok, f"decreasing in r for N in (0.5, 1, 2): {monotone}, "
                          f"bound at r=4, N=1: {at4:.2e} (tol 1e-3)")
