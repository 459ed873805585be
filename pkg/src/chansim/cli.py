"""Command-line front end: QFI tables, verification suites, figure data, estimation runs.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import dv_channels as dv
from . import fock
from . import gaussian as gs
from .estimation import new_seed, run_block_experiment, sql_scaling_fit
from .linalg import random_density_matrix, trace_norm
from .metrology import closed_form_dv_qfi, dv_family, qfi_fidelity, qfi_sld
from .teleport import teleport

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DV_FAMILIES = ("dephasing", "erasure", "depolarizing")
CV_FAMILIES = {"thermal-loss": "thermal_loss", "amplifier": "amplifier", "additive": "additive"}
SUITES = ("teleport", "finite-resource", "covariance", "fidelity-oracle")
TOLERANCES = {"teleport": 1e-10, "finite-resource": 1e-12, "covariance": 1e-10,
              "fidelity-oracle": 1e-4}
ETA_GRID = (0.2, 0.3, 0.5, 0.6, 0.8, 0.9, 1.0, 1.5, 2.0, 3.0)
# nu is offset from its threshold |1 - eta|/2
NU_OFFSETS = (0.05, 0.25, 0.5, 1.0, 2.0)


class UsageError(Exception):
    pass


def fmt(x):
    """12 significant digits, locale independent; ``None`` and NaN become empty."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _json_value(x):
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return None if math.isnan(x) else float(format(float(x), ".12g"))
    return x


def render(rows, header, fmt_name, meta=None):
    if fmt_name == "json":
        doc = dict(meta or {})
        doc["rows"] = [dict(zip(header, r)) for r in rows]
        return json.dumps(_json_value(doc), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return sorted(vals)


def int_list(text):
    vals = float_list(text)
    if any(v != int(v) or v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers: {text!r}")
    return [int(v) for v in vals]


def _rel_err(numeric, closed):
    return abs(numeric - closed) / abs(closed)


def cmd_qfi_table(args):
    """Rows ``(param, qfi_numeric, qfi_closed, rel_err)`` over the requested grid."""
    header = ["param", "qfi_numeric", "qfi_closed", "rel_err"]
    rows = []
    if args.family in DV_FAMILIES:
        grid = args.p
        if grid is None:
            raise UsageError(f"--p is required for family {args.family}")
        if any(not 0 < p < 1 for p in grid):
            raise UsageError("--p values must lie strictly between 0 and 1")
        fam = dv_family(args.family)
        route = qfi_sld if args.method == "sld" else qfi_fidelity
        for p in grid:
            q = route(fam, p).value
            closed = closed_form_dv_qfi(args.family, p)
            rows.append((p, q, closed, _rel_err(q, closed)))
        meta = {"family": args.family, "method": args.method}
    else:
        kind = CV_FAMILIES[args.family]
        grid = args.nu if kind == "additive" else args.nbar
        if grid is None:
            raise UsageError(f"--{'nu' if kind == 'additive' else 'nbar'} is required "
                             f"for family {args.family}")
        if any(v <= 0 for v in grid):
            raise UsageError("noise parameters must be positive")
        try:
            fam = gs.gaussian_family(kind, args.eta)
        except ValueError as exc:
            raise UsageError(str(exc))
        for theta in grid:
            if args.r is None:
                q = gs.qfi_choi_limit(fam, theta).value
            else:
                q = gs.qfi_gaussian(fam, theta, args.r).value
            closed = gs.qfi_asymptotic_closed(kind, theta)
            rows.append((theta, q, closed, _rel_err(q, closed)))
        meta = {"family": args.family, "eta": fam.eta,
                "r": "extrapolated" if args.r is None else args.r}
    emit(render(rows, header, args.format, meta), args.out)
    return EXIT_OK


def _teleport_suite(trials, rng, perturb):
    worst = 0.0
    marker = np.diag([1.0, -1.0])
    for kind in DV_FAMILIES:
        for p in np.round(np.arange(0.1, 1.0, 0.1), 10):
            ch = dv.make_channel(kind, p)
            table = dv.correction_table(kind)
            for rho in (random_density_matrix(2, rng) for _ in range(trials)):
                sim = teleport(rho, ch.choi, table)
                if perturb:
                    sim = sim.copy()
                    sim[:2, :2] += perturb * marker
                worst = max(worst, 0.5 * trace_norm(ch(rho) - sim))
    return worst


def _finite_resource_suite(perturb):
    worst = 0.0
    for eta in ETA_GRID:
        for nu in (abs(1 - eta) / 2 + d for d in NU_OFFSETS):
            target = gs.phase_insensitive_channel(eta, nu)
            sim = gs.bk_teleport_channel(gs.finite_resource(eta, nu), np.sqrt(eta))
            n_sim = sim.N + perturb * np.eye(2)
            worst = max(worst, np.abs(sim.T - target.T).max(), np.abs(n_sim - target.N).max())
    return worst


def _tilted_table(table, angle):
    """Rotate every output correction by ``exp(-i angle X / 2)`` on the qubit block."""
    tilt = np.eye(table.out_dim, dtype=complex)
    tilt[:2, :2] = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * dv.X
    return dv.CorrectionTable(table.input_unitaries,
                              tuple(tilt @ v for v in table.output_unitaries))


def _covariance_suite(perturb):
    worst = 0.0
    for kind in DV_FAMILIES:
        for p in np.round(np.arange(0.1, 1.0, 0.1), 10):
            ch = dv.make_channel(kind, p)
            table = dv.correction_table(kind)
            if perturb:
                table = _tilted_table(table, perturb)
            worst = max(worst, dv.verify_tele_covariance(ch, table).deviation)
    return worst


def _oracle_suite(pairs, rng, perturb):
    worst = 0.0
    for k in range(pairs):
        two = k % 2 == 1
        make = fock.random_two_mode_spec if two else fock.random_mode_spec
        a, b = make(rng, 2 * rng.random()), make(rng, 2 * rng.random())
        fa, fb = a.fock(max_tail=1e-4), b.fock(max_tail=1e-4)
        g = gs.gaussian_fidelity(gs.GaussianState(a.mean(), a.cm()),
                                 gs.GaussianState(b.mean(), b.cm()))
        worst = max(worst, abs(g - (fock.oracle_fidelity(fa, fb) + perturb)))
    return worst


def run_suite(name, trials=100, seed=0, perturb=0.0, pairs=10):
    rng = np.random.default_rng(seed)
    if name == "teleport":
        dev = _teleport_suite(trials, rng, perturb)
    elif name == "finite-resource":
        dev = _finite_resource_suite(perturb)
    elif name == "covariance":
        dev = _covariance_suite(perturb)
    elif name == "fidelity-oracle":
        dev = _oracle_suite(pairs, rng, perturb)
    else:
        raise UsageError(f"unknown suite {name!r}")
    tol = TOLERANCES[name]
    return {"suite": name, "passed": bool(dev <= tol), "max_deviation": float(dev),
            "tolerance": tol}


def cmd_verify(args):
    suites = SUITES if args.suite == "all" else (args.suite,)
    seed = _seed(args)
    reports = [run_suite(s, args.trials, seed, args.perturb, args.pairs) for s in suites]
    rows = [(r["suite"], r["passed"], r["max_deviation"], r["tolerance"]) for r in reports]
    header = ["suite", "passed", "max_deviation", "tolerance"]
    all_ok = all(r["passed"] for r in reports)
    emit(render(rows, header, args.format, {"seed": seed, "passed": all_ok,
                                              "perturb": args.perturb}), args.out)
    return EXIT_OK if all_ok else EXIT_FAIL


def fig_finite_qfi_rows(nbar_grid, numeric=False, eta=0.6):
    fam = gs.gaussian_family("thermal_loss", eta)
    rows = []
    for nbar in sorted(nbar_grid):
        if numeric:
            rows.append((nbar, gs.qfi_choi_limit(fam, nbar).value,
                         gs.qfi_suboptimal(fam, nbar).value))
        else:
            rows.append((nbar, gs.qfi_asymptotic_closed("thermal_loss", nbar),
                         gs.qfi_suboptimal_closed("thermal_loss", nbar)))
    return rows


def cmd_fig_finite_qfi(args):
    if any(v <= 0 for v in args.nbar):
        raise UsageError("--nbar values must be positive")
    rows = fig_finite_qfi_rows(args.nbar, args.numeric, args.eta)
    meta = {"numeric": args.numeric, "eta": args.eta}
    emit(render(rows, ["nbar", "qfi_asymptotic", "qfi_suboptimal"], args.format, meta),
         args.out)
    return EXIT_OK


def _seed(args):
    if args.seed is None:
        args.seed = new_seed()
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def cmd_estimate(args):
    if not 0 < args.p < 1:
        raise UsageError("--p must lie strictly between 0 and 1")
    seed = _seed(args)
    results = [run_block_experiment(args.family, args.p, n, args.trials, seed)
               for n in args.n]
    if args.trials < 2:
        print("warning: trials=1, the empirical variance is undefined", file=sys.stderr)
        slope = None
    else:
        try:
            slope = sql_scaling_fit(results)
        except ValueError as exc:
            print(f"warning: no scaling fit ({exc})", file=sys.stderr)
            slope = None
    if args.format == "json":
        doc = {"seed": seed, "family": args.family, "p": args.p, "slope": slope,
               "results": [r.to_dict() for r in results]}
        emit(json.dumps(_json_value(doc), indent=2, sort_keys=True) + "\n", args.out)
    else:
        header = ["n", "trials", "mean_estimate", "empirical_var", "variance_se", "qcrb",
                  "slope"]
        rows = [(r.n, r.trials, r.mean_estimate,
                 r.empirical_var if r.variance_defined else None,
                 r.variance_se, r.qcrb, slope) for r in results]
        emit(render(rows, header, "csv"), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chansim", description="Channel simulation and quantum metrology tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    q = sub.add_parser("qfi-table", help="numerical vs closed-form QFI over a grid")
    q.add_argument("--family", required=True, choices=DV_FAMILIES + tuple(CV_FAMILIES))
    q.add_argument("--p", type=float_list, help="error probabilities (qubit families)")
    q.add_argument("--nbar", type=float_list, help="thermal numbers (loss, amplifier)")
    q.add_argument("--nu", type=float_list, help="added noise (additive family)")
    q.add_argument("--eta", type=float, default=None, help="transmissivity or gain")
    q.add_argument("--r", type=float, default=None,
                   help="finite squeezing; omit to extrapolate r -> infinity")
    q.add_argument("--method", choices=("sld", "fidelity"), default="sld")
    common(q)
    q.set_defaults(func=cmd_qfi_table)

    v = sub.add_parser("verify", help="run the identity and oracle checks")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--trials", type=int, default=100, help="random inputs per channel")
    v.add_argument("--pairs", type=int, default=10, help="Gaussian pairs for the oracle")
    v.add_argument("--perturb", type=float, default=0.0,
                   help="inject a fault of this size (harness self-test)")
    v.add_argument("--seed", type=int, default=None)
    common(v)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fig-finite-qfi", help="asymptotic vs finite-resource QFI curves")
    f.add_argument("--nbar", type=float_list, default=[0.5, 1.0, 2.0, 5.0, 10.0])
    f.add_argument("--numeric", action="store_true",
                   help="compute both curves numerically instead of in closed form")
    f.add_argument("--eta", type=float, default=0.6)
    common(f)
    f.set_defaults(func=cmd_fig_finite_qfi)

    e = sub.add_parser("estimate", help="Monte Carlo Bell-probe estimation")
    e.add_argument("--family", choices=DV_FAMILIES, default="dephasing")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--n", type=int_list, default=[100, 1000, 10000])
    e.add_argument("--trials", type=int, default=500)
    e.add_argument("--seed", type=int, default=None)
    common(e)
    e.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "trials", 1) < 1:
        print("error: --trials must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
