"""Command-line front end: one subcommand per reproduced data set.

Every subcommand writes one or more tables as CSV (default) or JSON, either
to stdout or into the directory given by ``--out``. Output is deterministic
for a fixed command line and seed.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, acceptance, noisy, optimize, phase
from .qcore import EncodingAxis, ItdmError, SingleQubitState

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


class Table:
    def __init__(self, name: str, columns: list[str], rows: list[tuple]):
        self.name = name
        self.columns = columns
        self.rows = rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _provenance(args) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format")}
    return {"command": args.command, "seed": args.seed, "version": __version__, "params": params}


def render(table: Table, fmt: str, prov: dict) -> str:
    if fmt == "json":
        records = [{c: _jsonable(v) for c, v in zip(table.columns, row)} for row in table.rows]
        doc = {"provenance": {**prov, "table": table.name}, "columns": table.columns, "records": records}
        return json.dumps(doc, indent=1, sort_keys=False, default=str) + "\n"
    buf = io.StringIO()
    buf.write(f"# command: {prov['command']}\n")
    buf.write(f"# table: {table.name}\n")
    buf.write(f"# seed: {prov['seed']}\n")
    buf.write(f"# version: {prov['version']}\n")
    buf.write(f"# params: {json.dumps(prov['params'], sort_keys=True, default=str)}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def emit(tables: list[Table], args) -> None:
    prov = _provenance(args)
    ext = "json" if args.format == "json" else "csv"
    if args.out is None:
        for t in tables:
            sys.stdout.write(render(t, args.format, prov))
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for t in tables:
        with open(out / f"{t.name}.{ext}", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render(t, args.format, prov))


# parsing helpers

def _angle(args, value: float) -> float:
    return float(np.deg2rad(value)) if args.degrees else float(value)


def _vector(text: str) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if v.shape != (3,):
        raise argparse.ArgumentTypeError(f"expected three components, got {text!r}")
    if not np.all(np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"non-finite component in {text!r}")
    return v


def _axis_vector(text: str) -> np.ndarray:
    v = _vector(text)
    if np.linalg.norm(v) == 0:
        raise argparse.ArgumentTypeError("axis must be nonzero")
    return v


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} is outside [0, 1]")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} is not a positive integer")
    return v


def _axis(v: np.ndarray) -> EncodingAxis:
    return EncodingAxis.normalized(v)


def _probe(v: np.ndarray):
    if np.linalg.norm(v) > 1 + 1e-12:
        raise ItdmError(f"Bloch vector {v.tolist()} has norm above 1")
    return v


# subcommands

def cmd_fig2(args) -> list[Table]:
    grid = np.linspace(-1, 1, args.grid)
    prod, full, diff = [], [], []
    for n1 in grid:
        for n2 in grid:
            if n1 * n1 + n2 * n2 > 1 + 1e-12:
                continue
            axis = EncodingAxis.from_n1_n2(float(n1), float(n2))
            p = optimize.maximize_product_qfi(axis, args.N, restarts=args.restarts, seed=args.seed,
                                              threads=args.threads).best_value
            a = optimize.maximize_entangled_qfi(axis, args.N, restarts=args.restarts, seed=args.seed,
                                                threads=args.threads).best_value
            prod.append((n1, n2, p))
            full.append((n1, n2, a))
            diff.append((n1, n2, a - p))
    cols = ["n1", "n2", "qfi"]
    return [Table("fig2_product", cols, prod), Table("fig2_all_states", cols, full),
            Table("fig2_difference", ["n1", "n2", "delta_qfi"], diff)]


def cmd_fig3(args) -> list[Table]:
    theta = _angle(args, args.theta)
    axis = _axis(args.axis)
    rows = []
    for q in np.linspace(0, 1, args.grid):
        q = float(q)
        rows.append((q, noisy.nitdm_fi_single(q, theta, axis.n2), noisy.switched_fi(q, theta),
                     *(noisy.regular_qfi(q, axis, _probe(s)) for s in args.s)))
    cols = ["q", "flip", "switch"] + [f"regular_s{k}" for k in range(len(args.s))]
    return [Table("fig3", cols, rows)]


def cmd_fig4(args) -> list[Table]:
    theta = _angle(args, args.theta)
    axis, probe = _axis(args.axis), _probe(args.probe)
    rows = []
    for q in args.q:
        Ns, F = noisy.multi_scan(q, theta, axis, probe, args.n_max, args.p_c, _angle(args, args.theta_c))
        for N, f in zip(Ns, F):
            rows.append((q, int(N), f / N if args.per_qubit else f))
    return [Table("fig4", ["q", "N", "fi_per_qubit" if args.per_qubit else "fi"], rows)]


def cmd_fig5(args) -> list[Table]:
    qs = np.linspace(0, 1, args.grid)
    n2s = np.linspace(0, 1, args.grid)
    heat = [(float(q), float(n2), optimize.average_difference(float(q), float(n2))) for q in qs for n2 in n2s]
    fit_grid = np.linspace(0.01, 0.99, args.fit_points)
    fit = optimize.fit_n2_threshold(fit_grid, n2_zero=args.n2_zero)
    curve = [(float(q), optimize.find_n2_threshold(float(q)), float(optimize.n2_min_model(q, fit.g, fit.h, fit.n2_zero)))
             for q in fit_grid]
    summary = [("g", fit.g, fit.rel_uncertainty[0]), ("h", fit.h, fit.rel_uncertainty[1]),
               ("n2_zero", fit.n2_zero, 0.0), ("residual", fit.residual, 0.0)]
    return [Table("fig5_heatmap", ["q", "n2", "avg_flip_minus_switch"], heat),
            Table("fig5_threshold", ["q", "n2_threshold", "n2_fit"], curve),
            Table("fig5_fit", ["parameter", "value", "rel_uncertainty"], summary)]


def cmd_fig6(args) -> list[Table]:
    rows = []
    thetas = np.linspace(0, 2 * np.pi, args.grid)
    for q in np.linspace(0, 1, args.grid):
        x, y = noisy.flip_switch_xy(float(q), thetas)
        rows.extend((float(q), float(t), float(a), float(b), float(a + b)) for t, a, b in zip(thetas, x, y))
    return [Table("fig6", ["q", "theta", "x", "y", "x_plus_y"], rows)]


def cmd_fig7(args) -> list[Table]:
    axis, probe = _axis(args.axis), _probe(args.probe)
    rows = []
    for q in args.q:
        Ns, avg = noisy.averaged_multi_curve(q, axis, probe, args.n_max, args.resolution)
        rows.extend((q, int(N), a, a / N) for N, a in zip(Ns, avg))
    return [Table("fig7", ["q", "N", "avg_fi", "avg_fi_per_qubit"], rows)]


def cmd_table1(args) -> list[Table]:
    axis, probe = _axis(args.axis), _probe(args.probe)
    rows = []
    for q in args.q:
        r = noisy.averaged_table_row(q, axis, probe, args.n_max, args.resolution)
        rows.append((r.q, r.per_qubit_N, r.per_qubit_value, r.max_N, r.max_value))
    return [Table("table1", ["q", "per_qubit_N", "max_avg_fi_per_qubit", "max_N", "max_avg_fi"], rows)]


def cmd_phase_opt(args) -> list[Table]:
    rng = np.random.default_rng(args.seed)
    rows = []
    for k in range(args.samples):
        axis = EncodingAxis.normalized(rng.normal(size=3))
        for N in args.N:
            best = optimize.maximize_product_qfi(axis, N, restarts=args.restarts, seed=args.seed + k,
                                                 threads=args.threads).best_value
            closed = phase.qfi_phase_max(axis, N)
            rows.append((axis.n1, axis.n2, axis.n3, N, best, closed, best - closed))
    return [Table("phase_opt", ["n1", "n2", "n3", "N", "optimized", "closed_form", "gap"], rows)]


def cmd_axis_qfi(args) -> list[Table]:
    theta, xi = _angle(args, args.theta), _angle(args, args.xi)
    probe = SingleQubitState(args.p_s, _angle(args, args.theta_s))
    rows = []
    for phi in np.linspace(0, np.pi, args.grid):
        for N in args.N:
            rows.append((float(phi), N, phase.axis_qfi(theta, float(phi), xi, probe, args.p_c, N, "phi"),
                         phase.axis_qfi(theta, float(phi), xi, probe, args.p_c, N, "xi")))
    return [Table("axis_qfi", ["phi", "N", "qfi_phi", "qfi_xi"], rows)]


def cmd_spectrum(args) -> list[Table]:
    axis = _axis(args.axis)
    rows = []
    for theta in np.linspace(0, 2 * np.pi, args.grid):
        spec = phase.spectrum_flip_overlap(axis, float(theta))
        rows.append((float(theta), spec.phases[0], spec.phases[1], spec.degenerate))
    return [Table("spectrum", ["theta", "f_plus", "f_minus", "degenerate"], rows)]


def cmd_small_theta(args) -> list[Table]:
    axis = _axis(args.axis)
    theta = _angle(args, args.theta)
    rows = []
    for s_y in np.linspace(-1, 1, args.grid):
        s = np.array([np.sqrt(max(1 - s_y * s_y, 0.0)), s_y, 0.0])
        ov = phase.overlap_polar(s, axis, theta)
        for N in args.N:
            for tc in (0.0, _angle(args, args.theta_c)):
                try:
                    exact = phase.restricted_fi(ov, N, 0.5, tc)
                except phase.SingularPointError:
                    exact = float("nan")
                rows.append((float(s_y), N, tc, phase.small_theta_fi(float(s_y), axis.n2, N, tc), exact))
    return [Table("small_theta", ["s_y", "N", "theta_c", "limit_fi", "fi_at_theta"], rows)]


def cmd_repetition(args) -> list[Table]:
    theta = _angle(args, args.theta)
    axis, probe = _axis(args.axis), _probe(args.probe)
    rows = []
    for q in args.q:
        p = noisy.repetition_plan(q, theta, axis, probe, args.n_total)
        rows.append((q, args.n_total, p.tilde_N, p.tilde_F, p.repetitions, p.effective_fi, p.baseline_fi))
    return [Table("repetition_plan", ["q", "N_total", "tilde_N", "tilde_F", "repetitions", "effective_fi",
                                      "baseline_fi"], rows)]


def cmd_acceptance(args) -> int:
    results = acceptance.run_all(args.criteria)
    for r in results:
        print(r.line(), file=sys.stderr)
    doc = {"provenance": _provenance(args), "all_passed": all(r.passed for r in results),
           "criteria": [r.as_dict() for r in results]}
    text = json.dumps(doc, indent=1, default=str) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "acceptance.json").write_text(text, encoding="utf-8")
    return EXIT_OK if doc["all_passed"] else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--grid", type=_positive_int, default=None, help="points per grid axis")
    common.add_argument("--degrees", action="store_true", help="read angle arguments in degrees")

    parser = argparse.ArgumentParser(prog="itdm", description="Flip-encoded quantum metrology data generator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, grid, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func, grid_default=grid)
        return p

    y = "0,1,0"
    plus_i = "0,1,0"

    p = add("fig2", cmd_fig2, 21, "optimal product and all-state QFI maps over (n1, n2)")
    p.add_argument("--N", type=_positive_int, default=3)
    p.add_argument("--restarts", type=_positive_int, default=optimize.RESTARTS)

    p = add("fig3", cmd_fig3, 101, "single-qubit flip, switch and regular FI against q")
    p.add_argument("--theta", type=float, default=np.pi / 4)
    p.add_argument("--axis", type=_axis_vector, default=_vector(y))
    p.add_argument("--s", type=_vector, action="append", default=None, help="probe Bloch vector (repeatable)")

    p = add("fig4", cmd_fig4, None, "multiqubit noisy FI against N")
    p.add_argument("--q", type=_unit_interval, action="append", default=None)
    p.add_argument("--theta", type=float, default=np.pi / 4)
    p.add_argument("--theta-c", type=float, default=0.0)
    p.add_argument("--p-c", type=_unit_interval, default=0.5)
    p.add_argument("--axis", type=_axis_vector, default=_vector(y))
    p.add_argument("--probe", type=_vector, default=_vector(plus_i))
    p.add_argument("--n-max", type=_positive_int, default=noisy.N_CAP)
    p.add_argument("--per-qubit", action="store_true")

    p = add("fig5", cmd_fig5, 51, "averaged flip-minus-switch map and fitted n2 threshold")
    p.add_argument("--fit-points", type=_positive_int, default=50)
    p.add_argument("--n2-zero", type=float, default=optimize.N2_ZERO)

    add("fig6", cmd_fig6, 101, "x + y dominance surface over (q, theta)")

    p = add("fig7", cmd_fig7, None, "theta-averaged multiqubit FI against N")
    p.add_argument("--q", type=_unit_interval, action="append", default=None)
    p.add_argument("--axis", type=_axis_vector, default=_vector(y))
    p.add_argument("--probe", type=_vector, default=_vector(plus_i))
    p.add_argument("--n-max", type=_positive_int, default=200)
    p.add_argument("--resolution", type=_positive_int, default=noisy.DEFAULT_RESOLUTION)

    p = add("table1", cmd_table1, None, "maxima of the theta-averaged multiqubit FI")
    p.add_argument("--q", type=_unit_interval, action="append", default=None)
    p.add_argument("--axis", type=_axis_vector, default=_vector(y))
    p.add_argument("--probe", type=_vector, default=_vector(plus_i))
    p.add_argument("--n-max", type=_positive_int, default=noisy.N_CAP)
    p.add_argument("--resolution", type=_positive_int, default=noisy.DEFAULT_RESOLUTION)

    p = add("phase-opt", cmd_phase_opt, None, "optimized product QFI against the closed form")
    p.add_argument("--samples", type=_positive_int, default=20)
    p.add_argument("--N", type=_positive_int, action="append", default=None)
    p.add_argument("--restarts", type=_positive_int, default=optimize.RESTARTS)

    p = add("axis-qfi", cmd_axis_qfi, 37, "QFI for the axis angles phi and xi")
    p.add_argument("--theta", type=float, default=np.pi)
    p.add_argument("--xi", type=float, default=np.pi / 2)
    p.add_argument("--theta-s", type=float, default=np.pi)
    p.add_argument("--p-s", type=_unit_interval, default=0.5)
    p.add_argument("--p-c", type=_unit_interval, default=0.5)
    p.add_argument("--N", type=_positive_int, action="append", default=None)

    p = add("spectrum", cmd_spectrum, 181, "eigenphases of U^dagger U^T against theta")
    p.add_argument("--axis", type=_axis_vector, default=_vector("0.6,0.8,0"))

    p = add("small-theta", cmd_small_theta, 21, "small-parameter FI limit against s_y")
    p.add_argument("--axis", type=_axis_vector, default=_vector(y))
    p.add_argument("--theta", type=float, default=1e-4)
    p.add_argument("--theta-c", type=float, default=np.pi / 3)
    p.add_argument("--N", type=_positive_int, action="append", default=None)

    p = add("repetition-plan", cmd_repetition, None, "block size and effective FI of the repetition strategy")
    p.add_argument("--q", type=_unit_interval, action="append", default=None)
    p.add_argument("--n-total", type=_positive_int, default=1000)
    p.add_argument("--theta", type=float, default=np.pi / 4)
    p.add_argument("--axis", type=_axis_vector, default=_vector(y))
    p.add_argument("--probe", type=_vector, default=_vector(plus_i))

    p = add("acceptance", cmd_acceptance, None, "run the acceptance suite and emit a JSON report")
    p.add_argument("--criteria", type=_positive_int, nargs="*", default=None)
    return parser


LIST_DEFAULTS = {"q": [0.95, 0.99], "N": None, "s": [[0.8, 0.6, 0.0], [0.0, 1.0, 0.0]]}
N_DEFAULTS = {"phase-opt": [1, 3, 5], "axis-qfi": [1, 2, 3], "small-theta": [1, 2, 5, 10]}


def _fill_defaults(args) -> None:
    if args.grid is None:
        args.grid = args.grid_default
    del args.grid_default
    if hasattr(args, "q") and args.q is None:
        args.q = list(LIST_DEFAULTS["q"])
    if hasattr(args, "s") and args.s is None:
        args.s = [np.array(v) for v in LIST_DEFAULTS["s"]]
    if hasattr(args, "N") and args.N is None and args.command in N_DEFAULTS:
        args.N = list(N_DEFAULTS[args.command])
    for key in ("axis", "probe"):
        if hasattr(args, key):
            setattr(args, key, np.asarray(getattr(args, key), dtype=float))


def _vector_repr(args):
    # arrays in provenance as plain lists
    for k, v in list(vars(args).items()):
        if isinstance(v, np.ndarray):
            setattr(args, k, v.tolist())
        elif isinstance(v, list) and v and isinstance(v[0], np.ndarray):
            setattr(args, k, [x.tolist() for x in v])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _fill_defaults(args)
    func = args.func
    try:
        if args.command == "acceptance":
            return func(args)
        tables = func(args)
        _vector_repr(args)
        emit(tables, args)
    except (ItdmError, ArithmeticError, ValueError) as exc:
        print(f"itdm: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
