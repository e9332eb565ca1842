"""Command-line front end: ``distsense {design,simulate,advantage,examples}``.

Exit codes: 0 success, 1 parse/IO/usage error, 2 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import scenario as scenario_io
from .advantage import build_alternating, enumerate_blocks, product_advantage_sweep
from .branch_sim import evolve, parity_fisher, probe_state, qfi_mixed, qfi_pure, twirl
from .errors import NonIntegerEigenvalue, NotTwoBranch, ParseError, SensingError
from .oracle import MAX_QUBITS, statevector_oracle
from .field_model import rank_report
from .probe_designer import ProbePair, design, noiseless_optimum, perp_decompose

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2
ORACLE_TOL = 1e-9

DESIGN_COLUMNS = [
    "scenario", "J", "N", "k_star", "qfi_optimal", "qfi_noiseless",
    "max_residual", "block_census", "advantage_ratio",
]
SIMULATE_COLUMNS = [
    "scenario", "qfi_pure", "qfi_twirled", "purity", "parity_fisher", "oracle",
]
ADVANTAGE_COLUMNS = ["J", "optimal_qfi", "max_product_qfi", "ratio", "bound"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for domain errors here
    def error(self, message):
        raise UsageError(message)


@dataclass
class ReportRow:
    scenario: str
    J: int
    N: int
    k_star: int
    qfi_optimal: float
    qfi_noiseless: float
    max_residual: float
    block_census: str
    advantage_ratio: float | None = None


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in np.asarray(v, float) + 0.0) + ")"


def _census(dims) -> str:
    counts = Counter(dims)
    return ";".join(f"{d}x{counts[d]}" for d in sorted(counts))


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        _csv_to(fh, columns, rows)


def _csv_to(fh, columns, rows) -> None:
    writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in columns})


def design_report(sc: scenario_io.Scenario, tol: float | None = None) -> tuple[str, ReportRow]:
    problem = sc.problem(constraint_tol=tol)
    dec = perp_decompose(problem)
    pair = design(problem)
    noiseless = noiseless_optimum(problem.with_noise(()))
    residual = float(pair.residuals(problem.noise_rows).max(initial=0.0))
    blocks = twirl(probe_state(pair), problem.F, problem.noise_indices, sc.tolerances["twirl"])
    recomputed = float(np.dot(problem.signal, pair.s - pair.r) ** 2)
    ranks = rank_report(problem.noise_rows, sc.tolerances["rank"]) if problem.noise_indices else None
    dependent = [problem.noise_indices[i] for i in ranks.dependent_rows] if ranks else []

    lines = [
        f"scenario      : {sc.name}",
        f"sites J       : {sc.sensors.num_sites}   qubits N: {sc.sensors.num_qubits}",
        f"signal k*     : {sc.signal_index}   noise: {list(problem.noise_indices)}",
        f"mode          : {'integer' if problem.integer_mode else 'continuous'}",
        f"f_perp        : {_fmt(dec.f_perp)}",
        f"noise rank    : {ranks.rank if ranks else 0}   dependent rows: {dependent}",
        f"dfs dimension : {len(dec.dfs_basis)}",
        f"s*            : {_fmt(pair.s)}",
        f"r*            : {_fmt(pair.r)}",
        f"qfi optimal   : {pair.qfi:.10g}",
        f"qfi noiseless : {noiseless.qfi:.10g}",
        f"qfi recomputed: {recomputed:.10g}",
        f"max residual  : {residual:.3e}",
        f"blocks        : {_census(blocks.dims)}",
    ]
    row = ReportRow(
        scenario=sc.name,
        J=sc.sensors.num_sites,
        N=sc.sensors.num_qubits,
        k_star=sc.signal_index,
        qfi_optimal=pair.qfi,
        qfi_noiseless=noiseless.qfi,
        max_residual=residual,
        block_census=_census(blocks.dims),
    )
    return "\n".join(lines), row


def _design_job(args):
    path, tol = args
    try:
        sc = scenario_io.load(path)
        text, row = design_report(sc, tol)
        return EXIT_OK, text, asdict(row)
    except ParseError as exc:
        return EXIT_PARSE, f"{path}: parse error: {exc}", None
    except SensingError as exc:
        return EXIT_DOMAIN, f"{path}: {type(exc).__name__}: {exc}", None


def cmd_design(paths, csv_path=None, jobs=1, tol=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    tasks = [(p, tol) for p in paths]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_design_job, tasks))  # preserves input order
    else:
        results = [_design_job(t) for t in tasks]

    code = EXIT_OK
    rows = []
    for status, text, row in results:
        if status == EXIT_OK:
            print(text, file=out)
            print(file=out)
            rows.append(row)
        else:
            print(text, file=err)
            code = code or status
    if csv_path and rows:
        _write_csv(csv_path, DESIGN_COLUMNS, rows)
    return code


def _close(a: float, b: float, tol: float = ORACLE_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def simulate_report(sc: scenario_io.Scenario, phases=None, probe=None, tol=None, oracle=True):
    """Run the branch pipeline (and the qubit oracle when small) on one scenario.

    Returns ``(text, row, ok)`` where ``ok`` is False on an oracle mismatch.
    """
    problem = sc.problem(constraint_tol=tol)
    F = problem.F
    k = problem.signal_index
    probe = probe if probe is not None else sc.probe
    if probe is not None:
        s = np.asarray(probe, dtype=float)
        if s.shape != (F.shape[1],):
            raise ParseError(f"probe needs {F.shape[1]} entries")
        pair = ProbePair.from_vectors(s, -s, problem.signal)
        if not pair.in_box(problem.qubit_counts):
            raise SensingError("user probe lies outside the qubit box")
    else:
        pair = design(problem)
    phases = phases if phases is not None else sc.phases
    phases = np.zeros(F.shape[0]) if phases is None else np.asarray(phases, dtype=float)
    if phases.shape != (F.shape[0],) or not np.all(np.isfinite(phases)):
        raise ParseError(f"need {F.shape[0]} finite phases")

    state = evolve(probe_state(pair), phases, F)
    pure = qfi_pure(state, problem.signal)
    blocks = twirl(state, F, problem.noise_indices, sc.tolerances["twirl"])
    mixed = qfi_mixed(blocks, problem.signal)
    purity = blocks.purity()
    norm_ok = abs(float(np.sum(state.probabilities)) - 1.0) <= sc.tolerances["normalization"]
    try:
        parity = parity_fisher(pair, F, k, phases[k])
    except NotTwoBranch:
        parity = None

    ok = True
    if not oracle:
        status = "disabled"
    elif sc.sensors.num_qubits > MAX_QUBITS:
        status = f"skipped (more than {MAX_QUBITS} qubits)"
    else:
        try:
            res = statevector_oracle(F, k, problem.noise_indices, problem.qubit_counts, pair, phases)
        except NonIntegerEigenvalue as exc:
            status = f"skipped ({exc})"
        else:
            parity_ok = parity is None or res.parity_fisher is None or _close(res.parity_fisher, parity)
            if _close(res.qfi, pure) and _close(res.twirled_qfi, mixed) and parity_ok:
                status = "agree"
            else:
                ok = False
                status = (
                    f"MISMATCH pure {pure:.12g} vs {res.qfi:.12g}, "
                    f"twirled {mixed:.12g} vs {res.twirled_qfi:.12g}, "
                    f"parity {parity} vs {res.parity_fisher}"
                )

    lines = [
        f"scenario      : {sc.name}",
        f"s / r         : {_fmt(pair.s)} / {_fmt(pair.r)}",
        f"phases        : {_fmt(phases)}",
        f"qfi pure      : {pure:.10g}",
        f"qfi twirled   : {mixed:.10g}",
        f"purity        : {purity:.12g}",
        f"normalized    : {'yes' if norm_ok else 'NO'}",
        f"blocks        : {_census(blocks.dims)}",
        f"parity fisher : {'n/a' if parity is None else f'{parity:.10g}'}",
        f"oracle        : {status}",
    ]
    row = {
        "scenario": sc.name,
        "qfi_pure": pure,
        "qfi_twirled": mixed,
        "purity": purity,
        "parity_fisher": parity,
        "oracle": status,
    }
    return "\n".join(lines), row, ok and norm_ok


def _parse_floats(text):
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"bad number list {text!r}") from exc


def cmd_simulate(path, phases=None, probe=None, csv_path=None, tol=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        sc = scenario_io.load(path)
        text, row, ok = simulate_report(sc, _parse_floats(phases), _parse_floats(probe), tol)
    except ParseError as exc:
        print(f"{path}: parse error: {exc}", file=err)
        return EXIT_PARSE
    except SensingError as exc:
        print(f"{path}: {type(exc).__name__}: {exc}", file=err)
        return EXIT_DOMAIN
    print(text, file=out)
    if csv_path:
        _write_csv(csv_path, SIMULATE_COLUMNS, [row])
    if not ok:
        print(f"{path}: self-check failed: {row['oracle']}", file=err)
        return EXIT_DOMAIN
    return EXIT_OK


def advantage_rows(Js, num_samples=4096, seed=0):
    rows = []
    for J in Js:
        scen = build_alternating(J)
        census = enumerate_blocks(scen)
        sweep = product_advantage_sweep(scen, num_samples=num_samples, seed=seed)
        rows.append({
            "J": J,
            "optimal_qfi": sweep.optimal_qfi,
            "max_product_qfi": sweep.max_product_qfi,
            "ratio": sweep.ratio,
            "bound": sweep.bound,
            "_census": census,
        })
    return rows


def cmd_advantage(Js, csv_path=None, num_samples=4096, seed=0, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    if not Js:
        print("advantage: need at least one J", file=err)
        return EXIT_PARSE
    try:
        rows = advantage_rows(Js, num_samples, seed)
    except SensingError as exc:
        print(f"advantage: {type(exc).__name__}: {exc}", file=err)
        return EXIT_DOMAIN
    buf = io.StringIO()
    _csv_to(buf, ADVANTAGE_COLUMNS, rows)
    out.write(buf.getvalue())
    if csv_path:
        Path(csv_path).write_text(buf.getvalue())
    bad = [r["J"] for r in rows if r["ratio"] > r["bound"] + 1e-9]
    if bad:
        print(f"advantage: product bound violated for J = {bad}", file=err)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_examples(directory, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        paths = scenario_io.write_examples(directory)
    except OSError as exc:
        print(f"examples: {exc}", file=err)
        return EXIT_PARSE
    for p in paths:
        print(p, file=out)
    return EXIT_OK


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("design", help="optimal noise-insensitive probe for each scenario")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--tol", type=float, help="constraint tolerance override")

    p = sub.add_parser("simulate", help="evolve, twirl and read out the probe")
    p.add_argument("scenario")
    p.add_argument("--phases", help="comma-separated phases, one per function")
    p.add_argument("--probe", help="comma-separated s (r = -s) instead of the optimum")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--tol", type=float, help="constraint tolerance override")

    p = sub.add_parser("advantage", help="entangled vs product QFI for the alternating scenario")
    p.add_argument("J", nargs="*", type=int)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--samples", type=_positive_int, default=4096)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("examples", help="write the bundled example scenarios")
    p.add_argument("directory", nargs="?", default=".")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"distsense: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if getattr(args, "tol", None) is not None and args.tol <= 0:
        print("distsense: error: --tol must be positive", file=sys.stderr)
        return EXIT_PARSE
    if args.command == "design":
        return cmd_design(args.scenarios, args.csv, args.jobs, args.tol)
    if args.command == "simulate":
        return cmd_simulate(args.scenario, args.phases, args.probe, args.csv, args.tol)
    if args.command == "advantage":
        return cmd_advantage(args.J, args.csv, args.samples, args.seed)
    return cmd_examples(args.directory)


if __name__ == "__main__":
    sys.exit(main())
