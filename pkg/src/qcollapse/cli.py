"""Command-line harness: ``qcollapse {simon,zeno,waves,compile,oracle-gen}``.

Every report embeds the tool version, the experiment configuration and the
seed.  Output paths and ``--jobs`` are left out of the embedded config so
that identical experiments give byte-identical files wherever they are
written and however many workers ran them.

Exit codes: 0 success, 2 usage error, 3 input parse error, 4 sample budget
exhausted, 5 degenerate dynamics, 1 any other handled error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, seeding
from .errors import (
    BudgetExceededError,
    DegenerateDynamicsError,
    DimacsParseError,
    QCollapseError,
)
from .measure import backdated_state, collapse, marginal_probabilities, sample_index, simon_t2_state
from .oracle import PeriodicOracle, random_period, random_periodic
from .satnet import brute_force_sat, compile_formula, parse_dimacs
from .simon import DEFAULT_SAMPLE_FACTOR, recover_period
from .statevec import apply_hadamard, prepare_basis, to_bits
from .waves import decompose, gauge_indistinguishability, reconstruct
from .zeno import MODES, build_testbed, run_mode

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_BUDGET = 4
EXIT_DEGENERATE = 5

OUTPUT_DIR_ENV = "QCOLLAPSE_OUTPUT_DIR"
TRACE_COLUMNS = ["step", "survival_probability", "fidelity_with_initial", "solution_overlap"]
_NOT_CONFIG = {"command", "out", "trace", "emit", "jobs", "func"}


def _output_path(path: str | None, default: str) -> Path:
    p = Path(path or default)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _envelope(args: argparse.Namespace, **body) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}
    return {"tool": "qcollapse", "version": __version__, "command": args.command,
            "seed": args.seed, "config": config, **body}


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map; results never depend on ``jobs``."""
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _parse_mask(text: str, n: int) -> int:
    if set(text) - {"0", "1"} or not text or len(text) > n:
        raise argparse.ArgumentTypeError(f"mask {text!r} is not a binary string of at most {n} digits")
    return int(text, 2)


def _literals(text: str) -> list[int]:
    try:
        lits = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad literal list {text!r}") from None
    if 0 in lits:
        raise argparse.ArgumentTypeError("literal 0 is not a variable")
    return lits


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= seeding.SEED_MASK:
        raise argparse.ArgumentTypeError(f"seed {text} is not a 64-bit unsigned integer")
    return value


def _build_oracle(args) -> PeriodicOracle:
    if args.oracle:
        return PeriodicOracle.from_json(Path(args.oracle).read_text())
    if args.n is None:
        raise argparse.ArgumentTypeError("--n is required unless --oracle is given")
    if args.r == "random":
        r = random_period(args.n, seeding.stream(args.seed, seeding.PERIOD))
    else:
        r = _parse_mask(args.r, args.n)
    return random_periodic(args.n, r, seeding.derived_seed(args.seed, seeding.ORACLE))


def _load_formula(args):
    formula = parse_dimacs(Path(args.cnf).read_text())
    if args.fix:
        formula = formula.constrain(args.fix)
    return formula


def cmd_simon(args) -> int:
    oracle = _build_oracle(args)
    max_samples = args.max_samples or DEFAULT_SAMPLE_FACTOR * oracle.n

    def trial(i: int) -> dict:
        rng = seeding.stream(args.seed, seeding.SIMON_TRIAL, i)
        try:
            return recover_period(oracle, rng, max_samples, args.skip_step_d).to_json()
        except BudgetExceededError as exc:
            return {"error": "budget_exceeded", "samples_used": len(exc.z_samples),
                    "z_samples": exc.z_samples, "skip_step_d": args.skip_step_d}

    per_trial = _pmap(trial, range(args.trials), args.jobs)
    report = _envelope(args, n=oracle.n, r_true=oracle.r, oracle=oracle.to_json(),
                       per_trial=per_trial,
                       all_recovered=all(t.get("recovered_r") == oracle.r for t in per_trial))
    _write_json(_output_path(args.out, "simon_report.json"), report)
    return EXIT_BUDGET if any("error" in t for t in per_trial) else EXIT_OK


def cmd_oracle_gen(args) -> int:
    args.oracle = None
    oracle = _build_oracle(args)
    _write_json(_output_path(args.out, "oracle.json"), oracle.to_json())
    return EXIT_OK


def cmd_compile(args) -> int:
    circuit = compile_formula(_load_formula(args))
    _write_json(_output_path(args.emit, "circuit.json"), circuit.to_json())
    return EXIT_OK


def _complex_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def cmd_waves(args) -> int:
    args.oracle = None
    oracle = _build_oracle(args)
    phi_t2 = simon_t2_state(oracle)
    rng = seeding.stream(args.seed, seeding.WAVES)
    f_bar = sample_index(marginal_probabilities(phi_t2, "b"), rng)
    if args.stage == "t1":
        phi = apply_hadamard(prepare_basis(oracle.layout, 0), "a")
        beta = backdated_state(oracle, f_bar)
    else:
        phi = phi_t2
        beta = collapse(phi_t2, "b", f_bar).post_state
    delta = args.delta if args.delta is not None else float(rng.uniform(0, 2 * math.pi))
    pair = decompose(phi, beta, delta)
    phi_back, beta_back = reconstruct(pair)
    roundtrip = max(float(np.max(np.abs(phi_back - phi.amplitudes))),
                    float(np.max(np.abs(beta_back - beta.amplitudes))))
    gauge = gauge_indistinguishability(phi, beta, args.grid)
    report = _envelope(args, n=oracle.n, r_true=oracle.r, f_bar=to_bits(f_bar, oracle.n),
                       delta=delta, roundtrip_error=roundtrip, grid=args.grid,
                       rho_plus=_complex_matrix(gauge["rho_plus"]),
                       rho_minus=_complex_matrix(gauge["rho_minus"]),
                       max_abs_difference=gauge["max_abs_difference"])
    _write_json(_output_path(args.out, "waves_report.json"), report)
    return EXIT_OK


def cmd_zeno(args) -> int:
    formula = _load_formula(args)
    circuit, subspace, phi = build_testbed(formula)
    trace_path = _output_path(args.trace, "zeno_trace.csv")
    summary = _envelope(args, num_vars=formula.num_vars, num_clauses=len(formula.clauses),
                        hc_dim=subspace.dim, total_qubits=circuit.total_qubits,
                        solutions=brute_force_sat(formula))
    status = EXIT_OK
    if args.mode == "frequent":
        def trajectory(i: int):
            return run_mode("frequent", phi, subspace, args.slices,
                            seeding.stream(args.seed, seeding.ZENO_TRAJECTORY, i))
        traces = _pmap(trajectory, range(args.trajectories), args.jobs)
        with trace_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["trajectory"] + TRACE_COLUMNS)
            for i, tr in enumerate(traces):
                for s in tr.samples:
                    writer.writerow([i] + s.row())
        summary["trajectories"] = [
            {"rejected_at": tr.rejected_at, "final": dict(zip(TRACE_COLUMNS, tr.final.row()))}
            for tr in traces
        ]
        summary["surviving_fraction"] = sum(tr.survived for tr in traces) / len(traces)
    else:
        try:
            trace = run_mode(args.mode, phi, subspace, args.slices)
        except DegenerateDynamicsError as exc:
            summary["error"] = {"kind": "degenerate_dynamics", "step": exc.step, "message": str(exc)}
            trace, status = None, EXIT_DEGENERATE
        with trace_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for s in (trace.samples if trace else []):
                writer.writerow(s.row())
        if trace:
            summary["final"] = dict(zip(TRACE_COLUMNS, trace.final.row()))
    if args.out:
        _write_json(_output_path(args.out, "zeno_summary.json"), summary)
    return status


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcollapse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qcollapse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=True, jobs=False):
        if seed:
            p.add_argument("--seed", type=_seed, default=0, help="64-bit master seed (default 0)")
        if jobs:
            p.add_argument("--jobs", type=_positive, default=1, help="worker threads")

    p = sub.add_parser("simon", help="recover a hidden XOR period")
    p.add_argument("--n", type=_positive)
    p.add_argument("--r", default="random", help="binary period mask, or 'random'")
    p.add_argument("--oracle", help="oracle JSON from oracle-gen (overrides --n/--r)")
    p.add_argument("--trials", type=_positive, default=1)
    p.add_argument("--max-samples", type=_positive, default=None)
    p.add_argument("--skip-step-d", action="store_true", help="do not measure register b")
    p.add_argument("--out")
    common(p, jobs=True)
    p.set_defaults(func=cmd_simon)

    p = sub.add_parser("oracle-gen", help="write a seeded periodic oracle as JSON")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--r", default="random")
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_oracle_gen)

    p = sub.add_parser("compile", help="compile a DIMACS CNF to a reversible circuit")
    p.add_argument("--cnf", required=True)
    p.add_argument("--fix", type=_literals, default=None, help="input constraints, e.g. '1,-3'")
    p.add_argument("--emit")
    p.set_defaults(func=cmd_compile, seed=None)

    p = sub.add_parser("waves", help="retarded/advanced wave identities on Simon states")
    p.add_argument("--n", type=_positive, default=2)
    p.add_argument("--r", default="random")
    p.add_argument("--stage", choices=("t1", "t2"), default="t2")
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_waves)

    p = sub.add_parser("zeno", help="constrained-subspace rotation testbed")
    p.add_argument("--cnf", required=True)
    p.add_argument("--fix", type=_literals, default=None, help="input constraints, e.g. '1,-3'")
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--slices", type=int, required=True)
    p.add_argument("--trajectories", type=int, default=1)
    p.add_argument("--trace")
    p.add_argument("--out", help="optional JSON summary")
    common(p, jobs=True)
    p.set_defaults(func=cmd_zeno)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "zeno":
        if args.slices < 1:
            parser.error("--slices must be >= 1")
        if args.trajectories < 1:
            parser.error("--trajectories must be >= 1")
    if args.command == "waves" and args.grid < 2:
        parser.error("--grid must be >= 2")
    if args.command == "simon" and args.oracle is None and args.n is None:
        parser.error("simon needs --n or --oracle")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except (DimacsParseError, json.JSONDecodeError) as exc:
        print(f"qcollapse: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (QCollapseError, OSError) as exc:
        print(f"qcollapse: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
