"""``qatchain`` command line: run, verify and bench RunSpec files."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import OracleAccuracyError, QatError, SpecFileError
from .grid import write_snapshot
from .runspec import benchmark, execute, load_runspec

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_PHYSICS = 3
EXIT_VERIFY = 4


def _snapshot_name(t: float) -> str:
    return f"snapshot_t{t:.9g}.csv"


def _write_outputs(result, spec, base_dir: Path, report: str | None,
                   snapshot_dir: str | None) -> Path:
    report_path = Path(report) if report else base_dir / spec.outputs.report
    report_path.parent.mkdir(parents=True, exist_ok=True)
    result.report.to_csv(report_path)
    if result.snapshots:
        out = Path(snapshot_dir) if snapshot_dir else report_path.parent
        out.mkdir(parents=True, exist_ok=True)
        for t, state in result.snapshots.items():
            write_snapshot(state, out / _snapshot_name(t))
    return report_path


def _verify_failures(result, tol: float) -> list[str]:
    return [f"t={row.time:.9g}: fidelity {row.fidelity:.15f} < {1.0 - tol:.15f}"
            for row in result.report.rows if row.fidelity < 1.0 - tol]


def _cmd_run(args) -> int:
    spec, base = load_runspec(args.spec)
    want_oracle = True if args.verify else None
    try:
        result = execute(spec, base, oracle=want_oracle, oracle_dt=args.oracle_dt)
    except OracleAccuracyError as exc:
        if args.verify:
            print(f"oracle: {exc}", file=sys.stderr)
            return EXIT_VERIFY
        raise
    path = _write_outputs(result, spec, base, args.report, args.snapshot_dir)
    print(f"report: {path} ({len(result.report.rows)} rows)")
    if "max_path_discrepancy" in result.report.footer:
        print(f"max_path_discrepancy: {result.report.footer['max_path_discrepancy']:.3e}")
    if result.min_fidelity is not None:
        print(f"min_fidelity: {result.min_fidelity:.15f}")
    if args.verify:
        bad = _verify_failures(result, args.tol)
        for line in bad:
            print(line, file=sys.stderr)
        if bad:
            return EXIT_VERIFY
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec, base = load_runspec(args.spec)
    try:
        result = execute(spec, base, oracle=True, oracle_dt=args.oracle_dt)
    except OracleAccuracyError as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    bad = _verify_failures(result, args.tol)
    for line in bad:
        print(line, file=sys.stderr)
    status = "FAIL" if bad else "ok"
    print(f"{status}: {len(result.report.rows)} checkpoints, "
          f"min fidelity {result.min_fidelity:.15f}, tol {args.tol:g}")
    return EXIT_VERIFY if bad else EXIT_OK


def _cmd_bench(args) -> int:
    spec, base = load_runspec(args.spec)
    rows = benchmark(spec, base, oracle_dt=args.oracle_dt, repeats=args.repeats)
    print(f"{'method':<10} {'wall_time_s':>12} {'checkpoint_error':>17}")
    for r in rows:
        print(f"{r.method:<10} {r.wall_time:>12.4f} {r.checkpoint_error:>17.3e}")
    analytic = min(r.wall_time for r in rows if r.method != "oracle")
    oracle = next(r.wall_time for r in rows if r.method == "oracle")
    if analytic > 0:
        print(f"speedup (oracle / fastest analytic): {oracle / analytic:.1f}x")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qatchain",
        description="Evolve wave packets through free/harmonic schedules.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="RunSpec JSON file")
        p.add_argument("--oracle-dt", type=float, default=None,
                       help="override the oracle time step")

    run = sub.add_parser("run", help="evolve and write the report and snapshots")
    common(run)
    run.add_argument("--snapshot-dir", default=None,
                     help="directory for snapshot CSVs (default: next to the report)")
    run.add_argument("--report", default=None,
                     help="report path (default: outputs.report beside the RunSpec file)")
    run.add_argument("--verify", action="store_true",
                     help="also run the oracle and fail (exit 4) below tolerance")
    run.add_argument("--tol", type=float, default=1e-6)
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", help="compare the analytic chain to the oracle")
    common(verify)
    verify.add_argument("--tol", type=float, default=1e-6,
                        help="required fidelity is 1 - tol at every checkpoint")
    verify.set_defaults(func=_cmd_verify)

    bench = sub.add_parser("bench", help="time analytic paths against the oracle")
    common(bench)
    bench.add_argument("--repeats", type=int, default=1)
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except QatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
