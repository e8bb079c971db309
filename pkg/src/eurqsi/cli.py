"""Command-line front end: gallery runs, scenario checks, fuzzing, experiments.

Exit codes form a stable contract: 0 pass, 1 tolerance failure, 2 parse
error, 3 input validation error.  JSON is the canonical output (17
significant digits, sorted keys, byte-identical under replay); csv and
table are projections of it.  If the EURQSI_OUTDIR environment variable is
set, the rendered output is also written there atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import gallery
from .relations import RELATION_IDS, check_bipartite, fuzz
from .serialize import canonical_json, load_scenario
from .simulate import NoiseSpec, run_experiment
from .states import InvalidStateError

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _csv(rows: list[dict], columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            cells.append(_fmt(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _aligned(rows: list[tuple]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(f"{str(v):<{w}}" for v, w in zip(row, widths)) for row in rows
    ) + "\n"


def _emit(text: str, out_name: str) -> None:
    sys.stdout.write(text)
    out_dir = os.environ.get("EURQSI_OUTDIR")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=out_name + ".")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, os.path.join(out_dir, out_name))


def _parse_noise(spec: str | None) -> NoiseSpec:
    if not spec or spec == "none":
        return NoiseSpec()
    values = {"depolarizing": 0.0, "readout": 0.0}
    for part in spec.split(","):
        key, _, raw = part.partition("=")
        key = key.strip()
        if key not in values or not raw:
            raise ValueError(
                f"noise spec must look like depolarizing=P,readout=Q; got {spec!r}"
            )
        values[key] = float(raw)
    return NoiseSpec(depolarizing_p=values["depolarizing"], readout_flip=values["readout"])


def cmd_examples(args) -> int:
    rows = gallery.run_all(tolerance_override=args.tolerance)
    ok = gallery.all_ok(rows)
    payload = {
        "command": "examples",
        "cases": len(gallery.CASE_IDS),
        "all_ok": ok,
        "checks": [r.to_dict() for r in rows],
    }
    if args.format == "json":
        text = canonical_json(payload) + "\n"
    elif args.format == "csv":
        text = _csv([r.to_dict() for r in rows],
                    ["case", "check", "residual", "tolerance", "ok"])
    else:
        table = [("case", "check", "residual", "tolerance", "ok")]
        for r in rows:
            table.append((r.case, r.check, f"{r.residual:.3e}", f"{r.tolerance:.0e}",
                          "pass" if r.ok else "FAIL"))
        text = _aligned(table) + f"all_ok: {ok}\n"
    _emit(text, f"examples.{args.format}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_check(args) -> int:
    try:
        rho, x_pvm, z_pvm = load_scenario(args.scenario)
        report = check_bipartite(rho, x_pvm, z_pvm)
    except json.JSONDecodeError as exc:
        sys.stderr.write(
            f"error: cannot parse scenario: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})\n"
        )
        return EXIT_PARSE
    except OSError as exc:
        sys.stderr.write(f"error: cannot read scenario: {exc}\n")
        return EXIT_PARSE
    except InvalidStateError as exc:
        sys.stderr.write(f"error: invalid scenario: {exc}\n")
        return EXIT_VALIDATION
    payload = {"command": "check", "scenario": str(args.scenario),
               "report": report.to_dict()}
    if args.format == "json":
        text = canonical_json(payload) + "\n"
    elif args.format == "csv":
        rows = [{"key": k, "value": v} for k, v in report.to_dict().items()]
        text = _csv(rows, ["key", "value"])
    else:
        text = report.table() + "\n"
    _emit(text, f"check.{args.format}")
    return EXIT_OK if report.slack_refined >= -args.tolerance else EXIT_TOLERANCE


def cmd_fuzz(args) -> int:
    summary = fuzz(args.relation, args.trials, args.dim, args.seed)
    payload = {"command": "fuzz", **summary.to_dict()}
    if args.format == "json":
        text = canonical_json(payload) + "\n"
    elif args.format == "csv":
        flat = summary.to_dict()
        flat.pop("worst_instance")
        flat.pop("worst_report")
        rows = [{"key": k, "value": v if not isinstance(v, list) else str(v)}
                for k, v in flat.items()]
        text = _csv(rows, ["key", "value"])
    else:
        d = summary.to_dict()
        rows = [(k, d[k]) for k in ("relation_id", "trials", "dims", "seed",
                                    "pvm_mode", "min_slack", "worst_trial",
                                    "max_refinement_gap")]
        text = _aligned([(k, str(v)) for k, v in rows])
    _emit(text, f"fuzz.{args.format}")
    return EXIT_OK if summary.min_slack >= -args.tolerance else EXIT_TOLERANCE


def cmd_experiment(args) -> int:
    try:
        noise = _parse_noise(args.noise)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    result = run_experiment(args.id, shots=args.shots, noise=noise, seed=args.seed)
    payload = {"command": "experiment", **result.to_dict()}
    if args.format == "json":
        text = canonical_json(payload) + "\n"
    elif args.format == "csv":
        rows = []
        for name, t in sorted(result.tables.items()):
            for row in t.to_rows():
                rows.append({"table": name, **row})
        text = _csv(rows, ["table", "outcome", "count", "frequency", "stderr"])
    else:
        lines = [f"experiment {result.experiment}  shots {result.shots}  seed {result.seed}"]
        for name, t in sorted(result.tables.items()):
            lines.append(f"\n[{name}]")
            table = [("outcome", "count", "frequency", "stderr")]
            for row in t.to_rows():
                table.append((row["outcome"], row["count"],
                              f"{row['frequency']:.6f}", f"{row['stderr']:.6f}"))
            lines.append(_aligned(table).rstrip("\n"))
        if result.bloch_estimate is not None:
            x, y, z = result.bloch_estimate
            lines.append(f"\nbloch estimate  ({x:+.6f}, {y:+.6f}, {z:+.6f})")
        text = "\n".join(lines) + "\n"
    _emit(text, f"experiment_{args.id}.{args.format}")
    return EXIT_OK


def _positive_float(raw: str) -> float:
    value = float(raw)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eurqsi",
        description="Numerical checks of entropic uncertainty relations with "
                    "quantum side information and their measurement-reversibility "
                    "refinement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tolerance=None):
        p.add_argument("--format", choices=("json", "csv", "table"), default="json")
        if tolerance is not None:
            p.add_argument("--tolerance", type=_positive_float, default=tolerance,
                           help="pass/fail threshold (exit code 1 beyond it)")

    p = sub.add_parser("examples", help="replay the four built-in worked examples")
    common(p, tolerance=None)
    p.add_argument("--tolerance", type=_positive_float, default=None,
                   help="override every residual tolerance class")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("check", help="audit the relations on a scenario file")
    p.add_argument("--scenario", required=True, help="scenario JSON path")
    common(p, tolerance=1e-6)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuzz", help="stress the inequalities on random instances")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dim", type=int, default=2, help="dimension of the measured system")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--relation", choices=RELATION_IDS, default="bipartite_refined")
    common(p, tolerance=1e-6)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("experiment", help="simulate one of the six circuit protocols")
    p.add_argument("id", type=int, choices=range(1, 7), metavar="ID",
                   help="experiment number, 1-6")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--noise", default=None, metavar="depolarizing=P,readout=Q")
    p.add_argument("--seed", type=int, default=0)
    common(p, tolerance=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidStateError as exc:
        sys.stderr.write(f"error: invalid input: {exc}\n")
        return EXIT_VALIDATION
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_TOLERANCE if "slack" in str(exc) else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
