"""Command-line front end: ``gen``, ``rank``, ``match``, ``verify``, ``bench``.

Exit codes: 0 success, 2 invalid input or configuration, 3 instance refused
by the chosen algorithm, 4 resource guard, 5 verification failed.
"""
import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import List, Optional

from .assignment import ValueMatrix, closeness_from_csv, max_weight_assignment
from .bench import PRESETS, ExperimentPlan, VerificationError, run_bench, write_bench
from .common import (
    ConfigError, InvalidInputError, RideMatchError, SizeGuardError, UnsupportedInstanceError,
)
from .datagen import GenConfig, derive_matching_instance, instance_from_closeness, write_population
from .metrics import metric_report
from .ranking import topsis_rank, weight_superiority, wsm_rank
from .stable import ALGORITHMS, PreferenceProfileSet, Trace, verify_formulation
from .tables import read_tables, read_user_fixture

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_GUARD = 4
EXIT_VERIFY = 5

_GLOBAL_DEFAULTS = {"seed": None, "out": None, "format": "csv", "trace": False}


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None


def _table_text(rows: List[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _dump(rows: List[dict], columns, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    return _table_text(rows, columns)


class _Output:
    """Write named files under ``--out``, or print everything to stdout."""

    def __init__(self, out: Optional[str]):
        self.dir = Path(out) if out else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str):
        if self.dir is None:
            sys.stdout.write(f"# {name}\n{text}")
        else:
            (self.dir / name).write_text(text, encoding="utf-8", newline="")


# -- gen ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    if not args.out:
        raise ConfigError("gen needs --out DIR")
    config = GenConfig(args.drivers, args.passengers, seed=args.seed or 0, skew=args.skew)
    write_population(config, args.out)
    return EXIT_OK


# -- rank --------------------------------------------------------------------

_RANK_COLUMNS = ("evaluator", "method", "position", "candidate", "score")
_SUPERIORITY_COLUMNS = ("evaluator", "topsis_head", "wsm_head", "topsis_over_wsm", "wsm_over_topsis")


def _rank_inputs(args):
    if bool(args.tables) == bool(args.fixture):
        raise ConfigError("rank needs exactly one of --tables or --fixture")
    if args.fixture:
        return [read_user_fixture(_read(args.fixture))]
    pop = read_tables(args.tables)
    users = [u.id for u in pop.users()]
    if args.user:
        unknown = [u for u in args.user if u not in users]
        if unknown:
            raise InvalidInputError(f"unknown users {unknown}")
        users = args.user
    out = []
    for u in users:
        matrix = pop.judgment_matrix(u)
        out.append((matrix, pop.weights[u].as_array(matrix.criteria)))
    return out


def cmd_rank(args) -> int:
    methods = list(dict.fromkeys(args.method or ["topsis"]))
    out = _Output(args.out)
    rank_rows, sup_rows = [], []
    for matrix, w in _rank_inputs(args):
        results = {}
        if "topsis" in methods:
            results["topsis"], trace = topsis_rank(matrix, w)
            if args.trace:
                out.emit(f"trace_{matrix.evaluator_id}.json",
                         trace.to_json(matrix.candidate_ids, matrix.criteria) + "\n")
        if "wsm" in methods:
            results["wsm"] = wsm_rank(matrix, w)
        for method in methods:
            res = results[method]
            for pos, cand in enumerate(res.preference_list, start=1):
                rank_rows.append({"evaluator": matrix.evaluator_id, "method": method, "position": pos,
                                  "candidate": cand, "score": float(res.scores[cand])})
        if len(results) == 2:
            t_head = results["topsis"].preference_list[0]
            w_head = results["wsm"].preference_list[0]
            sup_rows.append({
                "evaluator": matrix.evaluator_id, "topsis_head": t_head, "wsm_head": w_head,
                "topsis_over_wsm": weight_superiority(matrix.row(t_head), matrix.row(w_head), w),
                "wsm_over_topsis": weight_superiority(matrix.row(w_head), matrix.row(t_head), w),
            })
    ext = args.format
    out.emit(f"rankings.{ext}", _dump(rank_rows, _RANK_COLUMNS, ext))
    if sup_rows:
        out.emit(f"superiority.{ext}", _dump(sup_rows, _SUPERIORITY_COLUMNS, ext))
    return EXIT_OK


# -- match / verify ----------------------------------------------------------

_METRIC_COLUMNS = ("algorithm", "matched_count", "regret_cost", "egalitarian_cost", "egalitarian_norm",
                   "sex_equality_cost", "sex_equality_norm", "objective", "price_of_stability")


def _instance(args):
    """Preference profiles and, when derivable, a value matrix."""
    sources = [bool(args.profiles), bool(args.tables), bool(args.closeness_passengers or args.closeness_drivers)]
    if sum(sources) != 1:
        raise ConfigError("give exactly one of --profiles, --tables, or both --closeness-* files")
    values = None
    if args.profiles:
        profiles = PreferenceProfileSet.from_json(_read(args.profiles))
    elif args.tables:
        profiles, values = derive_matching_instance(read_tables(args.tables))
    else:
        if not (args.closeness_passengers and args.closeness_drivers):
            raise ConfigError("--closeness-passengers and --closeness-drivers go together")
        pc = closeness_from_csv(_read(args.closeness_passengers))
        dc = closeness_from_csv(_read(args.closeness_drivers))
        profiles, values = instance_from_closeness(pc, dc)
    if args.values:
        values = ValueMatrix.from_csv(_read(args.values))
    return profiles, values


def _read_pairs(path):
    """Raw pairs from a matching file, kept as-is so broken matchings can be reported."""
    try:
        doc = json.loads(_read(path))
        return [tuple(p) for p in doc["pairs"]]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"malformed matching JSON: {exc}") from None


def _report_violations(profiles, pairs, out: _Output) -> int:
    report = verify_formulation(profiles, pairs)
    doc = {"ok": report.ok, "violations": {k: [list(v) if isinstance(v, tuple) else v for v in vs]
                                           for k, vs in sorted(report.violations.items())}}
    out.emit("verification.json", json.dumps(doc, indent=2) + "\n")
    if not report.ok:
        for family, items in sorted(report.violations.items()):
            for item in items:
                shown = " ".join(item) if isinstance(item, tuple) else item
                print(f"{family}: {shown}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_match(args) -> int:
    profiles, values = _instance(args)
    out = _Output(args.out)
    if args.verify:
        return _report_violations(profiles, _read_pairs(args.verify), out)
    trace = Trace() if args.trace else None
    matching = ALGORITHMS[args.algorithm](profiles, trace)
    report = verify_formulation(profiles, matching)
    if not report.ok:
        raise VerificationError(f"{args.algorithm} produced an invalid matching: {report.violations}")
    metrics = metric_report(profiles, matching, values)
    row = {"algorithm": args.algorithm, **metrics.to_dict()}
    row = {k: ("" if row[k] is None else row[k]) for k in _METRIC_COLUMNS}
    out.emit("matching.json", matching.to_json() + "\n")
    out.emit(f"metrics.{args.format}", _dump([row], _METRIC_COLUMNS, args.format))
    if values is not None:
        optimum, objective = max_weight_assignment(values)
        out.emit("optimum.json", json.dumps({"objective": objective, **json.loads(optimum.to_json())},
                                            indent=2) + "\n")
    if trace is not None:
        out.emit("trace.json", json.dumps(trace.events, indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    profiles = PreferenceProfileSet.from_json(_read(args.profiles))
    return _report_violations(profiles, _read_pairs(args.matching), _Output(args.out))


# -- bench -------------------------------------------------------------------

def _parse_sizes(text: str):
    sizes = []
    for part in text.split(","):
        part = part.strip()
        if "x" in part:
            a, b = part.split("x")
            sizes.append((int(a), int(b)))
        else:
            sizes.append((int(part), int(part)))
    return sizes


def cmd_bench(args) -> int:
    try:
        doc = json.loads(_read(args.config)) if args.config else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed plan JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("plan config must be a JSON object")
    preset = args.preset or doc.pop("preset", None)
    doc.pop("preset", None)
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        doc["sizes"] = PRESETS[preset]
    overrides = {"sizes": args.sizes and _parse_sizes(args.sizes), "trials": args.trials,
                 "algorithms": args.algorithms and args.algorithms.split(","), "seed": args.seed,
                 "skew": args.skew, "output_dir": args.out}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if args.oracle:
        doc["oracle"] = True
    if args.timing:
        doc["timing"] = True
    try:
        plan = ExperimentPlan(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if not plan.output_dir:
        raise ConfigError("bench needs --out DIR (or output_dir in the plan)")
    rows, timing_rows = run_bench(plan)
    write_bench(plan, rows, timing_rows, plan.output_dir)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _globals(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS,
                   help="format of tabular outputs")
    g.add_argument("--trace", action="store_true", default=argparse.SUPPRESS,
                   help="also write TOPSIS intermediates / proposal events")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ridematch", description=__doc__.splitlines()[0])
    _globals(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded population as six CSV tables")
    _globals(p)
    p.add_argument("--drivers", type=int, required=True)
    p.add_argument("--passengers", type=int, required=True)
    p.add_argument("--skew", choices=("uniform", "clustered"), default="uniform")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("rank", help="rank correspondents with TOPSIS and/or WSM")
    _globals(p)
    p.add_argument("--tables", help="directory holding the six population tables")
    p.add_argument("--fixture", help="single-user ranking fixture (JSON)")
    p.add_argument("--user", action="append", help="only rank for this user (repeatable)")
    p.add_argument("--method", action="append", choices=("topsis", "wsm"),
                   help="ranking method (repeatable; default topsis)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("match", help="run a stable matching algorithm and report metrics")
    _globals(p)
    p.add_argument("--profiles", help="preference-profile JSON")
    p.add_argument("--tables", help="population tables; preferences derived with TOPSIS")
    p.add_argument("--closeness-passengers", help="CSV: passenger rows, driver columns, closeness values")
    p.add_argument("--closeness-drivers", help="CSV: driver rows, passenger columns, closeness values")
    p.add_argument("--values", help="value-matrix CSV (passenger rows, driver columns) for the price of stability")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="sm")
    p.add_argument("--verify", metavar="MATCHING", help="verify this matching instead of computing one")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("verify", help="check a matching for stability and structure")
    _globals(p)
    p.add_argument("--profiles", required=True)
    p.add_argument("--matching", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a seeded size sweep and write plot-data CSVs")
    _globals(p)
    p.add_argument("--config", help="JSON plan file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--sizes", help="comma list of N or DxP, e.g. 5,10,500x100")
    p.add_argument("--trials", type=int)
    p.add_argument("--algorithms", help="comma list from " + ",".join(sorted(ALGORITHMS)))
    p.add_argument("--skew", choices=("uniform", "clustered"))
    p.add_argument("--oracle", action="store_true", help="cross-check against brute force (sides <= 6)")
    p.add_argument("--timing", action="store_true", help="also write timing.csv (not reproducible)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for k, v in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        return args.func(args)
    except UnsupportedInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (InvalidInputError, ConfigError, RideMatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
