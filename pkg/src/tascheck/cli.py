"""Command-line front end.

Subcommands: ``validate`` (parse and type-check a spec file), ``check``
(verify one property and write a counterexample on violation), ``emit``
(write the Promela translation), ``bench`` (seeded random benchmark to
CSV) and ``stats`` (navigation-set and assignment-pool report).

Exit codes: 0 the property holds (or the command succeeded), 1 the
property is violated and a counterexample was written, 2 errors and
resource limits.  The TASCHECK_LOG environment variable sets the log
level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import TEMPLATE_COUNT, BenchConfig, run_bench
from .checker import (
    CheckOptions,
    Holds,
    ResourceLimit,
    Violated,
    check,
    lasso_to_json,
    prepare,
)
from .model import LtlFalse, LtlFo, TasError, validate
from .optimize import naive_assignment_sets
from .promela import emit
from .speclang import ParsedSpec, SpecSyntaxError, parse_spec
from .symbolic import Mode

log = logging.getLogger("tascheck")

EXIT_HOLDS = 0
EXIT_VIOLATED = 1
EXIT_ERROR = 2


def _load(path: str) -> ParsedSpec:
    text = Path(path).read_text(encoding="utf-8")
    parsed = parse_spec(text)
    log.info(
        "parsed %s: %d services, %d properties",
        path,
        len(parsed.spec.services),
        len(parsed.properties),
    )
    return parsed


def _pick_property(parsed: ParsedSpec, name: str | None) -> LtlFo:
    if name is None:
        if not parsed.properties:
            raise TasError("the spec declares no properties")
        if len(parsed.properties) > 1:
            options = ", ".join(p.name for p in parsed.properties)
            raise TasError(f"several properties; pick one with --property ({options})")
        return parsed.properties[0]
    for prop in parsed.properties:
        if prop.name == name:
            return prop
    raise TasError(f"no property named {name}")


def _mode(text: str) -> Mode:
    return Mode.LDT if text == "ldt" else Mode.NAIVE


def cmd_validate(args: argparse.Namespace) -> int:
    parsed = _load(args.file)
    issues = validate(parsed.spec, parsed.properties)
    for issue in issues:
        print(issue)
    if issues:
        return EXIT_ERROR
    print(f"ok: {args.file}")
    return EXIT_HOLDS


def cmd_check(args: argparse.Namespace) -> int:
    parsed = _load(args.file)
    prop = _pick_property(parsed, args.property)
    options = CheckOptions(
        mode=_mode(args.mode),
        asm=args.asm == "on",
        max_states=args.max_states,
        max_seconds=args.max_seconds,
    )
    verdict, stats = check(parsed.spec, prop, options)
    report = {
        "property": prop.name,
        "mode": options.mode.value,
        "asm": args.asm,
        "states": stats.states_visited,
        "transitions": stats.transitions,
        "buchi_states": stats.buchi_states,
        "avg_pool_size": round(stats.avg_pool_size, 3),
        "wall_seconds": round(stats.wall_seconds, 3),
    }
    code = EXIT_ERROR
    match verdict:
        case Holds():
            report["verdict"] = "Holds"
            code = EXIT_HOLDS
        case Violated(lasso=lasso):
            report["verdict"] = "Violated"
            out = args.counterexample or f"{args.file}.cex.json"
            assert lasso is not None
            Path(out).write_text(
                json.dumps(lasso_to_json(lasso), indent=2) + "\n",
                encoding="utf-8",
            )
            report["counterexample"] = out
            code = EXIT_VIOLATED
        case ResourceLimit(kind=kind, states_visited=states):
            report["verdict"] = "ResourceLimit"
            report["limit"] = kind.value
            report["states"] = states
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"verdict: {report['verdict']}")
        for key in (
            "property",
            "mode",
            "asm",
            "states",
            "transitions",
            "buchi_states",
            "avg_pool_size",
            "wall_seconds",
            "counterexample",
            "limit",
        ):
            if key in report:
                print(f"{key}: {report[key]}")
    return code


def cmd_emit(args: argparse.Namespace) -> int:
    parsed = _load(args.file)
    prop = _pick_property(parsed, args.property)
    program = emit(
        parsed.spec, prop, ldt=args.ldt == "on", asm=args.asm == "on"
    )
    out = args.output or str(Path(args.file).with_suffix(".pml"))
    Path(out).write_text(program.text, encoding="utf-8", newline="\n")
    print(f"wrote {out}")
    return EXIT_HOLDS


def cmd_bench(args: argparse.Namespace) -> int:
    templates: tuple[int, ...]
    if args.templates == "all":
        templates = tuple(range(1, TEMPLATE_COUNT + 1))
    else:
        templates = tuple(int(t) for t in args.templates.split(","))
    config = BenchConfig(
        seed=args.seed,
        relations=args.relations,
        variables=args.variables,
        services=args.services,
        fk_depth=args.fk_depth,
        condition_size=args.condition_size,
        templates=templates,
        repetitions=args.reps,
        max_states=args.max_states,
        max_expressions=args.max_exprs,
    )
    if config.variables + config.services > 20:
        print(
            "warning: large configuration; runs may exceed desk-scale limits",
            file=sys.stderr,
        )
    result = run_bench(config, jobs=args.jobs, max_seconds=args.max_seconds)
    if args.output:
        Path(args.output).write_text(result.csv_text, encoding="utf-8")
        print(f"wrote {args.output} ({len(result.rows)} rows)")
        print(result.overhead_report)
    else:
        sys.stdout.write(result.csv_text)
        print(result.overhead_report, file=sys.stderr)
    return EXIT_HOLDS


def cmd_stats(args: argparse.Namespace) -> int:
    parsed = _load(args.file)
    if parsed.properties:
        prop = _pick_property(parsed, args.property)
    else:
        prop = LtlFo("t1", (), LtlFalse())
    print(f"file: {args.file}")
    print(f"property: {prop.name}")
    for mode in (Mode.NAIVE, Mode.LDT):
        _, _, navset, pools = prepare(parsed.spec, prop, mode, asm=True)
        naive = naive_assignment_sets(navset)
        print(f"\nmode {mode.value}:")
        print(
            f"  navigation set: {navset.n_paths} path expressions"
            f" + {navset.n_constants} constants = {len(navset.exprs)}"
        )
        print(f"  average pool size: asm {pools.average_pool_size():.3f},"
              f" naive {naive.average_pool_size():.3f}")
        print("  component  type        members  consts  m   k   values")
        for i, info in enumerate(pools.components):
            print(
                f"  {i:<10} {str(info.vtype):<11} {len(info.member_indices):<8}"
                f" {info.constant_count:<7} {info.ne_incident:<3}"
                f" {info.fresh_count:<3} {info.lo}..{info.hi}"
            )
    return EXIT_HOLDS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tascheck",
        description="Verify first-order LTL properties of tuple artifact systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and type-check a spec file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="verify one property")
    p.add_argument("file")
    p.add_argument("--property", default=None)
    p.add_argument("--mode", choices=("naive", "ldt"), default="ldt")
    p.add_argument("--asm", choices=("on", "off"), default="on")
    p.add_argument("--max-states", type=int, default=5_000_000)
    p.add_argument("--max-seconds", type=float, default=600.0)
    p.add_argument("--counterexample", default=None, metavar="OUT.json")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("emit", help="write the Promela translation")
    p.add_argument("file")
    p.add_argument("--property", default=None)
    p.add_argument("--ldt", choices=("on", "off"), default="off")
    p.add_argument("--asm", choices=("on", "off"), default="off")
    p.add_argument("-o", "--output", default=None, metavar="OUT.pml")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("bench", help="seeded random benchmark, CSV output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--relations", type=int, default=2)
    p.add_argument("--variables", type=int, default=3)
    p.add_argument("--services", type=int, default=3)
    p.add_argument("--fk-depth", type=int, default=2)
    p.add_argument("--condition-size", type=int, default=3)
    p.add_argument("--templates", default="all", metavar="LIST")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--max-states", type=int, default=200_000)
    p.add_argument("--max-seconds", type=float, default=60.0)
    p.add_argument("--max-exprs", type=int, default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("-o", "--output", default=None, metavar="OUT.csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="navigation-set and pool statistics")
    p.add_argument("file")
    p.add_argument("--property", default=None)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("TASCHECK_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecSyntaxError as exc:
        print(f"error[SyntaxError]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error[FileNotFound]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error[IO]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except TasError as exc:
        print(f"error[Invalid]: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
