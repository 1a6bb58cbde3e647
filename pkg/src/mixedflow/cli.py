"""Command-line driver: ``mixedflow analyze|compare|corpus|oracle``.

Exit codes: 0 success, 1 unproven asserts with ``--fail-on-unproven``,
2 parse or type error (and bad arguments), 3 solver divergence,
4 post-solution or update-rule verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from .frontend import KindError, ParseError, parse
from .oracle import DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES, OracleError, concrete_collect
from .report import (AnalysisConfig, build_report, compare_outcomes, parse_number, render_comparison,
                     render_text, run_analysis, unproven_count)
from .update_rules import RULE_NAMES

EXIT_OK = 0
EXIT_UNPROVEN = 1
EXIT_PARSE = 2
EXIT_DIVERGENCE = 3
EXIT_VERIFY = 4

DEFAULT_CORPUS_CONFIGS = ("baseline", "localized", "reluctant", "reluctant+gc")


def _number(text: str) -> float:
    try:
        return parse_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    d = AnalysisConfig()
    p.add_argument("--rule", choices=RULE_NAMES, default=d.rule, help="global update rule (default: %(default)s)")
    p.add_argument("--gc", action="store_true", help="wrap the rule so dead contributions are collected")
    p.add_argument("--gas", type=_number, default=d.gas, help="widening budget per origin, or inf (default: 3)")
    p.add_argument("--local-gas", type=_number, default=d.local_gas,
                   help="widen/narrow switch budget at local widening points (default: 3)")
    p.add_argument("--solver", choices=("topdown", "worklist"), default=d.solver, help="(default: %(default)s)")
    p.add_argument("--context", choices=("none", "full"), default=d.context,
                   help="procedure contexts: a single one, or abstract entry states (default: %(default)s)")
    p.add_argument("--thresholds", default=d.thresholds, metavar="auto|none|LIST",
                   help="widening thresholds: auto (the program's integer literals and 0), none, "
                        "or a list such as 0,10,100 (default: none)")
    p.add_argument("--max-updates", type=_number, default=d.max_updates,
                   help="cap on updates of any single global (default: 10000)")
    p.add_argument("--max-rhs", type=_number, default=d.max_rhs,
                   help="cap on right-hand-side evaluations (default: 1000000)")
    p.add_argument("--no-requery", dest="requery", action="store_false",
                   help="top-down: do not re-query callers' return points when an entry becomes unreachable")


def _config_from(args) -> AnalysisConfig:
    return AnalysisConfig(rule=args.rule, gc=args.gc, gas=args.gas, solver=args.solver, context=args.context,
                          thresholds=args.thresholds, max_updates=args.max_updates, max_rhs=args.max_rhs,
                          local_gas=args.local_gas, requery=args.requery)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixedflow", description="Thread-modular interval analysis with "
                                 "flow-insensitive globals and selectable global update rules.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze one program (.mc) or built-in system (.synth)")
    a.add_argument("file")
    _add_config_flags(a)
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--out", help="write the report here instead of stdout")
    a.add_argument("--fail-on-unproven", action="store_true", help="exit 1 if any assert is unproven")

    c = sub.add_parser("compare", help="compare the precision of two configurations on one file")
    c.add_argument("file")
    _add_config_flags(c)
    c.add_argument("-a", "--config-a", required=True, metavar="CFG",
                   help="e.g. 'localized' or 'reluctant+gc,gas=5,context=full'; unset keys come from the flags")
    c.add_argument("-b", "--config-b", required=True, metavar="CFG")
    c.add_argument("--compare-scope", choices=("auto", "all", "shared-globals"), default="auto",
                   help="auto compares only shared globals when the context modes differ")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--out")

    k = sub.add_parser("corpus", help="run several configurations over a directory of programs")
    k.add_argument("directory")
    _add_config_flags(k)
    k.add_argument("--configs", nargs="+", default=list(DEFAULT_CORPUS_CONFIGS), metavar="CFG")
    k.add_argument("--baseline", help="config that net improvement is measured against (default: the first)")
    k.add_argument("--compare-scope", choices=("auto", "all", "shared-globals"), default="auto")
    k.add_argument("--format", choices=("text", "json", "csv"), default="text")
    k.add_argument("--jobs", type=int, default=1, help="files analyzed in parallel (default: 1)")
    k.add_argument("--out")

    o = sub.add_parser("oracle", help="enumerate concrete interleavings and print reachable values")
    o.add_argument("file")
    o.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    o.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH)
    o.add_argument("--format", choices=("text", "json"), default="text")
    o.add_argument("--out")
    return ap


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _status(outcome) -> int:
    if not outcome.converged:
        return EXIT_DIVERGENCE
    if outcome.verification_failed:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = run_analysis(args.file, _config_from(args))
    report = build_report(out)
    _emit(_dumps(report) if args.format == "json" else render_text(report), args.out)
    status = _status(out)
    if status == EXIT_OK and args.fail_on_unproven and unproven_count(out):
        return EXIT_UNPROVEN
    return status


def cmd_compare(args) -> int:
    base = _config_from(args)
    ca, cb = AnalysisConfig.parse(args.config_a, base), AnalysisConfig.parse(args.config_b, base)
    oa, ob = run_analysis(args.file, ca), run_analysis(args.file, cb)
    for o in (oa, ob):
        if _status(o) != EXIT_OK:
            sys.stderr.write(f"{o.config.describe()}: {o.result.verdict.render()}\n")
            return _status(o)
    cmp = compare_outcomes(oa, ob, args.compare_scope)
    if args.format == "json":
        payload = cmp.to_json()
        payload["a"], payload["b"] = ca.to_json(), cb.to_json()
        payload["file"] = os.path.basename(args.file)
        _emit(_dumps(payload), args.out)
    else:
        _emit(render_comparison(cmp, ca.describe(), cb.describe()), args.out)
    return EXIT_OK


CORPUS_COLUMNS = ("file", "config", "verdict", "proven", "unproven", "unreachable", "rhs_evaluations",
                  "global_updates", "trash_fraction", "n", "m", "k", "net", "substantial")


def corpus_rows(directory: str, configs: Sequence[AnalysisConfig], baseline: int = 0,
                scope: str = "auto", jobs: int = 1) -> List[dict]:
    """One row per (file, config); precision columns are relative to ``configs[baseline]``."""
    files = sorted(f for f in os.listdir(directory) if f.endswith((".mc", ".synth")))
    tasks = [(os.path.join(directory, name), tuple(configs), baseline, scope) for name in files]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_file = list(pool.map(_file_rows, tasks))
    else:
        per_file = [_file_rows(t) for t in tasks]
    return [row for rows in per_file for row in rows]


def _file_rows(task) -> List[dict]:
    path, configs, baseline, scope = task
    name = os.path.basename(path)
    rows = []
    outcomes = [run_analysis(path, c) for c in configs]
    base = outcomes[baseline]
    for o in outcomes:
        counts = {v: sum(1 for x in o.verdicts if x.verdict == v) for v in ("proven", "unproven", "unreachable")}
        row = {"file": name, "config": o.config.describe(), "verdict": o.result.verdict.render(), **counts,
               "rhs_evaluations": o.result.stats.rhs_evaluations,
               "global_updates": o.result.stats.total_global_updates,
               "trash_fraction": round(o.result.stats.trash_fraction, 4)}
        if o.converged and base.converged:
            cmp = compare_outcomes(o, base, scope)
            row.update(n=cmp.n, m=cmp.m, k=cmp.k, net=round(cmp.net, 4), substantial=cmp.substantial)
        else:
            row.update(n=None, m=None, k=None, net=None, substantial=None)
        rows.append(row)
    return rows


def _render_corpus(rows: List[dict], fmt: str) -> str:
    if fmt == "json":
        return _dumps({"schema": 1, "rows": rows})
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CORPUS_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    cells = [[str("-" if r[c] is None else r[c]) for c in CORPUS_COLUMNS] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(CORPUS_COLUMNS)]
    line = lambda vals: "  ".join(v.ljust(w) for v, w in zip(vals, widths)).rstrip()  # noqa: E731
    return "\n".join([line(CORPUS_COLUMNS)] + [line(c) for c in cells]) + "\n"


def cmd_corpus(args) -> int:
    base = _config_from(args)
    configs = [AnalysisConfig.parse(c, base) for c in args.configs]
    baseline = 0
    if args.baseline:
        wanted = AnalysisConfig.parse(args.baseline, base)
        if wanted not in configs:
            configs.insert(0, wanted)
        baseline = configs.index(wanted)
    rows = corpus_rows(args.directory, configs, baseline, args.compare_scope, max(1, args.jobs))
    _emit(_render_corpus(rows, args.format), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        program = parse(fh.read())
    reach = concrete_collect(program, max_states=args.max_states, max_depth=args.max_depth)
    data = reach.to_json()
    if args.format == "json":
        _emit(_dumps(data), args.out)
        return EXIT_OK
    lines = [f"states explored: {data['states']}{' (budget exhausted)' if data['exhausted'] else ''}"]
    lines += [f"  {g} ∈ {{{', '.join(vs)}}}" for g, vs in data["globals"].items()]
    for site in program.asserts:
        r = data["asserts"].get(str(site.index), {"reached": False, "violations": 0})
        lines.append(f"{site.render()}: {'reached' if r['reached'] else 'not reached'}, "
                     f"{r['violations']} violating states")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "compare": cmd_compare, "corpus": cmd_corpus, "oracle": cmd_oracle}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        if getattr(args, "thresholds", "none") not in ("auto", "none"):
            AnalysisConfig(thresholds=args.thresholds)
        return COMMANDS[args.command](args)
    except (ParseError, KindError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (ValueError, OSError, OracleError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
