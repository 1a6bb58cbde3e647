"""Analysis runs, machine-readable reports and precision comparison."""

from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional

from .constraints import GlobalEscaped, GlobalShared, Unknown, sort_key
from .frontend.cfg import render_cond
from .frontend import UNPROVEN, check_asserts, gen_constraints, parse
from .lattice import BOT, equal, leq, render
from .solvers import SolverConfig, solve, verify_post_solution
from .synthetic import register_synthetic_system
from .update_rules import RULE_NAMES, check_rule_soundness, make_rule

SCHEMA_VERSION = 1
SUBSTANTIAL = 0.05

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_number(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "∞"):
        return math.inf
    v = int(t)
    if v < 0:
        raise ValueError(f"expected a non-negative number, got {text!r}")
    return v


def _num_json(v: float):
    return "inf" if v == math.inf else int(v)


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything that determines an analysis run (besides the input file)."""

    rule: str = "reluctant"
    gc: bool = False
    gas: float = 3
    solver: str = "topdown"
    context: str = "none"
    thresholds: str = "none"
    max_updates: float = 10_000
    max_rhs: float = 1_000_000
    local_gas: float = 3
    requery: bool = True

    def __post_init__(self):
        if self.rule not in RULE_NAMES:
            raise ValueError(f"unknown rule {self.rule!r}; known: {', '.join(RULE_NAMES)}")
        if self.solver not in ("worklist", "topdown"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.context not in ("none", "full"):
            raise ValueError(f"unknown context mode {self.context!r}")
        if self.thresholds not in ("auto", "none"):
            canonical = ":".join(str(t) for t in parse_thresholds(self.thresholds))
            object.__setattr__(self, "thresholds", canonical)

    @property
    def label(self) -> str:
        return self.rule + ("+gc" if self.gc else "")

    def describe(self) -> str:
        """A config string that :meth:`parse` maps back to this config."""
        default = AnalysisConfig()
        parts = [self.label]
        for key, attr in _KEYS.items():
            v = getattr(self, attr)
            if v != getattr(default, attr):
                parts.append(f"{key}={_render_opt(v)}")
        return ",".join(parts)

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("gas", "max_updates", "max_rhs", "local_gas"):
            d[k] = _num_json(d[k])
        return d

    @classmethod
    def parse(cls, spec: str, base: Optional["AnalysisConfig"] = None) -> "AnalysisConfig":
        """Parse ``RULE[+gc][,key=value...]`` on top of ``base``."""
        base = base or cls()
        head, *opts = [p.strip() for p in spec.split(",") if p.strip()]
        gc = head.endswith("+gc")
        rule = head[:-3] if gc else head
        changes: Dict[str, object] = {"rule": rule, "gc": gc or base.gc}
        for opt in opts:
            if "=" not in opt:
                if opt == "gc":
                    changes["gc"] = True
                    continue
                raise ValueError(f"expected key=value in config, got {opt!r}")
            key, value = (s.strip() for s in opt.split("=", 1))
            attr = _KEYS.get(key)
            if attr is None:
                raise ValueError(f"unknown config key {key!r}; known: {', '.join(_KEYS)}")
            changes[attr] = _coerce(attr, value)
        return replace(base, **changes)


_KEYS = {
    "gas": "gas", "solver": "solver", "context": "context", "thresholds": "thresholds",
    "max-updates": "max_updates", "max-rhs": "max_rhs", "local-gas": "local_gas", "requery": "requery",
}


def _coerce(attr: str, value: str):
    if attr in ("gas", "max_updates", "max_rhs", "local_gas"):
        return parse_number(value)
    if attr == "requery":
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"requery expects a boolean, got {value!r}")
        return value.lower() in ("true", "1", "yes")
    return value


def _render_opt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) and v == math.inf:
        return "inf"
    return str(int(v)) if isinstance(v, (int, float)) else str(v)


def parse_thresholds(spec: str) -> List[int]:
    try:
        return sorted({int(t) for t in spec.replace(",", ":").split(":") if t.strip()})
    except ValueError:
        raise ValueError(f"thresholds must be auto, none or an integer list like 0,10,100, got {spec!r}") from None


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


@dataclass
class Outcome:
    file: str
    config: AnalysisConfig
    system: object
    result: object
    verdicts: list = field(default_factory=list)
    post: object = None
    rule_check: object = None
    wall_time: float = 0.0

    @property
    def converged(self) -> bool:
        return self.result.converged

    @property
    def verification_failed(self) -> bool:
        return self.converged and not (self.post.ok and self.rule_check.ok)


def load_system(path: str, config: AnalysisConfig):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".synth"):
        return register_synthetic_system(text.strip()), None
    program = parse(text)
    return gen_constraints(program, config.context, name=os.path.basename(path)), program


def resolve_thresholds(config: AnalysisConfig, program) -> Optional[List[int]]:
    if config.thresholds == "none":
        return None
    if config.thresholds == "auto":
        return program.default_thresholds() if program is not None else None
    return parse_thresholds(config.thresholds)


def run_analysis(path: str, config: AnalysisConfig) -> Outcome:
    """Solve ``path`` under ``config`` and run every post-hoc check."""
    system, program = load_system(path, config)
    thresholds = resolve_thresholds(config, program)
    rule = make_rule(config.rule, gas=config.gas, gc=config.gc, thresholds=thresholds)
    sc = SolverConfig(solver=config.solver, rule=rule, local_gas=config.local_gas,
                      max_updates_per_global=config.max_updates, max_rhs_evaluations=config.max_rhs,
                      requery=config.requery, thresholds=thresholds)
    start = time.perf_counter()
    result = solve(system, sc)
    wall = time.perf_counter() - start
    out = Outcome(path, config, system, result, wall_time=wall)
    if result.converged:
        out.post = verify_post_solution(system, result)
        out.rule_check = check_rule_soundness(result.trace)
        if program is not None:
            out.verdicts = check_asserts(system, result)
    return out


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _name(x) -> str:
    return x.render() if hasattr(x, "render") else str(x)


def _origin_key(key) -> str:
    g, orig = key
    return f"{_name(g)} @ {_name(orig)}"


def build_report(out: Outcome) -> dict:
    r = out.result
    st = r.stats
    values = {}
    for u in sorted(set(r.sigma) | set(r.rho), key=sort_key):
        v = (r.rho if u.is_global else r.sigma)[u]
        values[u.render()] = render(v)
    report = {
        "schema": SCHEMA_VERSION,
        "file": os.path.basename(out.file),
        "config": out.config.to_json(),
        "verdict": r.verdict.render(),
        "values": values,
        "asserts": [
            {"line": v.site.line, "node": v.site.node, "proc": v.site.proc,
             "condition": render_cond(v.site.cond, True), "verdict": v.verdict}
            for v in out.verdicts
        ],
        "checks": {
            "post_solution": str(out.post) if out.post is not None else None,
            "update_rule": str(out.rule_check) if out.rule_check is not None else None,
        },
        "stats": {
            "rhs_evaluations": st.rhs_evaluations,
            "total_global_updates": st.total_global_updates,
            "global_updates": {g.render(): n for g, n in sorted(st.global_updates.items(), key=lambda kv: sort_key(kv[0]))},
            "wn_switches": {_origin_key(k): n for k, n in sorted(st.wn_switches.items(), key=lambda kv: _origin_key(kv[0])) if n},
            "widenings": {_origin_key(k): n for k, n in sorted(st.widenings.items(), key=lambda kv: _origin_key(kv[0])) if n},
            "local_wn_switches": sum(st.local_wn_switches.values()),
            "trash_entries": st.trash_entries,
            "intermittent_trash": st.intermittent_trash,
            "entries_ever_live": st.entries_ever_live,
            "trash_fraction": round(st.trash_fraction, 6),
            "trash": sorted(g.render() for g in st.trash),
            "wall_time_s": round(out.wall_time, 6),
        },
    }
    return report


def strip_wall_time(report: dict) -> dict:
    """Copy of ``report`` without the non-deterministic timing field."""
    out = dict(report)
    out["stats"] = {k: v for k, v in report["stats"].items() if k != "wall_time_s"}
    return out


def render_text(report: dict) -> str:
    lines = [f"{report['file']}  [{report['config']['rule']}{'+gc' if report['config']['gc'] else ''}, "
             f"gas={report['config']['gas']}, solver={report['config']['solver']}, context={report['config']['context']}]",
             f"verdict: {report['verdict']}"]
    globs = {k: v for k, v in report["values"].items() if not k.startswith("(") and k != "_main"}
    if globs:
        lines.append("globals:")
        lines += [f"  {k} = {v}" for k, v in globs.items()]
    entries = {k: v for k, v in report["values"].items() if k.startswith("(st_")}
    if entries:
        lines.append("procedure entries:")
        lines += [f"  {k} = {v}" for k, v in entries.items()]
    if report["asserts"]:
        lines.append("asserts:")
        lines += [f"  line {a['line']}: assert({a['condition']}) {a['verdict']}" for a in report["asserts"]]
    st = report["stats"]
    lines.append(f"stats: {st['rhs_evaluations']} evaluations, {st['total_global_updates']} global updates, "
                 f"{sum(st['wn_switches'].values())} W/N switches, trash {st['trash_entries']}"
                 f"/{st['entries_ever_live']} entries, intermittent {st['intermittent_trash']}")
    if st["trash"]:
        lines.append("trash: " + ", ".join(st["trash"]))
    checks = report["checks"]
    if checks["post_solution"] is not None:
        lines.append(f"post-solution: {checks['post_solution']}; update rule: {checks['update_rule']}")
    return "\n".join(lines) + "\n"


def unproven_count(out: Outcome) -> int:
    return sum(1 for v in out.verdicts if v.verdict == UNPROVEN)


# ---------------------------------------------------------------------------
# Precision comparison
# ---------------------------------------------------------------------------

MORE_PRECISE = "MorePrecise"
LESS_PRECISE = "LessPrecise"
EQUAL = "Equal"
INCOMPARABLE = "Incomparable"


def classify(a, b) -> str:
    """Class of ``a`` relative to ``b``; missing values are passed as ``BOT``."""
    if equal(a, b):
        return EQUAL
    if leq(a, b):
        return MORE_PRECISE
    if leq(b, a):
        return LESS_PRECISE
    return INCOMPARABLE


def net_improvement(n: int, m: int, k: int) -> float:
    total = n + m + k
    return 0.0 if total == 0 else (n - m) / total


def is_substantial(n: int, m: int, population: int) -> bool:
    return population > 0 and max(n, m) / population >= SUBSTANTIAL


@dataclass
class PrecisionComparison:
    rows: List[tuple]
    n: int
    m: int
    k: int
    equal: int
    scope: str

    @property
    def population(self) -> int:
        return len(self.rows)

    @property
    def net(self) -> float:
        return net_improvement(self.n, self.m, self.k)

    @property
    def substantial(self) -> bool:
        return is_substantial(self.n, self.m, self.population)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION, "scope": self.scope, "n": self.n, "m": self.m, "k": self.k,
            "equal": self.equal, "population": self.population, "net": round(self.net, 6),
            "substantial": self.substantial,
            "unknowns": [{"unknown": u, "a": a, "b": b, "class": c} for u, a, b, c in self.rows],
        }


def in_scope(u: Unknown, scope: str) -> bool:
    if scope == "shared-globals":
        return isinstance(u, (GlobalShared, GlobalEscaped))
    return True


def compare_assignments(a: Mapping[Unknown, object], b: Mapping[Unknown, object],
                        population: Iterable[Unknown], scope: str = "all") -> PrecisionComparison:
    """Classify every unknown of ``population`` (in scope) by ``a`` against ``b``."""
    rows = []
    counts = {MORE_PRECISE: 0, LESS_PRECISE: 0, INCOMPARABLE: 0, EQUAL: 0}
    for u in sorted({u for u in population if in_scope(u, scope)}, key=sort_key):
        va, vb = a.get(u, BOT), b.get(u, BOT)
        c = classify(va, vb)
        counts[c] += 1
        rows.append((u.render(), render(va), render(vb), c))
    return PrecisionComparison(rows, counts[MORE_PRECISE], counts[LESS_PRECISE], counts[INCOMPARABLE],
                               counts[EQUAL], scope)


def compare_outcomes(a: Outcome, b: Outcome, scope: str = "auto") -> PrecisionComparison:
    if scope == "auto":
        scope = "shared-globals" if a.config.context != b.config.context else "all"
    va = {**a.result.sigma, **a.result.rho}
    vb = {**b.result.sigma, **b.result.rho}
    return compare_assignments(va, vb, set(a.result.reached) | set(b.result.reached), scope)


def render_comparison(cmp: PrecisionComparison, label_a: str, label_b: str) -> str:
    lines = [f"A = {label_a}", f"B = {label_b}", f"scope: {cmp.scope}"]
    for u, a, b, c in cmp.rows:
        if c != EQUAL:
            lines.append(f"  {u}: {a} vs {b}  {c}")
    lines.append(f"n={cmp.n} m={cmp.m} k={cmp.k} equal={cmp.equal} population={cmp.population} "
                 f"net={cmp.net:.4f} substantial={'yes' if cmp.substantial else 'no'}")
    return "\n".join(lines) + "\n"


__all__ = [
    "AnalysisConfig", "Outcome", "run_analysis", "build_report", "render_text", "strip_wall_time",
    "PrecisionComparison", "compare_assignments", "compare_outcomes", "classify", "net_improvement",
    "is_substantial", "render_comparison", "SCHEMA_VERSION", "parse_number", "load_system",
    "MORE_PRECISE", "LESS_PRECISE", "EQUAL", "INCOMPARABLE",
]
