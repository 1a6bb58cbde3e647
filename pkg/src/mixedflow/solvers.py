"""Hosting solvers for side-effecting constraint systems.

Both solvers delegate every change of a global to the configured update rule
and apply its result verbatim (``rho' = rho ⊕ updates``).

* :func:`solve_worklist` propagates forward: whenever an unknown changes, its
  readers are queued. The unknown just evaluated is re-evaluated first while
  it is itself affected by its own effects. Decreases at local widening points
  are held back until the queue drains, so narrowing never acts on values of
  an ascending wave that is still in flight.
* :func:`solve_topdown` is demand driven: querying a local evaluates it,
  recursively querying what it reads; changes only mark readers unstable.
  When a procedure entry drops to ⊥ the return point of that context is
  queried eagerly so that ⊥ propagates through the dead context.
"""

from __future__ import annotations

import math
import sys
import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .constraints import ConstraintSystem, GlobalProcEntry, Unknown, assignment_lookup, evaluate, sort_key
from .lattice import BOT, equal, leq, narrow, widen
from .update_rules import NARROW, WIDEN, CMapEntry, TraceEntry, UpdateRule, make_rule

INF = math.inf


@dataclass
class SolverConfig:
    solver: str = "worklist"
    rule: Optional[UpdateRule] = None
    local_gas: float = 3
    max_updates_per_global: float = 10_000
    max_rhs_evaluations: float = 1_000_000
    requery: bool = True
    thresholds: Optional[Sequence[int]] = None
    record_trace: bool = True

    def __post_init__(self):
        if self.solver not in ("worklist", "topdown"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.rule is None:
            self.rule = make_rule("reluctant", gas=3, thresholds=self.thresholds)


@dataclass(frozen=True)
class Converged:
    def render(self) -> str:
        return "Converged"


CONVERGED = Converged()


@dataclass(frozen=True)
class Divergence:
    cap: str
    unknown: Optional[Unknown] = None

    def render(self) -> str:
        where = f" at {self.unknown.render()}" if self.unknown is not None else ""
        return f"Divergence({self.cap}{where})"


@dataclass
class SolverStats:
    rhs_evaluations: int = 0
    global_updates: Dict[Unknown, int] = field(default_factory=lambda: defaultdict(int))
    wn_switches: Dict = field(default_factory=dict)
    widenings: Dict = field(default_factory=dict)
    local_wn_switches: Dict[Unknown, int] = field(default_factory=lambda: defaultdict(int))
    trash: List[Unknown] = field(default_factory=list)
    intermittent: List[Unknown] = field(default_factory=list)
    entries_ever_live: int = 0

    @property
    def trash_entries(self) -> int:
        return len(self.trash)

    @property
    def intermittent_trash(self) -> int:
        return len(self.intermittent)

    @property
    def total_global_updates(self) -> int:
        return sum(self.global_updates.values())

    @property
    def trash_fraction(self) -> float:
        return self.trash_entries / self.entries_ever_live if self.entries_ever_live else 0.0


@dataclass
class SolveResult:
    sigma: Dict[Unknown, object]
    rho: Dict[Unknown, object]
    reached: set
    stats: SolverStats
    verdict: object
    trace: List[TraceEntry]
    rule: UpdateRule
    checkable: set
    system: ConstraintSystem
    #: rho after each evaluation of a local, for the globals it read or changed (when tracing)
    eval_log: List = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return isinstance(self.verdict, Converged)


class _CapTripped(Exception):
    def __init__(self, divergence: Divergence):
        super().__init__(divergence.render())
        self.divergence = divergence


class _Engine:
    def __init__(self, system: ConstraintSystem, config: SolverConfig):
        self.system = system
        self.config = config
        self.rule = config.rule
        if getattr(self.rule, "_engine", None) is not None:
            raise ValueError("update rule instance already used by another solver run; "
                             "rules keep per-run state, so build a fresh one with make_rule()")
        self.rule._engine = self
        self.sigma: Dict[Unknown, object] = {}
        self.rho: Dict[Unknown, object] = {}
        self.stats = SolverStats()
        self.trace: List[TraceEntry] = []
        self.eval_log: List = []
        self.reached: Dict[Unknown, None] = {}
        self.evaluated: Dict[Unknown, None] = {}
        self.infl: Dict[Unknown, Dict[Unknown, None]] = defaultdict(dict)
        self.deps: Dict[Unknown, tuple] = {}
        self._lmeta: Dict[Unknown, CMapEntry] = {}
        self._entry_live: Dict[Unknown, None] = {}
        self._entry_dropped: Dict[Unknown, None] = {}

    # -- bookkeeping -------------------------------------------------------

    def _reach(self, u: Unknown) -> None:
        if u not in self.reached:
            self.reached[u] = None

    def _count_eval(self, x: Unknown) -> None:
        self.stats.rhs_evaluations += 1
        if self.stats.rhs_evaluations > self.config.max_rhs_evaluations:
            raise _CapTripped(Divergence("rhs evaluations", x))

    def lookup(self, u: Unknown):
        return (self.rho if u.is_global else self.sigma).get(u, BOT)

    # -- globals -----------------------------------------------------------

    def apply(self, x: Unknown, contribs: Dict) -> List[tuple]:
        """Run the update rule for ``contribs`` of origin ``x``; return ``(g, old, new)`` changes."""
        for g in contribs:
            self._reach(g)
        rho_before = None
        if self.config.record_trace:
            rho_before = {g: self.rho.get(g, BOT) for g in contribs}
        updates = self.rule.update_globals(x, contribs, self.rho)
        if self.config.record_trace:
            for g in updates:
                if g not in rho_before:
                    rho_before[g] = self.rho.get(g, BOT)
            self.trace.append(TraceEntry(x, dict(contribs), rho_before, dict(updates)))
        changed = []
        for g, d in updates.items():
            self._reach(g)
            old = self.rho.get(g, BOT)
            if d is BOT:
                self.rho.pop(g, None)
            else:
                self.rho[g] = d
            n = self.stats.global_updates[g] = self.stats.global_updates[g] + 1
            if isinstance(g, GlobalProcEntry):
                if d is BOT and old is not BOT:
                    self._entry_dropped[g] = None
                elif d is not BOT:
                    self._entry_live[g] = None
            if not equal(old, d):
                changed.append((g, old, d))
            if n > self.config.max_updates_per_global:
                raise _CapTripped(Divergence("update cap", g))
        return changed

    # -- locals ------------------------------------------------------------

    def combine(self, x: Unknown, old, new):
        """Gas-bounded warrowing at widening points; plain replacement elsewhere."""
        if not self.system.is_widening_point(x):
            return new
        if equal(old, new):
            return old
        meta = self._lmeta.setdefault(x, CMapEntry())
        if not leq(new, old):
            meta.phase = WIDEN
            return widen(old, new, self.config.thresholds)
        if meta.phase == NARROW:
            return narrow(old, new)
        if meta.gas >= self.config.local_gas:
            return old
        meta.phase, meta.gas = NARROW, meta.gas + 1
        self.stats.local_wn_switches[x] += 1
        return narrow(old, new)

    def set_local(self, x: Unknown, value) -> bool:
        old = self.sigma.get(x, BOT)
        if equal(old, value):
            return False
        if value is BOT:
            self.sigma.pop(x, None)
        else:
            self.sigma[x] = value
        return True

    def log_eval(self, x: Unknown, deps: Sequence[Unknown], changed: Sequence[tuple]) -> None:
        if self.config.record_trace:
            gs = {u: self.rho.get(u, BOT) for u in deps if u.is_global}
            for g, _, new in changed:
                gs[g] = new
            self.eval_log.append((x, gs))

    # -- result ------------------------------------------------------------

    def result(self, verdict, checkable: Iterable[Unknown]) -> SolveResult:
        st = self.stats
        st.wn_switches = dict(self.rule.wn_switches)
        st.widenings = dict(self.rule.widenings)
        st.global_updates = dict(st.global_updates)
        st.local_wn_switches = dict(st.local_wn_switches)
        st.trash = [g for g in self._entry_live if g not in self.rho]
        st.intermittent = [g for g in self._entry_dropped if g in self.rho]
        st.entries_ever_live = len(self._entry_live)
        return SolveResult(
            sigma=dict(self.sigma), rho=dict(self.rho), reached=set(self.reached), stats=st,
            verdict=verdict, trace=self.trace, rule=self.rule, checkable=set(checkable),
            system=self.system, eval_log=self.eval_log,
        )


# ---------------------------------------------------------------------------
# Forward-propagating worklist solver
# ---------------------------------------------------------------------------


def solve_worklist(system: ConstraintSystem, interest: Optional[Sequence[Unknown]] = None,
                   config: Optional[SolverConfig] = None) -> SolveResult:
    config = config or SolverConfig()
    eng = _Engine(system, config)
    interest = tuple(interest) if interest is not None else tuple(system.interest())
    queue: deque = deque()
    queued: Dict[Unknown, None] = {}
    known: Dict[Unknown, None] = {}
    deferred: Dict[Unknown, None] = {}

    def push(y: Unknown) -> None:
        if y not in queued:
            queued[y] = None
            queue.append(y)

    def step(x: Unknown, descend: bool) -> List[Unknown]:
        eng._count_eval(x)
        eng._reach(x)
        eng.evaluated[x] = None
        value, contribs, deps = evaluate(system, x, eng.lookup)
        old_deps = eng.deps.get(x, ())
        for u in old_deps:
            if u not in deps:
                eng.infl[u].pop(x, None)
        eng.deps[x] = deps
        affected: Dict[Unknown, None] = {}
        for u in deps:
            eng._reach(u)
            eng.infl[u][x] = None
            if u.is_local and u not in known:
                known[u] = None
                affected[u] = None
        changed = eng.apply(x, contribs)
        for g, _, _ in changed:
            for y in eng.infl.get(g, ()):
                affected[y] = None
        old = eng.sigma.get(x, BOT)
        if not descend and system.is_widening_point(x) and leq(value, old) and not equal(value, old):
            # Decreases wait until the ascending wave has settled.
            new = old
            deferred[x] = None
        else:
            new = eng.combine(x, old, value)
        if eng.set_local(x, new):
            for y in eng.infl.get(x, ()):
                affected[y] = None
            # A widened or narrowed value is not yet a solution for x itself;
            # revisit x once the current propagation wave has settled.
            if not equal(new, value) and x not in deferred:
                deferred[x] = None
        eng.log_eval(x, deps, changed)
        return list(affected)

    for x in interest:
        known[x] = None
        push(x)
    try:
        batch: Dict[Unknown, None] = {}
        while queue or deferred:
            if not queue:
                for y in deferred:
                    push(y)
                batch = dict(deferred)
                deferred.clear()
                continue
            x = queue.popleft()
            del queued[x]
            descend = batch.pop(x, 0) is None
            while True:
                affected = step(x, descend)
                for y in affected:
                    if y != x:
                        push(y)
                if x not in affected:
                    break
        verdict = CONVERGED
    except _CapTripped as e:
        verdict = e.divergence
    return eng.result(verdict, eng.evaluated if verdict is CONVERGED else ())


# ---------------------------------------------------------------------------
# Demand-driven top-down solver
# ---------------------------------------------------------------------------


class _TopDown(_Engine):
    def __init__(self, system, config):
        super().__init__(system, config)
        self.called: Dict[Unknown, None] = {}
        self.stable: Dict[Unknown, None] = {}

    def destabilize(self, u: Unknown) -> None:
        work = [u]
        while work:
            v = work.pop()
            readers = self.infl.pop(v, None)
            if not readers:
                continue
            for y in readers:
                self.stable.pop(y, None)
                work.append(y)

    def query(self, reader: Unknown, u: Unknown):
        self._reach(u)
        if u.is_local:
            self.solve(u)
        self.infl[u][reader] = None
        return self.lookup(u)

    def solve(self, x: Unknown) -> None:
        if x in self.called or x in self.stable:
            return
        self.called[x] = None
        self._reach(x)
        while True:
            self.stable[x] = None
            self._count_eval(x)
            self.evaluated[x] = None
            value, contribs, deps = evaluate(self.system, x, lambda u: self.query(x, u))
            self.deps[x] = deps
            changed = self.apply(x, contribs)
            for g, _, _ in changed:
                self.destabilize(g)
            if self.config.requery:
                for g, old, new in changed:
                    if new is BOT and isinstance(g, GlobalProcEntry):
                        ret = self.system.return_unknown(g) if hasattr(self.system, "return_unknown") else None
                        if ret is not None:
                            self.solve(ret)
            new = self.combine(x, self.sigma.get(x, BOT), value)
            if self.set_local(x, new):
                self.destabilize(x)
                if self.system.is_widening_point(x):
                    # Readers of x may not be registered yet (x was queried from inside
                    # their evaluation), so re-evaluate x itself to allow narrowing.
                    self.stable.pop(x, None)
            self.log_eval(x, deps, changed)
            if x in self.stable:
                break
        del self.called[x]


def solve_topdown(system: ConstraintSystem, interest: Optional[Sequence[Unknown]] = None,
                  config: Optional[SolverConfig] = None) -> SolveResult:
    config = config or SolverConfig(solver="topdown")
    eng = _TopDown(system, config)
    interest = tuple(interest) if interest is not None else tuple(system.interest())
    box = {}

    def run():
        try:
            while True:
                for x in interest:
                    eng.solve(x)
                if all(x in eng.stable for x in interest):
                    break
            box["verdict"] = CONVERGED
        except _CapTripped as e:
            box["verdict"] = e.divergence
        except BaseException as e:  # re-raised in the caller's thread
            box["error"] = e

    _run_with_deep_stack(run)
    if "error" in box:
        raise box["error"]
    verdict = box["verdict"]
    checkable = [x for x in eng.evaluated if x in eng.stable] if verdict is CONVERGED else ()
    return eng.result(verdict, checkable)


def _run_with_deep_stack(fn) -> None:
    """The recursive solver can nest deeply; run it on a thread with a large stack."""
    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    try:
        threading.stack_size(512 * 1024 * 1024)
        sys.setrecursionlimit(max(old_limit, 200_000))
        t = threading.Thread(target=fn)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)


def solve(system: ConstraintSystem, config: SolverConfig, interest=None) -> SolveResult:
    if config.solver == "topdown":
        return solve_topdown(system, interest, config)
    return solve_worklist(system, interest, config)


# ---------------------------------------------------------------------------
# Checks on a finished run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PostViolation:
    unknown: Unknown
    detail: str
    ok = False

    def __str__(self) -> str:
        return f"post-solution violated at {self.unknown.render()}: {self.detail}"


@dataclass(frozen=True)
class PostPass:
    ok = True

    def __str__(self) -> str:
        return "Pass"


POST_PASS = PostPass()


def verify_post_solution(system: ConstraintSystem, result: SolveResult):
    """Re-evaluate every reached, finally stable local against the final assignment."""
    lookup = assignment_lookup(result.sigma, result.rho)
    for x in sorted(result.checkable, key=sort_key):
        value, contribs, _ = evaluate(system, x, lookup)
        have = result.sigma.get(x, BOT)
        if not leq(value, have):
            return PostViolation(x, f"value {_r(value)} not below {_r(have)}")
        for g, d in contribs.items():
            if not leq(d, result.rho.get(g, BOT)):
                return PostViolation(g, f"contribution {_r(d)} of {x.render()} not below {_r(result.rho.get(g, BOT))}")
    return POST_PASS


def gc_consistency(result: SolveResult) -> List[Unknown]:
    """Globals whose final value differs from the join of the rule's live per-origin entries."""
    bad = []
    for g, v in result.rho.items():
        live = result.rule.live_join(g)
        if live is not None and not equal(live, v):
            bad.append(g)
    return bad


def _r(v) -> str:
    return v.render() if hasattr(v, "render") else repr(v)


__all__ = [
    "SolverConfig", "SolveResult", "SolverStats", "Converged", "CONVERGED", "Divergence",
    "solve_worklist", "solve_topdown", "solve", "verify_post_solution", "gc_consistency",
    "PostViolation", "POST_PASS",
]
