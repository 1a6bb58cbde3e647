"""Concrete collecting semantics used as an independent soundness oracle.

All interleavings of the thread entries are explored breadth-first, one CFG
edge per scheduling step, so every read or write of a shared global is atomic.
Integer arithmetic saturates at the same 64-bit bounds as the interval domain.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, Set

from ._backend import kernels as _k
from .constraints import GlobalShared
from .frontend import parser as P
from .frontend.asserts import PROVEN, UNREACHABLE, check_asserts, node_states
from .frontend.transfer import top_of
from .frontend.cfg import (AddrGlobal, AddrLocal, AssertL, AssignL, CallL, DerefR, GuardL, GVar, LVar, Program,
                           Skip)
from .lattice import BOT, join, render_bound

DEFAULT_MAX_STATES = 2_000_000
DEFAULT_MAX_DEPTH = 10_000


class OracleError(RuntimeError):
    """The program did something the concrete semantics rejects (e.g. an uninitialized read)."""


class _Dangling(Exception):
    """Dereference of a pointer to a local whose frame is gone; the path is dropped."""


@dataclass(frozen=True)
class LocalLoc:
    """Address of a local in a live frame: ``(thread, depth)`` identifies the frame."""

    thread: int
    depth: int
    proc: str
    var: str

    @property
    def name(self) -> str:
        return f"{self.proc}.{self.var}"


def render_concrete(v) -> str:
    if isinstance(v, LocalLoc):
        return v.name
    if isinstance(v, str):
        return v
    return render_bound(v)


def _observable(v):
    return v.name if isinstance(v, LocalLoc) else v


@dataclass
class ReachSets:
    globals: Dict[str, Set] = field(default_factory=lambda: defaultdict(set))
    locals: Dict[int, Dict[str, Set]] = field(default_factory=lambda: defaultdict(lambda: defaultdict(set)))
    nodes: Set[int] = field(default_factory=set)
    assert_reached: Set[int] = field(default_factory=set)
    assert_violations: Dict[int, int] = field(default_factory=dict)
    states: int = 0
    max_depth_seen: int = 0
    dangling_paths: int = 0
    exhausted: bool = False

    def to_json(self) -> dict:
        def vals(s):
            return sorted((render_concrete(v) for v in s), key=_sort_render)

        return {
            "exhausted": self.exhausted,
            "states": self.states,
            "max_depth": self.max_depth_seen,
            "dangling_paths": self.dangling_paths,
            "globals": {g: vals(s) for g, s in sorted(self.globals.items())},
            "locals": {str(n): {v: vals(s) for v, s in sorted(m.items())} for n, m in sorted(self.locals.items())},
            "asserts": {
                str(i): {"reached": i in self.assert_reached, "violations": self.assert_violations.get(i, 0)}
                for i in sorted(self.assert_reached | set(self.assert_violations))
            },
        }


def _sort_render(s: str):
    try:
        return (0, int(s), "")
    except ValueError:
        return (1, 0, s)


class _Machine:
    def __init__(self, program: Program):
        self.program = program
        self.gindex = {g.name: i for i, g in enumerate(program.globals)}
        self.lindex = {name: {v: i for i, v in enumerate(cfg.local_names)} for name, cfg in program.procs.items()}

    def initial(self):
        gvals = tuple(_k.clamp(g.init) if g.kind == "int" else g.init for g in self.program.globals)
        threads = []
        for t in self.program.thread_entries:
            cfg = self.program.procs[t]
            threads.append(((t, cfg.st, (None,) * len(cfg.local_names)),))
        return gvals, tuple(threads)

    # -- expressions -------------------------------------------------------

    def read_var(self, v, proc: str, locs, gvals):
        if isinstance(v, LVar):
            x = locs[self.lindex[proc][v.name]]
            if x is None:
                raise OracleError(f"read of uninitialized local {proc}.{v.name}")
            return x
        return gvals[self.gindex[v.name]]

    def deref(self, loc, threads, gvals):
        if isinstance(loc, str):
            return gvals[self.gindex[loc]]
        stack = threads[loc.thread]
        if loc.depth >= len(stack) or stack[loc.depth][0] != loc.proc:
            raise _Dangling()
        x = stack[loc.depth][2][self.lindex[loc.proc][loc.var]]
        if x is None:
            raise OracleError(f"read of uninitialized local {loc.name}")
        return x

    def int_expr(self, e, proc, locs, gvals, threads):
        if isinstance(e, P.Num):
            return _k.clamp(e.value)
        if isinstance(e, (LVar, GVar)):
            return self.read_var(e, proc, locs, gvals)
        if isinstance(e, DerefR):
            return self.deref(self.read_var(e.ptr, proc, locs, gvals), threads, gvals)
        if isinstance(e, P.Neg):
            return _k.neg_bound(self.int_expr(e.operand, proc, locs, gvals, threads))
        if isinstance(e, P.Bin):
            a = self.int_expr(e.left, proc, locs, gvals, threads)
            b = self.int_expr(e.right, proc, locs, gvals, threads)
            if e.op == "+":
                return _k.c_add(a, b)
            if e.op == "-":
                return _k.c_sub(a, b)
            return _k.c_mul(a, b)
        raise TypeError(e)

    def value(self, kind, e, proc, locs, gvals, threads, tid, depth):
        if kind == "ptr":
            if isinstance(e, AddrGlobal):
                return e.name
            if isinstance(e, AddrLocal):
                return LocalLoc(tid, depth, proc, e.name)
            return self.read_var(e, proc, locs, gvals)
        return self.int_expr(e, proc, locs, gvals, threads)

    def holds(self, c: P.Cmp, proc, locs, gvals, threads) -> bool:
        a = self.int_expr(c.left, proc, locs, gvals, threads)
        b = self.int_expr(c.right, proc, locs, gvals, threads)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b}[c.op]

    # -- steps -------------------------------------------------------------

    def successors(self, state, reach: ReachSets):
        gvals, threads = state
        out = []
        for tid, stack in enumerate(threads):
            if not stack:
                continue
            proc, node, locs = stack[-1]
            cfg = self.program.procs[proc]
            depth = len(stack) - 1
            if node == cfg.ret:
                out.append((gvals, threads[:tid] + (stack[:-1],) + threads[tid + 1:]))
                continue
            for e in cfg.out_edges[node]:
                try:
                    nxt = self.edge(e, tid, depth, proc, locs, gvals, threads, stack, reach)
                except _Dangling:
                    reach.dangling_paths += 1
                    continue
                if nxt is not None:
                    out.append(nxt)
        return out

    def edge(self, e, tid, depth, proc, locs, gvals, threads, stack, reach):
        lbl = e.label

        def moved(new_locs=locs, new_g=gvals, extra=()):
            new_stack = stack[:-1] + ((proc, e.dst, new_locs),) + extra
            return new_g, threads[:tid] + (new_stack,) + threads[tid + 1:]

        if isinstance(lbl, Skip):
            return moved()
        if isinstance(lbl, AssertL):
            reach.assert_reached.add(lbl.site)
            if not self.holds(lbl.cond, proc, locs, gvals, threads):
                reach.assert_violations[lbl.site] = reach.assert_violations.get(lbl.site, 0) + 1
            return moved()
        if isinstance(lbl, GuardL):
            if self.holds(lbl.cond, proc, locs, gvals, threads) != lbl.polarity:
                return None
            return moved()
        if isinstance(lbl, AssignL):
            tgt = lbl.target
            v = self.value(tgt.kind, lbl.rhs, proc, locs, gvals, threads, tid, depth)
            if isinstance(tgt, GVar):
                i = self.gindex[tgt.name]
                return moved(new_g=gvals[:i] + (v,) + gvals[i + 1:])
            i = self.lindex[proc][tgt.name]
            return moved(new_locs=locs[:i] + (v,) + locs[i + 1:])
        if isinstance(lbl, CallL):
            callee = self.program.procs[lbl.proc]
            vals = [self.value(kind, a, proc, locs, gvals, threads, tid, depth)
                    for (_, kind), a in zip(callee.params, lbl.args)]
            new_locs = [None] * len(callee.local_names)
            for (name, _), v in zip(callee.params, vals):
                new_locs[self.lindex[callee.name][name]] = v
            return moved(extra=((callee.name, callee.st, tuple(new_locs)),))
        raise TypeError(lbl)

    def observe(self, state, reach: ReachSets) -> None:
        gvals, threads = state
        for g, v in zip(self.program.globals, gvals):
            reach.globals[g.name].add(_observable(v))
        for stack in threads:
            if not stack:
                continue
            proc, node, locs = stack[-1]
            reach.nodes.add(node)
            names = self.program.procs[proc].local_names
            obs = reach.locals[node]
            for name, v in zip(names, locs):
                if v is not None:
                    obs[name].add(_observable(v))


def concrete_collect(program: Program, max_states: int = DEFAULT_MAX_STATES,
                     max_depth: int = DEFAULT_MAX_DEPTH) -> ReachSets:
    """Explore all interleavings breadth-first and collect the observed values."""
    if max_states <= 0 or max_depth <= 0:
        raise ValueError("budgets must be positive")
    m = _Machine(program)
    reach = ReachSets()
    init = m.initial()
    seen = {init}
    queue = deque([(init, 0)])
    m.observe(init, reach)
    while queue:
        state, depth = queue.popleft()
        reach.max_depth_seen = max(reach.max_depth_seen, depth)
        succ = m.successors(state, reach)
        if depth >= max_depth:
            if succ:
                reach.exhausted = True
            continue
        for s in succ:
            if s in seen:
                continue
            if len(seen) >= max_states:
                reach.exhausted = True
                break
            seen.add(s)
            m.observe(s, reach)
            queue.append((s, depth + 1))
        if reach.exhausted and len(seen) >= max_states:
            break
    reach.states = len(seen)
    reach.globals = dict(reach.globals)
    reach.locals = {n: dict(v) for n, v in reach.locals.items()}
    return reach


# ---------------------------------------------------------------------------
# Soundness audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SoundnessPass:
    def __str__(self) -> str:
        return "Pass"


SOUND = SoundnessPass()


@dataclass(frozen=True)
class SoundnessViolation:
    kind: str
    where: str
    concrete: str
    abstract: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: concrete {self.concrete} not covered by {self.abstract}"


def soundness_check(reach: ReachSets, result, system, verdicts=None):
    """Check every observation against the abstract result; return the first violation or ``SOUND``.

    A budget-exhausted ``reach`` is still a valid under-approximation, so the
    check remains meaningful on it.
    """
    program = system.program
    for g in program.globals:
        abstract = result.rho.get(GlobalShared(g.name), BOT)
        for v in sorted(reach.globals.get(g.name, ()), key=lambda x: str(x)):
            if abstract is BOT or not abstract.contains(v):
                return SoundnessViolation("global", g.name, render_concrete(v), _r(abstract))
    unknowns = list(result.sigma) + list(result.rho)
    for node in sorted(reach.nodes):
        states = node_states(system, node, result.sigma, result.rho, unknowns)
        joined = BOT
        for _, env in states:
            joined = join(joined, env)
        if joined is BOT:
            return SoundnessViolation("node", str(node), "reachable", "⊥")
        cfg = system.cfg_of(node)
        for var, observed in sorted(reach.locals.get(node, {}).items()):
            kind = cfg.kinds[var]
            abstract = joined.get(var, top_of(kind))
            for v in sorted(observed, key=lambda x: str(x)):
                if not abstract.contains(v):
                    return SoundnessViolation("local", f"{node}:{var}", render_concrete(v), _r(abstract))
    if verdicts is None and result.converged:
        verdicts = check_asserts(system, result)
    for av in verdicts or ():
        i = av.site.index
        if av.verdict == PROVEN and reach.assert_violations.get(i):
            return SoundnessViolation("assert", av.site.render(), "violated", av.verdict)
        if av.verdict == UNREACHABLE and i in reach.assert_reached:
            return SoundnessViolation("assert", av.site.render(), "reached", av.verdict)
    return SOUND


def _r(v) -> str:
    return v.render()


__all__ = ["concrete_collect", "soundness_check", "ReachSets", "SOUND", "SoundnessViolation", "OracleError",
           "LocalLoc", "DEFAULT_MAX_STATES", "DEFAULT_MAX_DEPTH"]
