"""Constraint generation: one right-hand side per (program point, context)."""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

from ..constraints import (MAIN, UNIT, ConstraintSystem, Contributions, Full, GlobalProcEntry, GlobalShared,
                           LocalPoint, UnknownLocal, add_contrib)
from ..lattice import BOT, EMPTY_ENV, Interval, join, ptset
from .cfg import CallL, Edge, ProcCFG, Program
from .transfer import Evaluator, entry_env, transfer

CONTEXT_MODES = ("none", "full")


class ProgramSystem(ConstraintSystem):
    """The side-effecting constraint system of a program in one context mode.

    ``mode`` is ``"none"`` (a single context ``•`` per procedure) or ``"full"``
    (contexts are abstract entry environments).
    """

    def __init__(self, program: Program, mode: str = "none", name: str = "program"):
        if mode not in CONTEXT_MODES:
            raise ValueError(f"unknown context mode {mode!r}")
        self.program = program
        self.mode = mode
        self.name = name
        self._node_cfg: Dict[int, ProcCFG] = {}
        self._st_of: Dict[int, ProcCFG] = {}
        for cfg in program.procs.values():
            for n in cfg.nodes:
                self._node_cfg[n] = cfg
            self._st_of[cfg.st] = cfg

    # -- contexts ----------------------------------------------------------

    def context(self, entry):
        return UNIT if self.mode == "none" else Full(entry)

    @property
    def initial_context(self):
        return self.context(EMPTY_ENV)

    def state_unknown(self, node: int, ctx):
        """The unknown holding the abstract state at ``node``: ρ for start points, σ otherwise."""
        cfg = self._st_of.get(node)
        if cfg is not None:
            return GlobalProcEntry(cfg.name, ctx)
        return LocalPoint(node, ctx)

    def return_unknown(self, g):
        """The return local read by callers of the procedure entry ``g``."""
        return LocalPoint(self.program.procs[g.proc].ret, g.ctx)

    def cfg_of(self, node: int) -> ProcCFG:
        return self._node_cfg[node]

    # -- system interface --------------------------------------------------

    def is_widening_point(self, x) -> bool:
        if isinstance(x, LocalPoint):
            cfg = self._node_cfg.get(x.node)
            return cfg is not None and x.node in cfg.widening_points
        return False

    def rhs(self, x):
        if x == MAIN:
            return self._main_rhs
        if isinstance(x, LocalPoint):
            cfg = self._node_cfg.get(x.node)
            if cfg is None or x.node == cfg.st:
                raise UnknownLocal(x)
            edges = cfg.in_edges[x.node]
            ctx = x.ctx
            return lambda read: self._node_rhs(cfg, edges, ctx, read)
        raise UnknownLocal(x)

    def _main_rhs(self, read) -> Tuple[object, Contributions]:
        contribs: Contributions = {}
        for g in self.program.globals:
            v = Interval.const(g.init) if g.kind == "int" else ptset([g.init])
            add_contrib(contribs, GlobalShared(g.name), v)
        c0 = self.initial_context
        value = BOT
        for t in self.program.thread_entries:
            add_contrib(contribs, GlobalProcEntry(t, c0), EMPTY_ENV)
            value = join(value, read(LocalPoint(self.program.procs[t].ret, c0)))
        return value, contribs

    def _node_rhs(self, cfg: ProcCFG, edges: Sequence[Edge], ctx, read):
        value = BOT
        contribs: Contributions = {}
        for e in edges:
            v, c = self.edge_effect(cfg, e, ctx, read)
            value = join(value, v)
            for g, d in c.items():
                add_contrib(contribs, g, d)
        return value, contribs

    def edge_effect(self, cfg: ProcCFG, e: Edge, ctx, read):
        """Value and contributions of one edge.

        The result is ``(BOT, {})`` whenever the predecessor or an expression is
        ``BOT``. A call still contributes the callee entry while its return point is ``BOT``.
        """
        pred = read(self.state_unknown(e.src, ctx))
        if pred is BOT:
            return BOT, {}
        ev = Evaluator(cfg.name, read, {})
        if isinstance(e.label, CallL):
            callee = self.program.procs[e.label.proc]
            entry = entry_env(callee.params, e.label.args, pred, ev)
            if entry is BOT:
                return BOT, {}
            c2 = self.context(entry)
            add_contrib(ev.contribs, GlobalProcEntry(callee.name, c2), entry)
            if read(LocalPoint(callee.ret, c2)) is BOT:
                return BOT, ev.contribs
            return pred, ev.contribs
        out = transfer(e.label, pred, ev, cfg.address_taken)
        if out is BOT:
            return BOT, {}
        return out, ev.contribs

    # -- golden dumps ------------------------------------------------------

    def dump(self) -> str:
        """Render the constraint structure, one line per local and program point."""
        d = "•" if self.mode == "none" else "d"
        c0 = "•" if self.mode == "none" else "{}"
        lines: List[str] = []
        inits = ", ".join(f"{g.name} ↦ {'['+str(g.init)+','+str(g.init)+']' if g.kind == 'int' else '{'+g.init+'}'}"
                          for g in self.program.globals)
        entries = ", ".join(f"(st_{t},{c0}) ↦ {{}}" for t in self.program.thread_entries)
        reads = " ⊔ ".join(f"σ({self.program.procs[t].ret},{c0})" for t in self.program.thread_entries) or "⊥"
        side = ", ".join(x for x in (inits, entries) if x)
        lines.append(f"_main ⊒ {reads} with {{{side}}}")
        for cfg in self.program.procs.values():
            for n in cfg.nodes:
                if n == cfg.st:
                    continue
                parts = []
                for e in cfg.in_edges[n]:
                    src = f"ρ(st_{cfg.name},{d})" if e.src == cfg.st else f"σ({e.src},{d})"
                    lbl = e.label.render()
                    if isinstance(e.label, CallL):
                        callee = self.program.procs[e.label.proc]
                        cc = "•" if self.mode == "none" else "entry"
                        lbl += f" via (st_{callee.name},{cc}) and σ({callee.ret},{cc})"
                    parts.append(f"{lbl} of {src}")
                wp = " [widen]" if n in cfg.widening_points else ""
                lines.append(f"({n},{d}) ⊒ " + " ⊔ ".join(parts) + wp)
        return "\n".join(lines) + "\n"


def gen_constraints(program: Program, mode: str = "none", name: str = "program") -> ProgramSystem:
    return ProgramSystem(program, mode, name)


__all__ = ["ProgramSystem", "gen_constraints", "CONTEXT_MODES"]
