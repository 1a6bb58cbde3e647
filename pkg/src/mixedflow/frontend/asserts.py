"""Assertion verdicts from a converged analysis result."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Tuple

from ..constraints import GlobalProcEntry, LocalPoint, assignment_lookup
from ..lattice import BOT
from .cfg import AssertSite
from .gen import ProgramSystem
from .transfer import Evaluator, guard

PROVEN = "proven"
UNPROVEN = "unproven"
UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class AssertVerdict:
    site: AssertSite
    verdict: str

    def render(self) -> str:
        return f"{self.site.render()}: {self.verdict}"


def node_states(system: ProgramSystem, node: int, sigma, rho, unknowns: Iterable) -> List[Tuple[object, object]]:
    """All non-BOT ``(context, state)`` pairs at ``node`` among ``unknowns``."""
    cfg = system.cfg_of(node)
    out = []
    for u in unknowns:
        if node == cfg.st:
            if isinstance(u, GlobalProcEntry) and u.proc == cfg.name:
                v = rho.get(u, BOT)
            else:
                continue
        elif isinstance(u, LocalPoint) and u.node == node:
            v = sigma.get(u, BOT)
        else:
            continue
        if v is not BOT:
            out.append((u.ctx, v))
    return out


def check_asserts(system: ProgramSystem, result) -> List[AssertVerdict]:
    """Proven iff the negated condition is unsatisfiable in every live context at the assert."""
    lookup = assignment_lookup(result.sigma, result.rho)
    unknowns = sorted_unknowns(result)
    verdicts = []
    for site in system.program.asserts:
        states = node_states(system, site.node, result.sigma, result.rho, unknowns)
        if not states:
            verdicts.append(AssertVerdict(site, UNREACHABLE))
            continue
        ok = True
        for _, env in states:
            ev = Evaluator(site.proc, lookup, {})
            if guard(site.cond, False, env, ev) is not BOT:
                ok = False
                break
        verdicts.append(AssertVerdict(site, PROVEN if ok else UNPROVEN))
    return verdicts


def sorted_unknowns(result):
    return list(result.sigma) + list(result.rho)


__all__ = ["check_asserts", "AssertVerdict", "PROVEN", "UNPROVEN", "UNREACHABLE", "node_states"]
