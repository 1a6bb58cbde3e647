"""Abstract transfer functions for CFG edge labels over intervals and points-to sets."""

from __future__ import annotations

from typing import Callable, Dict, Optional, Tuple

from .._backend import kernels as _k
from ..constraints import Contributions, GlobalEscaped, GlobalShared, add_contrib
from ..lattice import (BOT, PTS_TOP, TOP_ITV, AbsEnv, Interval, interval, itv_add, itv_mul, itv_neg,
                       itv_sub, join, meet, ptset)
from . import parser as P
from .cfg import AddrGlobal, AddrLocal, AssertL, AssignL, DerefR, GuardL, GVar, LVar, Skip
from .parser import NEGATED, Cmp

NEG_INF = _k.NEG_INF
POS_INF = _k.POS_INF

ReadFn = Callable[[object], object]


def top_of(kind: str):
    return PTS_TOP if kind == "ptr" else TOP_ITV


def location_unknown(loc: str):
    """Map a location name (``g`` or ``proc.var``) to the global holding its value."""
    if "." in loc:
        proc, var = loc.split(".", 1)
        return GlobalEscaped(proc, var)
    return GlobalShared(loc)


class Evaluator:
    """Evaluates expressions of one procedure against an environment and a ρ view."""

    __slots__ = ("proc", "read", "contribs")

    def __init__(self, proc: str, read: ReadFn, contribs: Optional[Contributions] = None):
        self.proc = proc
        self.read = read
        self.contribs = contribs if contribs is not None else {}

    def var(self, v, env: AbsEnv):
        if isinstance(v, LVar):
            return env.get(v.name, top_of(v.kind))
        return self.read(GlobalShared(v.name))

    def int_expr(self, e, env: AbsEnv):
        if isinstance(e, P.Num):
            return Interval.const(e.value)
        if isinstance(e, (LVar, GVar)):
            return self.var(e, env)
        if isinstance(e, DerefR):
            pts = self.var(e.ptr, env)
            if pts is BOT:
                return BOT
            if pts.is_top:
                return TOP_ITV
            acc = BOT
            for loc in sorted(pts.targets):
                acc = join(acc, self.read(location_unknown(loc)))
            return acc
        if isinstance(e, P.Neg):
            return itv_neg(self.int_expr(e.operand, env))
        if isinstance(e, P.Bin):
            a = self.int_expr(e.left, env)
            b = self.int_expr(e.right, env)
            if e.op == "+":
                return itv_add(a, b)
            if e.op == "-":
                return itv_sub(a, b)
            return itv_mul(a, b)
        raise TypeError(e)

    def ptr_expr(self, e, env: AbsEnv):
        if isinstance(e, AddrGlobal):
            return ptset([e.name])
        if isinstance(e, AddrLocal):
            # Taking the address publishes the local's current value.
            add_contrib(self.contribs, GlobalEscaped(self.proc, e.name), env.get(e.name, TOP_ITV))
            return ptset([f"{self.proc}.{e.name}"])
        return self.var(e, env)

    def value(self, kind: str, e, env: AbsEnv):
        return self.ptr_expr(e, env) if kind == "ptr" else self.int_expr(e, env)


# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------


def _below(hi: int, strict: bool) -> Interval:
    return Interval(NEG_INF, _k.add_bound(hi, -1, False) if strict and hi != POS_INF else hi)


def _above(lo: int, strict: bool) -> Interval:
    return Interval(_k.add_bound(lo, 1, True) if strict and lo != NEG_INF else lo, POS_INF)


def refine_cmp(op: str, a: Interval, b: Interval) -> Optional[Tuple[object, object]]:
    """Refine operands ``a op b``; ``None`` when the comparison is unsatisfiable."""
    if op in (">", ">="):
        r = refine_cmp("<" if op == ">" else "<=", b, a)
        return None if r is None else (r[1], r[0])
    if op in ("<", "<="):
        strict = op == "<"
        a2 = meet(a, _below(b.hi, strict))
        b2 = meet(b, _above(a.lo, strict))
        if a2 is BOT or b2 is BOT:
            return None
        return a2, b2
    if op == "==":
        m = meet(a, b)
        return None if m is BOT else (m, m)
    # !=
    if a.lo == a.hi == b.lo == b.hi:
        return None
    return _trim(a, b), _trim(b, a)


def _trim(a: Interval, b: Interval):
    if b.lo != b.hi or b.lo in (NEG_INF, POS_INF):
        return a
    c = b.lo
    lo, hi = a.lo, a.hi
    if lo == c:
        lo += 1
    if hi == c:
        hi -= 1
    return interval(lo, hi)


def guard(cond: Cmp, polarity: bool, env: AbsEnv, ev: Evaluator):
    """Meet ``env`` with the condition (negated when ``polarity`` is false); ``BOT`` if unsatisfiable."""
    op = cond.op if polarity else NEGATED[cond.op]
    a = ev.int_expr(cond.left, env)
    b = ev.int_expr(cond.right, env)
    if a is BOT or b is BOT:
        return BOT
    r = refine_cmp(op, a, b)
    if r is None:
        return BOT
    for side, v in ((cond.left, r[0]), (cond.right, r[1])):
        if isinstance(side, LVar):
            cur = env.get(side.name, TOP_ITV)
            env = env.set(side.name, meet(cur, v))
            if env is BOT:
                return BOT
    return env


# ---------------------------------------------------------------------------
# Intraprocedural edges
# ---------------------------------------------------------------------------


def transfer(label, env, ev: Evaluator, address_taken=frozenset()):
    """Apply a non-call edge label. Returns the successor environment (contributions go to ``ev``)."""
    if env is BOT:
        return BOT
    if isinstance(label, (Skip, AssertL)):
        return env
    if isinstance(label, GuardL):
        return guard(label.cond, label.polarity, env, ev)
    if isinstance(label, AssignL):
        tgt = label.target
        v = ev.value(tgt.kind, label.rhs, env)
        if v is BOT:
            return BOT
        if isinstance(tgt, GVar):
            add_contrib(ev.contribs, GlobalShared(tgt.name), v)
            return env
        if tgt.name in address_taken:
            add_contrib(ev.contribs, GlobalEscaped(ev.proc, tgt.name), v)
        return env.set(tgt.name, v)
    raise TypeError(label)


def entry_env(params, args, env, ev: Evaluator):
    """Abstract parameter passing: the callee's entry environment, or ``BOT``."""
    bindings: Dict[str, object] = {}
    for (name, kind), a in zip(params, args):
        v = ev.value(kind, a, env)
        if v is BOT:
            return BOT
        bindings[name] = v
    return AbsEnv(bindings)


__all__ = ["Evaluator", "guard", "transfer", "entry_env", "refine_cmp", "top_of", "location_unknown"]
