"""Hand-written constraint systems that exercise update-rule termination.

``ex43``
    Two locals feeding each other's global by one; drives localized
    widening/narrowing into an endless W/N switching pattern.
``appendixB``
    The same system, modified so that an already-infinite global triggers a
    different contribution; this defeats the equal-contribution skip of the
    Apinis rule.
``appendixC_lex`` / ``appendixC_interval``
    Two origins taking turns to catch up with and then push past the level
    of a shared global. Over the lexicographic gas lattice the reluctant rule
    keeps resetting the widening gas; over intervals it converges.
"""

from __future__ import annotations

from typing import Callable, Dict

from .constraints import ConstraintSystem, GlobalShared, NamedLocal, TableSystem, UnknownSpec
from .lattice import (BOT, POS_INF, CounterValue, LexGasValue, counter, counter_add,
                      counter_int, interval)

X = NamedLocal("x")
Y = NamedLocal("y")
A = GlobalShared("a")
B = GlobalShared("b")
G = GlobalShared("g")


def ex43() -> TableSystem:
    def fx(read):
        return read(A), {A: counter_add(read(B), 1)}

    def fy(read):
        return read(B), {B: counter_add(read(A), 1)}

    return TableSystem("ex43", {X: fx, Y: fy}, interest=(X, Y))


def appendix_b() -> TableSystem:
    def make(own, other):
        def f(read):
            mine = read(own)
            step = 2 if isinstance(mine, CounterValue) and mine.is_inf else 1
            return mine, {own: counter_add(read(other), step)}

        return f

    return TableSystem("appendixB", {X: make(A, B), Y: make(B, A)}, interest=(X, Y))


def _level_lex(v) -> float:
    if v is BOT:
        return 0
    return float("inf") if v.n is None else v.n


def _level_itv(v) -> float:
    if v is BOT:
        return 0
    return float("inf") if v.hi == POS_INF else v.hi


def _contrib_lex(n: float):
    return LexGasValue(None if n == float("inf") else int(n), 0)


def _contrib_itv(n: float):
    return interval(0, POS_INF if n == float("inf") else int(n))


def _leapfrog(name: str, level: Callable, make: Callable) -> TableSystem:
    """Each origin's own value encodes ``2*n + phase + 1`` where ``n`` is its last level.

    phase 0 means it has caught up with ``g``; phase 1 means it pushed past.
    """

    def origin(me):
        def f(read):
            state = read(me)
            s = counter_int(state)
            if s == float("inf"):
                n, phase = float("inf"), 1
            elif s == 0:
                n, phase = 0, 0
            else:
                n, phase = (int(s) - 1) // 2, (int(s) - 1) % 2
            lvl = level(read(G))
            if lvl > n:
                return _state(lvl, 0), {G: make(lvl)}
            if phase == 0 and lvl != float("inf"):
                return _state(lvl + 1, 1), {G: make(lvl + 1)}
            return state, {}

        return f

    return TableSystem(name, {X: origin(X), Y: origin(Y)}, interest=(X, Y))


def _state(n: float, phase: int):
    if n == float("inf"):
        return counter(None)
    return counter(2 * int(n) + phase + 1)


SYSTEMS: Dict[str, Callable[[], ConstraintSystem]] = {
    "ex43": ex43,
    "appendixB": appendix_b,
    "appendixC_lex": lambda: _leapfrog("appendixC_lex", _level_lex, _contrib_lex),
    "appendixC_interval": lambda: _leapfrog("appendixC_interval", _level_itv, _contrib_itv),
}


def register_synthetic_system(spec: str) -> ConstraintSystem:
    try:
        factory = SYSTEMS[spec]
    except KeyError:
        raise UnknownSpec(f"unknown synthetic system {spec!r}; known: {', '.join(sorted(SYSTEMS))}") from None
    return factory()


__all__ = ["register_synthetic_system", "SYSTEMS", "X", "Y", "A", "B", "G"]
