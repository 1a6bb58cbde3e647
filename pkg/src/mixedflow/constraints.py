"""Side-effecting constraint systems.

Unknowns split into locals (evaluated via right-hand sides) and globals
(written only through contributions). A right-hand side is a function of a
read callback; it returns the local value and a dict of contributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

from .lattice import BOT, AbsEnv, join

# ---------------------------------------------------------------------------
# Contexts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Unit:
    """The single context of context-insensitive analysis."""

    def render(self) -> str:
        return "•"


@dataclass(frozen=True)
class Full:
    """A context keyed by the abstract entry environment."""

    entry: AbsEnv

    def render(self) -> str:
        return self.entry.render()


UNIT = Unit()


# ---------------------------------------------------------------------------
# Unknowns
# ---------------------------------------------------------------------------


class Unknown:
    is_global: bool = False

    @property
    def is_local(self) -> bool:
        return not self.is_global


@dataclass(frozen=True)
class LocalPoint(Unknown):
    node: int
    ctx: object

    def render(self) -> str:
        return f"({self.node},{self.ctx.render()})"


@dataclass(frozen=True)
class MainSentinel(Unknown):
    def render(self) -> str:
        return "_main"


MAIN = MainSentinel()


@dataclass(frozen=True)
class NamedLocal(Unknown):
    """A free-standing local of a hand-written system (e.g. ``x``)."""

    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class GlobalShared(Unknown):
    var: str
    is_global = True

    def render(self) -> str:
        return self.var


@dataclass(frozen=True)
class GlobalProcEntry(Unknown):
    proc: str
    ctx: object
    is_global = True

    def render(self) -> str:
        return f"(st_{self.proc},{self.ctx.render()})"


@dataclass(frozen=True)
class GlobalEscaped(Unknown):
    proc: str
    var: str
    is_global = True

    def render(self) -> str:
        return f"esc({self.proc}.{self.var})"


def sort_key(u: Unknown) -> Tuple[int, str]:
    """Stable ordering for reports: globals first, then locals, by rendering."""
    order = {GlobalShared: 0, GlobalEscaped: 1, GlobalProcEntry: 2, MainSentinel: 3, NamedLocal: 4, LocalPoint: 5}
    if isinstance(u, LocalPoint):
        return (order[LocalPoint], f"{u.node:08d}{u.ctx.render()}")
    return (order[type(u)], u.render())


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

Contributions = Dict[Unknown, object]
ReadFn = Callable[[Unknown], object]
RHS = Callable[[ReadFn], Tuple[object, Contributions]]


class UnknownLocal(KeyError):
    """Raised when evaluating a local that has no right-hand side."""


class UnknownSpec(ValueError):
    """Raised for an unrecognised synthetic system name."""


def add_contrib(contribs: Contributions, g: Unknown, value) -> None:
    """Record a contribution, pre-joining repeated contributions to ``g``."""
    if value is BOT:
        return
    prev = contribs.get(g, BOT)
    contribs[g] = join(prev, value)


class ConstraintSystem:
    """Base class; subclasses supply :meth:`rhs` and optionally widening points."""

    name: str = "system"

    def interest(self) -> Sequence[Unknown]:
        return (MAIN,)

    def rhs(self, x: Unknown) -> RHS:
        raise UnknownLocal(x)

    def is_widening_point(self, x: Unknown) -> bool:
        return False


class TableSystem(ConstraintSystem):
    """A finite system given as an explicit table of right-hand sides."""

    def __init__(self, name: str, rhss: Mapping[Unknown, RHS], interest: Iterable[Unknown],
                 widening_points: Iterable[Unknown] = ()):
        self.name = name
        self._rhss = dict(rhss)
        self._interest = tuple(interest)
        self._wp = frozenset(widening_points)

    def interest(self) -> Sequence[Unknown]:
        return self._interest

    def rhs(self, x: Unknown) -> RHS:
        try:
            return self._rhss[x]
        except KeyError:
            raise UnknownLocal(x) from None

    def is_widening_point(self, x: Unknown) -> bool:
        return x in self._wp

    @property
    def locals(self):
        return tuple(self._rhss)


def evaluate(system: ConstraintSystem, x: Unknown,
             lookup: Callable[[Unknown], object]) -> Tuple[object, Contributions, Tuple[Unknown, ...]]:
    """Evaluate ``f_x`` against ``lookup`` and report the unknowns it read, in first-read order."""
    if x.is_global:
        raise UnknownLocal(x)
    f = system.rhs(x)
    deps: Dict[Unknown, None] = {}

    def read(u: Unknown):
        if u not in deps:
            deps[u] = None
        return lookup(u)

    value, contribs = f(read)
    return value, contribs, tuple(deps)


def assignment_lookup(sigma: Mapping[Unknown, object], rho: Mapping[Unknown, object]) -> Callable[[Unknown], object]:
    def lookup(u: Unknown):
        return (rho if u.is_global else sigma).get(u, BOT)

    return lookup


__all__ = [
    "UNIT", "Unit", "Full", "Unknown", "LocalPoint", "MainSentinel", "MAIN", "NamedLocal",
    "GlobalShared", "GlobalProcEntry", "GlobalEscaped", "ConstraintSystem", "TableSystem",
    "evaluate", "add_contrib", "assignment_lookup", "UnknownLocal", "UnknownSpec", "sort_key",
]
