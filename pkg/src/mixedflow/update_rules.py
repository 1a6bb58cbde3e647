"""Pluggable rules turning contributions into updates of the global assignment.

Every rule exposes ``update_globals(orig, contribs, rho)`` returning an
insertion-ordered dict ``{global: new value}``; the hosting solver applies
it as ``rho' = rho ⊕ updates``. Rule state is private to the instance.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .lattice import BOT, equal, join, join_all, leq, narrow, widen

WIDEN = "W"
NARROW = "N"
INF = math.inf


@dataclass
class CMapEntry:
    value: object = BOT
    phase: str = WIDEN
    gas: int = 0


def parse_gas(text) -> float:
    if isinstance(text, (int, float)):
        if text < 0:
            raise ValueError("gas must be non-negative")
        return text
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "∞"):
        return INF
    n = int(t)
    if n < 0:
        raise ValueError("gas must be non-negative")
    return n


class UpdateRule:
    """Base class with bookkeeping shared by every rule."""

    name = "abstract"

    def __init__(self, thresholds: Optional[Sequence[int]] = None):
        self.thresholds = tuple(thresholds) if thresholds is not None else None
        self.wn_switches: Dict[Tuple[object, object], int] = defaultdict(int)
        self.widenings: Dict[Tuple[object, object], int] = defaultdict(int)

    def _widen(self, a, b):
        return widen(a, b, self.thresholds)

    def update_globals(self, orig, contribs: Mapping, rho: Mapping) -> Dict:
        raise NotImplementedError

    def live_join(self, g):
        """Join of the latest recorded per-origin values for ``g`` (None if untracked)."""
        return None

    def describe(self) -> str:
        return self.name


# -- rules that keep no per-origin state -------------------------------------


class JoinRule(UpdateRule):
    name = "join"

    def update_globals(self, orig, contribs, rho):
        updates = {}
        for g, b in contribs.items():
            a = rho.get(g, BOT)
            if leq(b, a):
                continue
            updates[g] = join(a, b)
        return updates


class WidenJoinRule(UpdateRule):
    name = "widen-join"

    def update_globals(self, orig, contribs, rho):
        updates = {}
        for g, b in contribs.items():
            a = rho.get(g, BOT)
            if leq(b, a):
                continue
            if a is not BOT:
                self.widenings[(g, orig)] += 1
            updates[g] = self._widen(a, b)
        return updates


class BaselineRule(UpdateRule):
    """Join the first two non-subsumed contributions to a global, widen afterwards."""

    name = "baseline"

    def __init__(self, thresholds=None):
        super().__init__(thresholds)
        self._seen: Dict[object, int] = defaultdict(int)

    def update_globals(self, orig, contribs, rho):
        updates = {}
        for g, b in contribs.items():
            a = rho.get(g, BOT)
            if leq(b, a):
                continue
            if self._seen[g] < 2:
                d = join(a, b)
            else:
                self.widenings[(g, orig)] += 1
                d = self._widen(a, b)
            self._seen[g] += 1
            updates[g] = d
        return updates


# -- rules with a per-origin contribution map --------------------------------


class _CMapRule(UpdateRule):
    """Keeps ``cmap[g][orig]`` (non-⊥ values only) with a cached per-global join."""

    def __init__(self, thresholds=None):
        super().__init__(thresholds)
        self._cmap: Dict[object, Dict[object, object]] = {}
        self._joined: Dict[object, object] = {}

    def _get(self, g, orig):
        return self._cmap.get(g, {}).get(orig, BOT)

    def _set(self, g, orig, value) -> None:
        entries = self._cmap.setdefault(g, {})
        old = entries.get(orig, BOT)
        if value is BOT:
            entries.pop(orig, None)
        else:
            entries[orig] = value
        if leq(old, value):
            self._joined[g] = join(self._joined.get(g, BOT), value)
        else:
            self._joined[g] = join_all(entries.values())

    def _join_of(self, g):
        return self._joined.get(g, BOT)

    def live_join(self, g):
        return self._join_of(g)

    def origins(self, g) -> Dict[object, object]:
        return dict(self._cmap.get(g, {}))


class SeparateRule(_CMapRule):
    name = "separate"

    def update_globals(self, orig, contribs, rho):
        updates = {}
        for g, b in contribs.items():
            self._set(g, orig, b)
            d = self._join_of(g)
            if not equal(d, rho.get(g, BOT)):
                updates[g] = d
        return updates


class ApinisRule(_CMapRule):
    """Widen or narrow the joined per-origin value into ``rho g``.

    With ``gas`` finite, each global may switch from widening to narrowing at
    most ``gas`` times; ``gas=inf`` is the unbounded rule.
    """

    name = "apinis"

    def __init__(self, thresholds=None, gas: float = INF):
        super().__init__(thresholds)
        self.gas = gas
        self._phase: Dict[object, CMapEntry] = {}

    def describe(self) -> str:
        return f"apinis(gas={_render_gas(self.gas)})"

    def live_join(self, g):
        # rho g is a widened/narrowed value, not the plain join of the entries
        return None

    def update_globals(self, orig, contribs, rho):
        updates = {}
        for g, b in contribs.items():
            if equal(self._get(g, orig), b):
                continue
            self._set(g, orig, b)
            a = rho.get(g, BOT)
            bj = self._join_of(g)
            st = self._phase.setdefault(g, CMapEntry())
            if leq(bj, a):
                if equal(bj, a):
                    d = a
                elif st.phase == NARROW:
                    d = narrow(a, bj)
                elif st.gas >= self.gas:
                    d = a
                else:
                    st.phase, st.gas = NARROW, st.gas + 1
                    self.wn_switches[(g, None)] += 1
                    d = narrow(a, bj)
            else:
                st.phase = WIDEN
                if a is not BOT:
                    self.widenings[(g, None)] += 1
                d = self._widen(a, bj)
            if not equal(d, a):
                updates[g] = d
        return updates


class LocalizedRule(_CMapRule):
    """Per-origin widening and narrowing with a bound on W→N switches.

    ``gas=inf`` is plain localized widening/narrowing. The reluctant variant
    joins instead of widening when the contribution is already below ``rho g``.
    """

    name = "localized"
    reluctant = False

    def __init__(self, thresholds=None, gas: float = 3):
        super().__init__(thresholds)
        self.gas = gas
        self._meta: Dict[Tuple[object, object], CMapEntry] = {}

    def describe(self) -> str:
        return f"{self.name}(gas={_render_gas(self.gas)})"

    def entry(self, g, orig) -> CMapEntry:
        m = self._meta.get((g, orig), CMapEntry())
        return CMapEntry(self._get(g, orig), m.phase, m.gas)

    def update_globals(self, orig, contribs, rho):
        updates = {}
        for g, b in contribs.items():
            meta = self._meta.get((g, orig))
            if meta is None:
                meta = self._meta[(g, orig)] = CMapEntry()
            a = self._get(g, orig)
            if equal(a, b):
                continue
            if not leq(b, a):
                meta.phase = WIDEN
                if self.reluctant and leq(b, rho.get(g, BOT)):
                    new = join(a, b)
                else:
                    if a is not BOT:
                        self.widenings[(g, orig)] += 1
                    new = self._widen(a, b)
            elif meta.phase == NARROW:
                new = narrow(a, b)
            elif meta.gas >= self.gas:
                continue
            else:
                meta.phase, meta.gas = NARROW, meta.gas + 1
                self.wn_switches[(g, orig)] += 1
                new = narrow(a, b)
            self._set(g, orig, new)
            d = self._join_of(g)
            if not equal(d, rho.get(g, BOT)):
                updates[g] = d
        return updates


class ReluctantRule(LocalizedRule):
    name = "reluctant"
    reluctant = True


class BottomWrapper(UpdateRule):
    """Make withdrawn contributions explicit as ⊥ before delegating."""

    def __init__(self, inner: UpdateRule):
        self.inner = inner
        self.name = inner.name + "+gc"
        self.thresholds = inner.thresholds
        self.old_contribs: Dict[object, Tuple[object, ...]] = {}

    @property
    def wn_switches(self):
        return self.inner.wn_switches

    @property
    def widenings(self):
        return self.inner.widenings

    def describe(self) -> str:
        return self.inner.describe() + "+gc"

    def live_join(self, g):
        return self.inner.live_join(g)

    def update_globals(self, orig, contribs, rho):
        withdrawn = [g for g in self.old_contribs.get(orig, ()) if g not in contribs]
        self.old_contribs[orig] = tuple(g for g, v in contribs.items() if v is not BOT)
        merged = dict(contribs)
        for g in withdrawn:
            merged[g] = BOT
        return self.inner.update_globals(orig, merged, rho)


def wrap_bottom(inner: UpdateRule) -> UpdateRule:
    return BottomWrapper(inner)


def _render_gas(g) -> str:
    return "inf" if g == INF else str(int(g))


RULE_NAMES = ("baseline", "join", "widen-join", "separate", "apinis", "localized", "reluctant")


def make_rule(name: str, gas: float = 3, gc: bool = False,
              thresholds: Optional[Sequence[int]] = None) -> UpdateRule:
    """Build a rule by identifier; ``gas`` applies to apinis, localized and reluctant."""
    if name == "baseline":
        rule: UpdateRule = BaselineRule(thresholds)
    elif name == "join":
        rule = JoinRule(thresholds)
    elif name == "widen-join":
        rule = WidenJoinRule(thresholds)
    elif name == "separate":
        rule = SeparateRule(thresholds)
    elif name == "apinis":
        rule = ApinisRule(thresholds, gas=gas)
    elif name == "localized":
        rule = LocalizedRule(thresholds, gas=gas)
    elif name == "reluctant":
        rule = ReluctantRule(thresholds, gas=gas)
    else:
        raise ValueError(f"unknown rule {name!r}; expected one of {', '.join(RULE_NAMES)}")
    return wrap_bottom(rule) if gc else rule


# ---------------------------------------------------------------------------
# Dynamic soundness checking of a recorded call sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceEntry:
    orig: object
    contribs: Dict
    rho_before: Dict
    updates: Dict


@dataclass(frozen=True)
class Pass:
    ok = True

    def __str__(self) -> str:
        return "Pass"


PASS = Pass()


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str
    glob: object
    detail: str
    ok = False

    def __str__(self) -> str:
        name = self.glob.render() if hasattr(self.glob, "render") else repr(self.glob)
        return f"{self.kind} violated at call {self.index} on {name}: {self.detail}"


def check_rule_soundness(trace: Iterable[TraceEntry], check_s1: bool = True):
    """Check R1, R2 (and optionally the S1 replay) over a recorded call sequence.

    R1: a contribution not below ``rho_j g`` must produce an update for ``g``.
    R2: every update must subsume each origin's latest contribution to ``g``.
    S1: ``rho_before`` of each call must equal the replay of earlier updates.
    """
    latest: Dict[object, Dict[object, object]] = defaultdict(dict)  # g -> orig -> value
    last_globals: Dict[object, Tuple] = {}
    replay: Dict[object, object] = {}
    for j, e in enumerate(trace):
        if check_s1:
            for g, v in e.rho_before.items():
                if not _same(replay.get(g, BOT), v):
                    return Violation(j, "S1", g, f"solver rho {_r(v)} differs from replayed {_r(replay.get(g, BOT))}")
        for g, b in e.contribs.items():
            if not leq(b, e.rho_before.get(g, BOT)) and g not in e.updates:
                return Violation(j, "R1", g, f"contribution {_r(b)} not below {_r(e.rho_before.get(g, BOT))} but no update")
        for g in last_globals.get(e.orig, ()):
            if g not in e.contribs:
                latest[g].pop(e.orig, None)
        for g, b in e.contribs.items():
            latest[g][e.orig] = b
        last_globals[e.orig] = tuple(e.contribs)
        for g, d in e.updates.items():
            for o, b in latest[g].items():
                if not leq(b, d):
                    return Violation(j, "R2", g, f"update {_r(d)} drops latest contribution {_r(b)} of {_r(o)}")
            replay[g] = d
    return PASS


def _same(a, b) -> bool:
    return a is b or (a is not BOT and b is not BOT and a == b)


def _r(v) -> str:
    return v.render() if hasattr(v, "render") else repr(v)


__all__ = [
    "UpdateRule", "BaselineRule", "JoinRule", "WidenJoinRule", "SeparateRule", "ApinisRule",
    "LocalizedRule", "ReluctantRule", "BottomWrapper", "wrap_bottom", "make_rule", "parse_gas",
    "check_rule_soundness", "TraceEntry", "Violation", "PASS", "CMapEntry", "RULE_NAMES", "INF",
    "WIDEN", "NARROW",
]
