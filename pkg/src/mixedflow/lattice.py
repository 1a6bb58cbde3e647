"""Value domains: intervals, points-to sets, environments and two test lattices.

Every domain shares one bottom element, :data:`BOT`, so that update rules can
talk about "no contribution" without knowing which domain a global lives in.
The generic operators :func:`leq`, :func:`join`, :func:`meet`, :func:`widen`
and :func:`narrow` handle ``BOT`` and dispatch to the domain class otherwise.

All values are immutable and hashable.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from ._backend import kernels as _k

NEG_INF: int = _k.NEG_INF
POS_INF: int = _k.POS_INF


class _Bottom:
    __slots__ = ()
    _instance: Optional["_Bottom"] = None

    def __new__(cls) -> "_Bottom":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOT"

    def __reduce__(self):
        return (_Bottom, ())

    def render(self) -> str:
        return "⊥"


BOT = _Bottom()


def is_bot(v) -> bool:
    return v is BOT


def leq(a, b) -> bool:
    if a is BOT:
        return True
    if b is BOT:
        return False
    return a.leq(b)


def equal(a, b) -> bool:
    """Lattice equality ``a ⊑ b and b ⊑ a``; representations are canonical."""
    if a is b:
        return True
    if a is BOT or b is BOT:
        return False
    return a == b or (a.leq(b) and b.leq(a))


def join(a, b):
    if a is BOT:
        return b
    if b is BOT:
        return a
    return a.join(b)


def join_all(values: Iterable):
    acc = BOT
    for v in values:
        acc = join(acc, v)
    return acc


def meet(a, b):
    if a is BOT or b is BOT:
        return BOT
    return a.meet(b)


def widen(a, b, thresholds: Optional[Sequence[int]] = None):
    if a is BOT:
        return b
    if b is BOT:
        return a
    return a.widen(b, thresholds)


def narrow(a, b):
    if a is BOT or b is BOT:
        return BOT
    return a.narrow(b)


def render(v) -> str:
    return v.render()


def render_bound(b: int) -> str:
    if b == NEG_INF:
        return "-inf"
    if b == POS_INF:
        return "inf"
    return str(b)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


class Interval:
    """A non-empty interval ``[lo, hi]`` over saturating 64-bit bounds."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: int, hi: int):
        if lo > hi:
            raise ValueError(f"empty interval [{lo},{hi}]; use interval() for possibly-empty bounds")
        self.lo = lo
        self.hi = hi

    @classmethod
    def const(cls, v: int) -> "Interval":
        v = _k.clamp(v)
        return cls(v, v)

    def __eq__(self, other) -> bool:
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Interval({self.render()})"

    def render(self) -> str:
        return f"[{render_bound(self.lo)},{render_bound(self.hi)}]"

    @property
    def is_top(self) -> bool:
        return self.lo == NEG_INF and self.hi == POS_INF

    def contains(self, v: int) -> bool:
        return self.lo <= v <= self.hi

    def leq(self, other: "Interval") -> bool:
        return _k.itv_leq(self.lo, self.hi, other.lo, other.hi)

    def join(self, other: "Interval") -> "Interval":
        return Interval(*_k.itv_join(self.lo, self.hi, other.lo, other.hi))

    def meet(self, other: "Interval"):
        r = _k.itv_meet(self.lo, self.hi, other.lo, other.hi)
        return BOT if r is None else Interval(*r)

    def widen(self, other: "Interval", thresholds: Optional[Sequence[int]] = None) -> "Interval":
        if thresholds is None:
            return Interval(*_k.itv_widen(self.lo, self.hi, other.lo, other.hi))
        return Interval(*_k.itv_widen_thresholds(self.lo, self.hi, other.lo, other.hi, tuple(thresholds)))

    def narrow(self, other: "Interval"):
        r = _k.itv_narrow(self.lo, self.hi, other.lo, other.hi)
        return BOT if r is None else Interval(*r)


TOP_ITV = Interval(NEG_INF, POS_INF)


def interval(lo: int, hi: int):
    """Build ``[lo, hi]``, or ``BOT`` when the bounds are crossed."""
    if lo > hi:
        return BOT
    return Interval(lo, hi)


def threshold_widen(a, b, thresholds: Sequence[int]):
    """Interval widening that jumps to the nearest enclosing threshold."""
    ts = sorted(set(thresholds) | {NEG_INF, POS_INF})
    return widen(a, b, ts)


def itv_add(a, b):
    if a is BOT or b is BOT:
        return BOT
    return Interval(*_k.itv_add(a.lo, a.hi, b.lo, b.hi))


def itv_sub(a, b):
    if a is BOT or b is BOT:
        return BOT
    return Interval(*_k.itv_sub(a.lo, a.hi, b.lo, b.hi))


def itv_mul(a, b):
    if a is BOT or b is BOT:
        return BOT
    return Interval(*_k.itv_mul(a.lo, a.hi, b.lo, b.hi))


def itv_neg(a):
    if a is BOT:
        return BOT
    return Interval(*_k.itv_neg(a.lo, a.hi))


# ---------------------------------------------------------------------------
# Points-to sets
# ---------------------------------------------------------------------------


class PtSet:
    """May-points-to set of abstract locations, or ``top``.

    The empty set is ``BOT``; build values through :func:`ptset`.
    """

    __slots__ = ("targets", "top")

    def __init__(self, targets: Iterable[str] = (), top: bool = False):
        self.targets = frozenset() if top else frozenset(targets)
        self.top = top
        if not top and not self.targets:
            raise ValueError("empty points-to set is BOT; use ptset()")

    def __eq__(self, other) -> bool:
        return isinstance(other, PtSet) and self.top == other.top and self.targets == other.targets

    def __hash__(self) -> int:
        return hash((self.top, self.targets))

    def __repr__(self) -> str:
        return f"PtSet({self.render()})"

    def render(self) -> str:
        if self.top:
            return "top"
        return "{" + ",".join(sorted(self.targets)) + "}"

    @property
    def is_top(self) -> bool:
        return self.top

    def contains(self, loc: str) -> bool:
        return self.top or loc in self.targets

    def leq(self, other: "PtSet") -> bool:
        if other.top:
            return True
        if self.top:
            return False
        return self.targets <= other.targets

    def join(self, other: "PtSet") -> "PtSet":
        if self.top or other.top:
            return PTS_TOP
        return PtSet(self.targets | other.targets)

    def meet(self, other: "PtSet"):
        if self.top:
            return other
        if other.top:
            return self
        return ptset(self.targets & other.targets)

    def widen(self, other: "PtSet", thresholds=None) -> "PtSet":
        return self.join(other)

    def narrow(self, other: "PtSet"):
        return other if other.leq(self) else self


PTS_TOP = PtSet(top=True)


def ptset(targets: Iterable[str]):
    t = frozenset(targets)
    return PtSet(t) if t else BOT


# ---------------------------------------------------------------------------
# Abstract environments
# ---------------------------------------------------------------------------


class AbsEnv:
    """Non-relational map from local names to intervals or points-to sets.

    Unbound names read as top of their kind, so top bindings are never stored
    and equal environments have equal representations. An environment with a
    bottom binding collapses to ``BOT`` (see :func:`env`).
    """

    __slots__ = ("bindings", "_map", "_hash")

    def __init__(self, bindings: Mapping[str, object] | Iterable[tuple[str, object]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        kept = []
        for name, v in items:
            if v is BOT:
                raise ValueError("bottom binding; use env() to collapse")
            if not v.is_top:
                kept.append((name, v))
        kept.sort(key=lambda kv: kv[0])
        self.bindings: tuple = tuple(kept)
        self._map = dict(kept)
        self._hash = hash(self.bindings)

    def __eq__(self, other) -> bool:
        return isinstance(other, AbsEnv) and self.bindings == other.bindings

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"AbsEnv({self.render()})"

    def render(self) -> str:
        return "{" + ", ".join(f"{k}={v.render()}" for k, v in self.bindings) + "}"

    @property
    def is_top(self) -> bool:
        return not self.bindings

    def get(self, name: str, default):
        return self._map.get(name, default)

    def names(self):
        return self._map.keys()

    def set(self, name: str, value):
        if value is BOT:
            return BOT
        m = dict(self._map)
        m[name] = value
        return AbsEnv(m)

    def leq(self, other: "AbsEnv") -> bool:
        for name, bv in other.bindings:
            av = self._map.get(name)
            if av is None or not av.leq(bv):
                return False
        return True

    def join(self, other: "AbsEnv") -> "AbsEnv":
        out = {}
        for name, av in self.bindings:
            bv = other._map.get(name)
            if bv is not None:
                out[name] = av.join(bv)
        return AbsEnv(out)

    def meet(self, other: "AbsEnv"):
        out = dict(self._map)
        for name, bv in other.bindings:
            av = out.get(name)
            out[name] = bv if av is None else av.meet(bv)
        return env(out)

    def widen(self, other: "AbsEnv", thresholds=None) -> "AbsEnv":
        out = {}
        for name, av in self.bindings:
            bv = other._map.get(name)
            if bv is not None:
                out[name] = av.widen(bv, thresholds)
        return AbsEnv(out)

    def narrow(self, other: "AbsEnv"):
        out = dict(other._map)
        for name, av in self.bindings:
            bv = other._map.get(name)
            out[name] = av if bv is None else av.narrow(bv)
        return env(out)


def env(bindings: Mapping[str, object] = ()):
    """Build an environment, collapsing to ``BOT`` if any binding is bottom."""
    items = bindings.items() if isinstance(bindings, Mapping) else bindings
    items = list(items)
    for _, v in items:
        if v is BOT:
            return BOT
    return AbsEnv(items)


EMPTY_ENV = AbsEnv()


# ---------------------------------------------------------------------------
# Pathological test lattices
# ---------------------------------------------------------------------------


class CounterValue:
    """Naturals with infinity, ordered by ``<=``; ``0`` is ``BOT``.

    Widening jumps straight to infinity on growth and narrowing only
    improves an infinite left operand. Build values through :func:`counter`.
    """

    __slots__ = ("n",)

    def __init__(self, n: Optional[int]):
        # n is None for infinity
        if n is not None and n <= 0:
            raise ValueError("0 is BOT; use counter()")
        self.n = n

    def __eq__(self, other) -> bool:
        return isinstance(other, CounterValue) and self.n == other.n

    def __hash__(self) -> int:
        return hash(("counter", self.n))

    def __repr__(self) -> str:
        return f"CounterValue({self.render()})"

    def render(self) -> str:
        return "inf" if self.n is None else str(self.n)

    @property
    def is_top(self) -> bool:
        return self.n is None

    @property
    def is_inf(self) -> bool:
        return self.n is None

    def _key(self) -> float:
        return float("inf") if self.n is None else self.n

    def leq(self, other: "CounterValue") -> bool:
        return self._key() <= other._key()

    def join(self, other: "CounterValue") -> "CounterValue":
        return self if self._key() >= other._key() else other

    def meet(self, other: "CounterValue") -> "CounterValue":
        return self if self._key() <= other._key() else other

    def widen(self, other: "CounterValue", thresholds=None) -> "CounterValue":
        return self if other.leq(self) else COUNTER_INF

    def narrow(self, other: "CounterValue") -> "CounterValue":
        return other if self.n is None else self


COUNTER_INF = CounterValue(None)


def counter(n):
    """``n`` is a natural or ``None``/``math.inf`` for infinity."""
    if n is None or n == float("inf"):
        return COUNTER_INF
    if n <= 0:
        return BOT
    return CounterValue(int(n))


def counter_int(v) -> float:
    """Numeric reading of a counter value (``BOT`` reads as 0)."""
    if v is BOT:
        return 0
    return v._key()


def counter_add(v, k: int):
    if v is BOT:
        return counter(k)
    if v.n is None:
        return COUNTER_INF
    return counter(v.n + k)


LEX_INF = None


class LexGasValue:
    """Pairs ``(n, tag)`` with ``n`` natural or infinite and ``tag`` in 0..2.

    Ordered lexicographically; its widening carries a little gas in the tag
    and is *not* strong. This lattice keeps a separate ``BOT`` below (0, 0),
    so ``(0, 0)`` is an ordinary value.
    """

    __slots__ = ("n", "tag")

    def __init__(self, n: Optional[int], tag: int):
        if tag not in (0, 1, 2):
            raise ValueError("tag must be 0, 1 or 2")
        if n is not None and n < 0:
            raise ValueError("n must be natural")
        self.n = n
        self.tag = tag

    def __eq__(self, other) -> bool:
        return isinstance(other, LexGasValue) and self.n == other.n and self.tag == other.tag

    def __hash__(self) -> int:
        return hash(("lex", self.n, self.tag))

    def __repr__(self) -> str:
        return f"LexGasValue({self.render()})"

    def render(self) -> str:
        return f"({'inf' if self.n is None else self.n},{self.tag})"

    @property
    def is_top(self) -> bool:
        return self.n is None and self.tag == 2

    def _key(self):
        return (float("inf") if self.n is None else self.n, self.tag)

    def leq(self, other: "LexGasValue") -> bool:
        return self._key() <= other._key()

    def join(self, other: "LexGasValue") -> "LexGasValue":
        return self if self._key() >= other._key() else other

    def meet(self, other: "LexGasValue") -> "LexGasValue":
        return self if self._key() <= other._key() else other

    def widen(self, other: "LexGasValue", thresholds=None) -> "LexGasValue":
        return lex_widen(self, other)

    def narrow(self, other: "LexGasValue") -> "LexGasValue":
        return self


def lex_widen(a: LexGasValue, b: LexGasValue) -> LexGasValue:
    tag = max(a.tag, b.tag)
    if tag == 2:
        return LexGasValue(None, 2)
    if a.n is None or b.n is None:
        n = None
    else:
        n = max(a.n, b.n)
    return LexGasValue(n, tag + 1)


def contains(value, concrete) -> bool:
    """Concretization membership for intervals (ints) and points-to sets (locations)."""
    if value is BOT:
        return False
    return value.contains(concrete)
