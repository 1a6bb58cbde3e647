from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedflow.lattice import (BOT, COUNTER_INF, EMPTY_ENV, NEG_INF, POS_INF, PTS_TOP, Interval,
                               LexGasValue, counter, env, equal, interval, itv_add, itv_mul, itv_neg, itv_sub,
                               join, leq, lex_widen, meet, narrow, ptset, render, threshold_widen, widen)
from mixedflow.synthetic import G, X, Y
from mixedflow.update_rules import make_rule

HYP = settings(max_examples=300, deadline=None, database=None, derandomize=True)

bounds = st.one_of(st.integers(-50, 50), st.sampled_from([NEG_INF, POS_INF]))


@st.composite
def intervals(draw):
    a, b = draw(bounds), draw(bounds)
    lo, hi = min(a, b), max(a, b)
    if lo == POS_INF:
        lo = 50
    if hi == NEG_INF:
        hi = -50
    return Interval(lo, hi)


itv_or_bot = st.one_of(st.just(BOT), intervals())
locs = st.sampled_from(["x", "y", "z", "main.p", "f.q"])
ptsets = st.one_of(st.just(BOT), st.just(PTS_TOP), st.frozensets(locs, min_size=1).map(ptset))
envs = st.one_of(
    st.just(BOT),
    st.dictionaries(st.sampled_from(["i", "j", "k"]), intervals(), max_size=3).map(env),
)
def pairs():
    return st.sampled_from(["itv", "pts", "env"]).flatmap(
        lambda k: st.tuples(*(2 * [{"itv": itv_or_bot, "pts": ptsets, "env": envs}[k]])))


thresholds = st.lists(st.integers(-40, 40), max_size=5).map(lambda ts: sorted(set(ts) | {NEG_INF, 0, POS_INF}))


class TestExamples:
    def test_widen_examples(self):
        assert widen(Interval(0, 0), Interval(0, 1)) == Interval(0, POS_INF)
        assert widen(Interval(1, 1), Interval(1, 2)) == Interval(1, POS_INF)
        assert widen(counter(1), counter(3)) == COUNTER_INF

    def test_narrow_examples(self):
        assert narrow(Interval(1, POS_INF), Interval(1, 10)) == Interval(1, 10)
        assert narrow(Interval(0, 5), Interval(1, 2)) == Interval(0, 5)
        assert narrow(COUNTER_INF, counter(3)) == counter(3)
        assert narrow(Interval(0, 5), BOT) is BOT

    def test_threshold_examples(self):
        ts = [NEG_INF, 0, 10, POS_INF]
        assert threshold_widen(Interval(1, 1), Interval(1, 2), ts) == Interval(1, 10)
        assert threshold_widen(BOT, Interval(3, 3), ts) == Interval(3, 3)
        assert threshold_widen(Interval(0, 10), Interval(0, 7), ts) == Interval(0, 10)

    def test_lex_widen_examples(self):
        assert lex_widen(LexGasValue(0, 0), LexGasValue(1, 0)) == LexGasValue(1, 1)
        assert lex_widen(LexGasValue(0, 0), LexGasValue(2, 0)) == LexGasValue(2, 1)
        assert lex_widen(LexGasValue(5, 2), LexGasValue(1, 0)) == LexGasValue(None, 2)

    def test_rendering(self):
        assert render(BOT) == "⊥"
        assert render(Interval(NEG_INF, 3)) == "[-inf,3]"
        assert render(ptset(["zero", "main.i", "a"])) == "{a,main.i,zero}"
        assert render(PTS_TOP) == "top"
        assert render(env({"j": Interval(0, 1), "i": Interval(2, 2)})) == "{i=[2,2], j=[0,1]}"

    def test_saturating_arithmetic(self):
        big = Interval(POS_INF - 1, POS_INF - 1)
        assert itv_add(big, Interval(5, 5)) == Interval(POS_INF, POS_INF)
        assert itv_neg(Interval(NEG_INF, 0)) == Interval(0, POS_INF)
        assert itv_sub(Interval(0, 0), Interval(1, POS_INF)) == Interval(NEG_INF, -1)
        assert itv_mul(Interval(-3, 2), Interval(-1, 4)) == Interval(-12, 8)
        assert itv_mul(Interval(NEG_INF, 0), Interval(0, 0)) == Interval(0, 0)

    def test_bottom_entries(self):
        assert interval(3, 2) is BOT
        assert ptset([]) is BOT
        assert env({"i": BOT}) is BOT
        assert counter(0) is BOT
        with pytest.raises(ValueError):
            Interval(3, 2)

    def test_env_reads_top_for_unbound(self):
        e = env({"i": Interval(0, 1)})
        assert e.get("j", None) is None
        assert leq(e, EMPTY_ENV) and not leq(EMPTY_ENV, e)
        assert equal(env({"i": Interval(NEG_INF, POS_INF)}), EMPTY_ENV)

    def test_ptset_narrowing(self):
        a, b = ptset(["x", "y"]), ptset(["x"])
        assert narrow(a, b) == b
        assert narrow(b, ptset(["z"])) == b


CASES = 10_000


def _rand_bound(rng: random.Random) -> int:
    r = rng.random()
    if r < 0.1:
        return NEG_INF
    if r < 0.2:
        return POS_INF
    return rng.randint(-50, 50)


def rand_interval(rng: random.Random):
    a, b = sorted((_rand_bound(rng), _rand_bound(rng)))
    if a == POS_INF:
        a = 50
    if b == NEG_INF:
        b = -50
    return Interval(a, b)


def rand_value(rng: random.Random, kind: str):
    if rng.random() < 0.08:
        return BOT
    if kind == "itv":
        return rand_interval(rng)
    if kind == "pts":
        if rng.random() < 0.1:
            return PTS_TOP
        return ptset(rng.sample(["x", "y", "z", "main.p", "f.q"], rng.randint(1, 3)))
    names = rng.sample(["i", "j", "k"], rng.randint(0, 3))
    return env({n: rand_interval(rng) for n in names})


def rand_pairs(seed: int):
    rng = random.Random(seed)
    for i in range(CASES):
        kind = ("itv", "pts", "env")[i % 3]
        yield rand_value(rng, kind), rand_value(rng, kind)


def rand_thresholds(rng: random.Random):
    return sorted({rng.randint(-40, 40) for _ in range(rng.randint(0, 5))} | {NEG_INF, 0, POS_INF})


def check_join(a, b):
    j = join(a, b)
    assert leq(a, j) and leq(b, j)


def check_meet(a, b):
    m = meet(a, b)
    assert leq(m, a) and leq(m, b)


def check_widen_covers(a, b):
    assert leq(join(a, b), widen(a, b))


def check_narrow(a, b):
    n = narrow(a, b)
    assert leq(meet(a, b), n) and leq(n, a)


def check_strong(a, b, ts):
    b = meet(a, b)
    if b is BOT:
        b = a
    assert widen(a, b) == a
    assert threshold_widen(a, b, ts) == a


def check_chain(a0, bs, ts=None):
    a, changes = a0, 0
    for b in bs:
        nxt = widen(a, b) if ts is None else threshold_widen(a, b, ts)
        if nxt != a:
            changes += 1
        a = nxt
    if ts is None:
        # one change out of BOT, then each bound jumps at most once
        assert changes <= (3 if a0 is BOT else 2)
    else:
        assert changes <= 1 + 2 * len(ts)


class TestLawSweeps:
    """Each law over 10,000 seeded random cases."""

    @pytest.mark.parametrize("law,seed", [(check_join, 1), (check_meet, 2), (check_widen_covers, 3),
                                          (check_narrow, 4)],
                             ids=["join-bounds", "meet-bounds", "widen-covers-join", "narrow-bracketing"])
    def test_binary_law(self, law, seed):
        n = 0
        for a, b in rand_pairs(seed):
            law(a, b)
            n += 1
        assert n == CASES

    def test_strong_widening(self):
        rng = random.Random(7)
        for _ in range(CASES):
            check_strong(rand_interval(rng), rand_interval(rng), rand_thresholds(rng))

    def test_widening_chain_stabilizes(self):
        rng = random.Random(11)
        for i in range(CASES):
            a0 = BOT if i % 4 == 0 else rand_interval(rng)
            bs = [rand_interval(rng) for _ in range(rng.randint(1, 12))]
            check_chain(a0, bs)

    def test_threshold_chain_stabilizes(self):
        rng = random.Random(13)
        for _ in range(CASES):
            ts = rand_thresholds(rng)
            check_chain(rand_interval(rng), [rand_interval(rng) for _ in range(rng.randint(1, 12))], ts)


class TestLawsShrinking:
    """The same laws under hypothesis, for minimal counterexamples."""

    @HYP
    @given(pairs())
    def test_binary_laws(self, ab):
        for law in (check_join, check_meet, check_widen_covers, check_narrow):
            law(*ab)

    @HYP
    @given(intervals(), intervals(), thresholds)
    def test_strong_widening(self, a, b, ts):
        check_strong(a, b, ts)

    @HYP
    @given(itv_or_bot, st.lists(intervals(), min_size=1, max_size=12))
    def test_widening_chain(self, a0, bs):
        check_chain(a0, bs)

    @HYP
    @given(intervals(), st.lists(intervals(), min_size=1, max_size=12), thresholds)
    def test_threshold_widen(self, a, bs, ts):
        w = threshold_widen(a, bs[0], ts)
        assert leq(join(a, bs[0]), w)
        for bound in (w.lo, w.hi):
            assert bound in ts or bound in (a.lo, a.hi)
        check_chain(a, bs, ts)


class TestLexGas:
    def test_not_strong(self):
        a = LexGasValue(5, 0)
        assert leq(LexGasValue(3, 0), a)
        assert lex_widen(a, LexGasValue(3, 0)) != a

    def test_reluctant_pattern_grows_forever(self):
        """Two origins alternately catch up with g (joined, resetting the gas) and push past it (widened)."""
        rule = make_rule("reluctant", gas=3)
        rho: dict = {}

        def contribute(orig, n):
            rho.update(rule.update_globals(orig, {G: LexGasValue(n, 0)}, rho))
            return rho[G]

        contribute(X, 1)
        contribute(Y, 2)
        previous = rho[G]
        for n in range(2, 62):
            orig = X if n % 2 == 0 else Y
            assert contribute(orig, n) == previous  # subsumed: joined into cmap, g unchanged
            pushed = contribute(orig, n + 1)
            assert pushed == LexGasValue(n + 1, 1)  # strict growth, gas never runs out
            previous = pushed
