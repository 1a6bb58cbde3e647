from __future__ import annotations

import math

import pytest

from mixedflow.constraints import GlobalShared, LocalPoint, UNIT
from mixedflow.lattice import BOT, POS_INF, NEG_INF, Interval, ptset
from mixedflow.update_rules import (NARROW, PASS, RULE_NAMES, TraceEntry, WIDEN, check_rule_soundness,
                                    make_rule, parse_gas, wrap_bottom)

G = GlobalShared("g")
H = GlobalShared("h")
X, Y = LocalPoint(1, UNIT), LocalPoint(2, UNIT)


def I(lo, hi=None):
    return Interval(lo, lo if hi is None else hi)


class Driver:
    """Feeds contributions to a rule and applies its updates, like a hosting solver."""

    def __init__(self, rule):
        self.rule = rule
        self.rho = {}
        self.trace = []

    def send(self, orig, contribs):
        before = dict(self.rho)
        updates = self.rule.update_globals(orig, contribs, self.rho)
        self.trace.append(TraceEntry(orig, dict(contribs), before, dict(updates)))
        self.rho.update(updates)
        return updates


class TestNonCMapRules:
    def test_baseline_join_then_widen(self):
        d = Driver(make_rule("baseline"))
        assert d.send(X, {G: I(0)}) == {G: I(0)}
        assert d.send(X, {G: I(1)}) == {G: I(0, 1)}
        assert d.send(X, {G: I(0, 2)}) == {G: I(0, POS_INF)}
        assert d.send(Y, {G: I(5)}) == {}

    def test_join(self):
        d = Driver(make_rule("join"))
        d.rho[G] = I(0)
        assert d.rule.update_globals(X, {G: I(1)}, d.rho) == {G: I(0, 1)}
        assert d.rule.update_globals(X, {G: I(0)}, d.rho) == {}

    def test_widen_join(self):
        rule = make_rule("widen-join")
        assert rule.update_globals(X, {G: I(1)}, {G: I(0)}) == {G: I(0, POS_INF)}
        assert rule.update_globals(X, {G: I(0)}, {G: I(0, 3)}) == {}


class TestSeparate:
    def test_sole_origin_shrinks(self):
        d = Driver(make_rule("separate"))
        d.send(X, {G: I(0, 5)})
        assert d.send(X, {G: I(0, 2)}) == {G: I(0, 2)}

    def test_join_of_origins(self):
        d = Driver(make_rule("separate"))
        d.send(X, {G: I(0, 1)})
        assert d.send(Y, {G: I(3, 4)}) == {G: I(0, 4)}
        assert d.send(Y, {G: I(3, 4)}) == {}


class TestApinis:
    def test_two_origins_widen(self):
        d = Driver(make_rule("apinis", gas=math.inf))
        assert d.send(X, {G: I(0)}) == {G: I(0)}
        assert d.send(Y, {G: I(1)}) == {G: I(0, POS_INF)}
        assert d.send(Y, {G: I(1)}) == {}

    def test_narrow_keeps_finite_bounds(self):
        d = Driver(make_rule("apinis", gas=math.inf))
        d.send(X, {G: I(0, 5)})
        assert d.send(X, {G: I(1, 3)}) == {}
        assert d.rho[G] == I(0, 5)

    def test_disjoint_smaller_contribution_widens(self):
        # [3,3] is not below [5,5], so this takes the widening branch
        d = Driver(make_rule("apinis", gas=math.inf))
        d.send(X, {G: I(5)})
        assert d.send(X, {G: I(3)}) == {G: I(NEG_INF, 5)}


class TestLocalized:
    def test_distinct_origins_join(self):
        d = Driver(make_rule("localized"))
        d.send(X, {G: I(0)})
        d.send(Y, {G: I(1)})
        assert d.rho[G] == I(0, 1)
        assert not d.rule.widenings

    def test_recursive_site_widens_then_narrows(self):
        rule = make_rule("localized")
        d = Driver(rule)
        d.send(X, {G: I(16)})
        d.send(X, {G: I(15, 16)})
        assert rule.entry(G, X).value == I(NEG_INF, 16)
        d.send(X, {G: I(0, 16)})
        entry = rule.entry(G, X)
        assert entry.value == I(0, 16) and entry.phase == NARROW and entry.gas == 1

    def test_gas_bounds_switches(self):
        rule = make_rule("localized", gas=1)
        d = Driver(rule)
        d.send(X, {G: I(0)})
        d.send(X, {G: I(0, 1)})            # widen to [0,inf]
        d.send(X, {G: I(0, 5)})            # narrow, gas 1
        d.send(X, {G: I(0, 6)})            # widen again
        assert d.send(X, {G: I(0, 2)}) == {}  # gas exhausted
        assert rule.entry(G, X).value == I(0, POS_INF) and rule.entry(G, X).phase == WIDEN


class TestReluctant:
    def _primed(self, reluctant: bool):
        rule = make_rule("reluctant" if reluctant else "localized")
        d = Driver(rule)
        d.send(Y, {G: I(-10, 10)})
        d.send(X, {G: I(1, 10)})
        return rule, d

    def test_reluctant_joins_when_subsumed(self):
        rule, d = self._primed(True)
        d.send(X, {G: I(-9, 10)})
        assert rule.entry(G, X).value == I(-9, 10)
        assert d.rho[G] == I(-10, 10)

    def test_plain_localized_widens(self):
        rule, d = self._primed(False)
        d.send(X, {G: I(-9, 10)})
        assert rule.entry(G, X).value == I(NEG_INF, 10)

    def test_gas_exhausted_is_noop(self):
        rule = make_rule("reluctant", gas=0)
        d = Driver(rule)
        d.send(X, {G: I(0)})
        d.send(X, {G: I(0, 3)})
        before = rule.entry(G, X)
        assert d.send(X, {G: I(1, 2)}) == {}
        assert rule.entry(G, X) == before


class TestBottomWrapper:
    def test_withdrawn_globals_become_bottom(self):
        seen = []

        class Spy(type(make_rule("join"))):
            def update_globals(self, orig, contribs, rho):
                seen.append(dict(contribs))
                return {}

        rule = wrap_bottom(Spy())
        rule.update_globals(X, {G: I(0), H: I(1)}, {})
        rule.update_globals(X, {G: I(0, 1)}, {})
        assert seen[-1] == {G: I(0, 1), H: BOT}
        rule.update_globals(Y, {G: I(1)}, {})
        assert seen[-1] == {G: I(1)}

    def test_withdrawal_restores_points_to(self):
        a = GlobalShared("a")
        d = Driver(make_rule("localized", gc=True))
        d.send(LocalPoint(0, UNIT), {a: ptset(["zero"])})
        d.send(X, {a: ptset(["thread1.i"])})
        assert d.rho[a] == ptset(["thread1.i", "zero"])
        d.send(X, {})
        assert d.rho[a] == ptset(["zero"])
        assert check_rule_soundness(d.trace) is PASS


class TestSoundnessChecker:
    def test_empty_trace(self):
        assert check_rule_soundness([]) is PASS

    @pytest.mark.parametrize("name", RULE_NAMES)
    def test_rules_pass_on_driven_trace(self, name):
        d = Driver(make_rule(name))
        for orig, v in [(X, I(0)), (Y, I(1)), (X, I(0, 2)), (Y, I(1, 3)), (X, I(0, 1)), (Y, I(2))]:
            d.send(orig, {G: v})
        assert check_rule_soundness(d.trace) is PASS

    def test_dropped_live_contribution_is_r2(self):
        trace = [TraceEntry(X, {G: I(0)}, {}, {G: I(0)}),
                 TraceEntry(Y, {G: I(5)}, {G: I(0)}, {G: I(5)})]
        v = check_rule_soundness(trace)
        assert not v.ok and v.kind == "R2" and v.index == 1

    def test_missing_update_is_r1(self):
        v = check_rule_soundness([TraceEntry(X, {G: I(1)}, {}, {})])
        assert not v.ok and v.kind == "R1" and v.index == 0

    def test_s1_replay(self):
        trace = [TraceEntry(X, {G: I(0)}, {}, {G: I(0)}), TraceEntry(Y, {}, {G: I(3)}, {})]
        v = check_rule_soundness(trace)
        assert not v.ok and v.kind == "S1"


class TestConstruction:
    def test_names(self):
        for name in RULE_NAMES:
            assert make_rule(name).name == name
        assert make_rule("reluctant", gc=True).name == "reluctant+gc"
        with pytest.raises(ValueError):
            make_rule("bogus")

    def test_parse_gas(self):
        assert parse_gas("3") == 3
        assert parse_gas("inf") == math.inf
        with pytest.raises(ValueError):
            parse_gas("-1")
