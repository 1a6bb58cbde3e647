from __future__ import annotations

import math

import pytest

from conftest import load_program, load_system
from mixedflow.constraints import GlobalShared
from mixedflow.frontend import UNREACHABLE, AssertVerdict, check_asserts, parse
from mixedflow.lattice import Interval
from mixedflow.oracle import SOUND, concrete_collect, soundness_check
from mixedflow.solvers import SolverConfig, solve
from mixedflow.update_rules import make_rule


def analyze(name, rule="reluctant", mode="none", gc=False):
    system = load_system(name, mode)
    return system, solve(system, SolverConfig(solver="topdown", rule=make_rule(rule, gc=gc)))


class TestCollect:
    def test_global_update(self):
        reach = concrete_collect(load_program("global_update.mc"))
        assert reach.globals["a"] == {0, 1} and not reach.exhausted

    def test_incdec_stays_in_bounds(self):
        reach = concrete_collect(load_program("incdec.mc"))
        assert not reach.exhausted
        assert reach.globals["a"] == set(range(-10, 11))

    def test_factorial(self):
        program = load_program("factorial.mc")
        reach = concrete_collect(program)
        assert math.factorial(17) in reach.globals["t"]
        site = program.asserts[0]
        assert reach.locals[site.node]["i"] == {0}
        assert site.index in reach.assert_reached and not reach.assert_violations.get(site.index)

    def test_escaped_locals_and_pointers(self):
        reach = concrete_collect(load_program("dead_direct.mc"))
        assert reach.globals["a"] == {"zero"}
        reach = concrete_collect(load_program("pointer_sum.mc"))
        assert reach.globals["total"] == {0, 1, 3, 6, 10}

    def test_budget_exhaustion(self):
        reach = concrete_collect(load_program("leapfrog.mc"), max_states=2000)
        assert reach.exhausted and reach.states >= 2000

    def test_assert_violation_recorded(self):
        program = parse("int a = 0; void thread1() { a = 5; } void thread2() { int v = a; assert(v == 0); }")
        reach = concrete_collect(program)
        assert reach.assert_violations[program.asserts[0].index] > 0

    def test_json_is_sorted(self):
        data = concrete_collect(load_program("global_update.mc")).to_json()
        assert data["globals"] == {"a": ["0", "1"]}


class TestSoundnessCheck:
    @pytest.mark.parametrize("name", ["incdec.mc", "factorial.mc", "dead_direct.mc", "nested_calls.mc"])
    def test_analysis_covers_oracle(self, name):
        system, res = analyze(name, gc=True)
        assert soundness_check(concrete_collect(system.program), res, system) is SOUND

    def test_shrunk_interval_is_violation(self):
        system, res = analyze("incdec.mc")
        res.rho[GlobalShared("a")] = Interval(-10, 9)
        v = soundness_check(concrete_collect(system.program), res, system)
        assert v.kind == "global" and v.where == "a" and v.concrete == "10"

    def test_false_unreachable_is_violation(self):
        system, res = analyze("factorial.mc")
        bogus = [AssertVerdict(s, UNREACHABLE) for s in system.program.asserts]
        v = soundness_check(concrete_collect(system.program), res, system, verdicts=bogus)
        assert v.kind == "assert"

    def test_bottom_node_is_violation(self):
        system, res = analyze("counting_loop.mc")
        for x in list(res.sigma):
            res.sigma.pop(x)
        v = soundness_check(concrete_collect(system.program), res, system, verdicts=check_asserts(system, res))
        assert v.kind == "node"
