"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL  detail`` line (visible with
``pytest -s`` or in the summary of ``python3 tests/test_acceptance.py``).
"""

from __future__ import annotations

import json
import math
import os
import random
import subprocess
import sys
from contextlib import contextmanager

import pytest

from conftest import CORPUS, corpus_file, load_system, rho_prefix
from mixedflow.cli import main
from mixedflow.constraints import GlobalProcEntry, GlobalShared, UNIT
from mixedflow.frontend import PROVEN, check_asserts, gen_constraints, parse
from mixedflow.lattice import Interval, ptset
from mixedflow.oracle import SOUND, concrete_collect, soundness_check
from mixedflow.report import AnalysisConfig, compare_outcomes, run_analysis
from mixedflow.solvers import SolverConfig, solve, verify_post_solution
from mixedflow.synthetic import A, B, X, Y, register_synthetic_system
from mixedflow.update_rules import RULE_NAMES, check_rule_soundness, make_rule

RESULTS: dict = {}
MC_FILES = sorted(f for f in os.listdir(CORPUS) if f.endswith(".mc"))
# Rules with no termination guarantee on unbounded globals: a capped run may diverge.
NON_TERMINATING = {"join", "separate"}
# Worklist and top-down reach different (both sound) fixpoints here; see the ledger.
SOLVER_DISAGREEMENT = {("bounded_counter.mc", mode, rule, gc)
                       for mode in ("none", "full") for rule in ("localized", "reluctant") for gc in (False, True)}


@contextmanager
def criterion(capsys, number: int):
    detail = []
    try:
        yield detail
    except BaseException as exc:
        line = f"criterion {number}: FAIL  {exc!s}".splitlines()[0]
        raise
    else:
        line = f"criterion {number}: PASS  {'; '.join(detail)}"
    finally:
        RESULTS[number] = line
        with capsys.disabled():
            print("\n" + line)


def cli_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_criterion_1_incdec_rules(capsys):
    with criterion(capsys, 1) as d:
        expected = {"reluctant": "[-10,10]", "localized": "[-inf,10]", "widen-join": "[-inf,inf]"}
        for rule, want in expected.items():
            code, rep = cli_json(capsys, "analyze", corpus_file("incdec.mc"), "--rule", rule, "--gas", "3")
            assert code == 0 and rep["values"]["a"] == want, (rule, rep["values"]["a"])
            d.append(f"{rule}: a={want}")


def test_criterion_2_global_update(capsys):
    with criterion(capsys, 2) as d:
        expected = {"localized": ("[0,1]", "proven"), "widen-join": ("[0,inf]", "unproven"),
                    "apinis": ("[0,inf]", "unproven")}
        for rule, (val, verdict) in expected.items():
            _, rep = cli_json(capsys, "analyze", corpus_file("global_update.mc"), "--rule", rule)
            got = (rep["values"]["a"], rep["asserts"][0]["verdict"])
            assert got == (val, verdict), (rule, got)
            d.append(f"{rule}: a={val} {verdict}")


def test_criterion_3_factorial(capsys):
    with criterion(capsys, 3) as d:
        system = load_system("factorial.mc", "none")
        res = solve(system, SolverConfig(rule=make_rule("localized", gas=3)))
        assert [v.verdict for v in check_asserts(system, res)] == [PROVEN]
        i = res.rho[GlobalProcEntry("fac", UNIT)].get("i", None)
        assert i == Interval(0, 17), i
        d.append("unit: proven, (st_fac,•).i=[0,17]")
        system = load_system("factorial.mc", "full")
        res = solve(system, SolverConfig(rule=make_rule("localized", gas=3)))
        assert [v.verdict for v in check_asserts(system, res)] == [PROVEN]
        entry_switches = {k: n for k, n in res.stats.wn_switches.items()
                          if isinstance(k[0], GlobalProcEntry) and n}
        entry_widenings = {k: n for k, n in res.stats.widenings.items() if isinstance(k[0], GlobalProcEntry) and n}
        assert not entry_switches and not entry_widenings, (entry_switches, entry_widenings)
        d.append(f"full: proven, 0 W/N switches at {sum(isinstance(g, GlobalProcEntry) for g in res.rho)} entries")


def test_criterion_4_synthetic_divergence(capsys):
    with criterion(capsys, 4) as d:
        for solver in ("worklist", "topdown"):
            ok = solve(register_synthetic_system("ex43"),
                       SolverConfig(solver=solver, rule=make_rule("localized", gas=3), max_updates_per_global=200))
            assert ok.converged and ok.stats.total_global_updates <= 50, ok.stats.total_global_updates
            bad = solve(register_synthetic_system("ex43"),
                        SolverConfig(solver=solver, rule=make_rule("localized", gas=math.inf),
                                     max_updates_per_global=200))
            assert bad.verdict.render() == "Divergence(update cap at a)"
            assert rho_prefix(bad, X, A)[:12] == ["0", "1", "1", "inf", "3", "3", "inf", "5", "5", "inf", "7", "7"]
            assert rho_prefix(bad, Y, B)[:12] == ["0", "2", "2", "inf", "4", "4", "inf", "6", "6", "inf", "8", "8"]
            appb = solve(register_synthetic_system("appendixB"),
                         SolverConfig(solver=solver, rule=make_rule("apinis", gas=math.inf),
                                      max_updates_per_global=200))
            assert not appb.converged
            assert rho_prefix(appb, X, A)[:12] == ["0", "1", "1", "inf", "4", "4", "inf", "8", "8", "inf", "12", "12"]
        d.append(f"ex43 gas 3: {ok.stats.total_global_updates} updates; gas inf: {bad.verdict.render()}, "
                 f"12-entry prefixes match; appendixB: {appb.verdict.render()}")


def test_criterion_5_non_strong_widening(capsys):
    with criterion(capsys, 5) as d:
        for solver in ("worklist", "topdown"):
            def cfg():
                return SolverConfig(solver=solver, rule=make_rule("reluctant", gas=3), max_updates_per_global=200)
            lex = solve(register_synthetic_system("appendixC_lex"), cfg())
            itv = solve(register_synthetic_system("appendixC_interval"), cfg())
            assert lex.verdict.render() == "Divergence(update cap at g)", lex.verdict.render()
            assert itv.converged
        d.append(f"lex: {lex.verdict.render()}; interval: converged")


def test_criterion_6_garbage_collection(capsys):
    with criterion(capsys, 6) as d:
        _, rep = cli_json(capsys, "analyze", corpus_file("dead_direct.mc"), "--rule", "localized", "--gc")
        assert rep["asserts"][0]["verdict"] == "proven" and rep["values"]["a"] == "{zero}", rep["values"]
        system = load_system("dead_direct.mc")
        assert solve(system, SolverConfig(rule=make_rule("localized", gc=True))).rho[GlobalShared("a")] == \
            ptset(["zero"])
        _, rep = cli_json(capsys, "analyze", corpus_file("dead_direct.mc"), "--rule", "localized")
        assert rep["asserts"][0]["verdict"] == "unproven"
        d.append("dead_direct: +gc proven a={zero}, without gc unproven")
        base = ["analyze", corpus_file("dead_indirect.mc"), "--context", "full", "--solver", "topdown",
                "--rule", "localized", "--gc"]
        _, rep = cli_json(capsys, *base)
        assert rep["asserts"][0]["verdict"] == "proven"
        _, rep = cli_json(capsys, *base, "--no-requery")
        assert rep["asserts"][0]["verdict"] == "unproven" and rep["stats"]["trash_entries"] >= 1
        assert any("k=[0,inf]" in t for t in rep["stats"]["trash"]), rep["stats"]["trash"]
        d.append(f"dead_indirect: requery proven; --no-requery unproven, trash {rep['stats']['trash']}")


def test_criterion_7_soundness_suite(capsys):
    with criterion(capsys, 7) as d:
        assert len(MC_FILES) >= 12
        runs = diverged = 0
        violations, unexpected_div, disagreements = [], [], set()
        for name in MC_FILES:
            program = parse(open(corpus_file(name), encoding="utf-8").read())
            reach = concrete_collect(program, max_states=50_000)
            for mode in ("none", "full"):
                for rule in RULE_NAMES:
                    for gc in (False, True):
                        verdicts = {}
                        for solver in ("worklist", "topdown"):
                            system = gen_constraints(program, mode)
                            res = solve(system, SolverConfig(solver=solver, rule=make_rule(rule, gas=3, gc=gc),
                                                             max_updates_per_global=1000))
                            runs += 1
                            tag = (name, mode, solver, rule, gc)
                            if str(check_rule_soundness(res.trace)) != "Pass":
                                violations.append((tag, "rule"))
                            if not res.converged:
                                diverged += 1
                                if rule not in NON_TERMINATING:
                                    unexpected_div.append(tag)
                                continue
                            if not verify_post_solution(system, res).ok:
                                violations.append((tag, "post"))
                            if soundness_check(reach, res, system) is not SOUND:
                                violations.append((tag, "oracle"))
                            verdicts[solver] = tuple(v.verdict for v in check_asserts(system, res))
                        if len(verdicts) == 2 and verdicts["worklist"] != verdicts["topdown"]:
                            disagreements.add((name, mode, rule, gc))
        assert not violations, violations[:5]
        assert not unexpected_div, unexpected_div[:5]
        assert disagreements == SOLVER_DISAGREEMENT, disagreements ^ SOLVER_DISAGREEMENT
        d.append(f"{len(MC_FILES)} programs, {runs} runs, 0 violations")
        d.append(f"{diverged} capped runs of join/separate diverged (R1/R2 still checked)")


def test_criterion_8_lattice_laws(capsys):
    import test_lattice as L

    with criterion(capsys, 8) as d:
        laws = {"join-bounds": L.check_join, "meet-bounds": L.check_meet, "widen-covers-join": L.check_widen_covers,
                "narrow-bracketing": L.check_narrow}
        for seed, (name, law) in enumerate(laws.items(), start=101):
            n = 0
            for a, b in L.rand_pairs(seed):
                law(a, b)
                n += 1
            assert n == L.CASES, name
        rng = random.Random(107)
        for _ in range(L.CASES):
            L.check_strong(L.rand_interval(rng), L.rand_interval(rng), L.rand_thresholds(rng))
        rng = random.Random(111)
        for i in range(L.CASES):
            L.check_chain(L.BOT if i % 4 == 0 else L.rand_interval(rng),
                          [L.rand_interval(rng) for _ in range(rng.randint(1, 12))])
        d.append(f"{L.CASES} cases each: {', '.join(laws)}, strong-widening, chain stabilization")


def test_criterion_9_precision_metric(capsys):
    from mixedflow.report import compare_assignments, net_improvement

    with criterion(capsys, 9) as d:
        rng = random.Random(9)
        for _ in range(2000):
            n, m, k = rng.randint(0, 50), rng.randint(0, 50), rng.randint(0, 50)
            net = net_improvement(n, m, k)
            assert net == ((n - m) / (n + m + k) if n + m + k else 0.0)
        gs = [GlobalShared(f"g{i}") for i in range(8)]
        for _ in range(500):
            def rand_rho():
                return {g: Interval(lo, lo + rng.randint(0, 3)) for g in gs if rng.random() < 0.7
                        for lo in [rng.randint(-2, 2)]}
            ra, rb = rand_rho(), rand_rho()
            ab, ba = compare_assignments(ra, rb, gs), compare_assignments(rb, ra, gs)
            assert (ab.n, ab.m, ab.k) == (ba.m, ba.n, ba.k) and ab.net == -ba.net
        pad = compare_assignments({}, {gs[0]: Interval(0, 0)}, [gs[0]])
        assert (pad.n, pad.m, pad.k) == (1, 0, 0)
        a = run_analysis(corpus_file("global_update.mc"), AnalysisConfig(rule="localized"))
        b = run_analysis(corpus_file("global_update.mc"), AnalysisConfig(rule="widen-join"))
        cmp = compare_outcomes(a, b, "shared-globals")
        assert cmp.n >= 1 and cmp.m == 0
        d.append(f"net/symmetry/padding hold; global_update localized vs widen-join: n={cmp.n} m={cmp.m}")


DETERMINISM_SCRIPT = """
import io, os, sys, contextlib
from mixedflow.cli import main
corpus = sys.argv[1]
for cfg in (["--rule", "reluctant"], ["--rule", "localized", "--gc", "--context", "full"]):
    for name in sorted(os.listdir(corpus)):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            main(["analyze", os.path.join(corpus, name), "--format", "json", *cfg])
        sys.stdout.write(buf.getvalue())
"""


def test_criterion_10_determinism(capsys):
    with criterion(capsys, 10) as d:
        outputs = []
        for seed in ("1", "2", "3"):
            env = dict(os.environ, PYTHONHASHSEED=seed)
            proc = subprocess.run([sys.executable, "-c", DETERMINISM_SCRIPT, str(CORPUS)], env=env,
                                  capture_output=True, check=True)
            lines = [ln for ln in proc.stdout.split(b"\n") if b'"wall_time_s"' not in ln]
            outputs.append(b"\n".join(lines))
        assert outputs[0] == outputs[1] == outputs[2]
        n = len(os.listdir(CORPUS))
        d.append(f"{2 * n} reports byte-identical across 3 processes with distinct hash seeds")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
