"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v`` (the verdict lines bypass
pytest's capture so they always appear). Every tolerance is exact integer /
set equality; the randomized suites are seeded and sized as stated.
"""

from __future__ import annotations

import random
import time

import pytest

from oracles import (
    CONSTRAINT_ORACLES,
    FlatMemory,
    bf_rule_matches,
    bf_state_count,
    engine_snapshot,
    oracle_wellformed,
    random_program,
    random_wf_graph,
)
from ptrgraph.constraints import (
    RI_FORMULA,
    WF_FORMULA,
    catalog as constraint_catalog,
    check_referential_integrity,
    check_wellformed,
)
from ptrgraph.errors import PtrGraphError, SourceError
from ptrgraph.frontend import parse_statement
from ptrgraph.graphs import InstanceGraph
from ptrgraph.io_export import graph_digest
from ptrgraph.model import (
    build_start_graph,
    build_type_graph,
    demo_declarations,
    rule_catalog,
)
from ptrgraph.rewrite import find_matches, rewrite
from ptrgraph.simulator import (
    SimConfig,
    apply_what_if,
    explore,
    model_check,
    new_session,
    run,
    step,
)

PROGRAM = "s=*age;\nagep=age;\nagep= &age[3];\n*maxp=t;"


@pytest.fixture()
def clock():
    t0 = time.perf_counter()
    yield lambda: time.perf_counter() - t0


@pytest.fixture()
def announce(capfd):
    """Print a criterion verdict line that survives pytest's capture."""

    def _announce(name: str, elapsed: float) -> None:
        with capfd.disabled():
            print(f"ACCEPTANCE PASS {name} ({elapsed:.2f}s)")

    return _announce


def test_acceptance_start_graph_golden(clock, announce):
    g, env = build_start_graph(demo_declarations(), 2)

    arrays = g.nodes_of_type("Array")
    pointers = [n for n in g.nodes.values() if n.type_name == "Pointer"]
    ints = [n for n in g.nodes.values() if n.type_name == "Int"]
    addresses = [n for n in g.nodes.values() if n.type_name == "Address"]
    assert len(arrays) == 1 and arrays[0].attrs["len"] == 4
    fst_edges = [e for e in g.edges.values() if e.label == "fst"]
    assert len(fst_edges) == 1
    refs = {e.src for e in g.edges.values() if e.label == "ref"}
    null_pointers = [p for p in pointers if p.id not in refs]
    assert len(null_pointers) == 2
    assert {p.id for p in null_pointers} == {env["agep"], env["maxp"]}
    assert len(ints) == 6
    assert sorted(n.attrs["val"] for n in ints) == [0, 0, 23, 30, 41, 65]
    assert len(addresses) == 6
    allocated = [a for a in addresses if not a.attrs["free"]]
    free = [a for a in addresses if a.attrs["free"]]
    assert len(allocated) == 4 and len(free) == 2
    # both regions are succ-chained
    succ = {e.src: e.tgt for e in g.edges.values() if e.label == "succ"}
    alloc_ids = {a.id for a in allocated}
    free_ids = {a.id for a in free}
    assert sum(1 for s, t in succ.items() if s in alloc_ids and t in alloc_ids) == 3
    assert sum(1 for s, t in succ.items() if s in free_ids and t in free_ids) == 1

    assert all(r.holds for r in check_wellformed(g))
    assert all(r.holds for r in check_referential_integrity(g))

    elapsed = clock()
    assert elapsed < 1.0
    announce("start-graph golden test", elapsed)


def test_acceptance_simulation_trace_golden(clock, announce):
    trace = run(demo_declarations(), PROGRAM, config=SimConfig(address_pool=2))
    assert trace.error is None
    assert [s.rule_name for s in trace.steps] == [
        "copyReferent",
        "nullPointerReferent",
        "pointerAssignedNewAddress",
        "nullPointerInt",
    ]
    g, env = trace.final_state, trace.env
    assert g.nodes[env["s"]].attrs["val"] == 30

    def referent_val(ptr_id: int) -> tuple[int, bool]:
        addr = next(e.tgt for e in g.edges.values() if e.label == "ref" and e.src == ptr_id)
        obj = next(e.tgt for e in g.edges.values() if e.label == "cont" and e.src == addr)
        return g.nodes[obj].attrs["val"], g.nodes[addr].attrs["free"]

    agep_val, _ = referent_val(env["agep"])
    assert agep_val == 23
    maxp_val, maxp_free = referent_val(env["maxp"])
    assert maxp_val == 0 and maxp_free is False
    # the address maxp took over was free in the start state
    maxp_addr = next(
        e.tgt for e in g.edges.values() if e.label == "ref" and e.src == env["maxp"]
    )
    assert trace.states[0].nodes[maxp_addr].attrs["free"] is True

    assert model_check(trace, WF_FORMULA).holds
    assert model_check(trace, RI_FORMULA).holds

    elapsed = clock()
    assert elapsed < 1.0
    announce("simulation trace golden test", elapsed)


def _empty() -> InstanceGraph:
    return InstanceGraph(build_type_graph())


def test_acceptance_constraint_witness_suite(clock, announce):
    cat = constraint_catalog()

    # archetype 1: double fst
    g, a = _empty().add_node("Array", {"len": 1})
    g, p1 = g.add_node("Pointer")
    g, p2 = g.add_node("Pointer")
    g, _ = g.add_edge(a, "fst", p1)
    g, _ = g.add_edge(a, "fst", p2)
    report = cat["notWFfstToV"].report(g)
    assert not report.holds
    w = report.witness
    assert w["a"] == a and {w["p1"], w["p2"]} == {p1, p2} and w["p1"] != w["p2"]
    # negative archetype: a single fst edge passes
    ok, a2 = _empty().add_node("Array", {"len": 1})
    ok, q = ok.add_node("Pointer")
    ok, _ = ok.add_edge(a2, "fst", q)
    assert cat["notWFfstToV"].report(ok).holds and cat["isWFfstEx"].report(ok).holds

    # archetype 2: pointer to a free address
    g, p = _empty().add_node("Pointer")
    g, addr = g.add_node("Address", {"free": True})
    g, _ = g.add_edge(p, "ref", addr)
    report = cat["notRIrefTofree"].report(g)
    assert not report.holds and report.witness == {"p": p, "a": addr}

    # archetype 3: pointer to an address holding nothing (allocated)
    g, p = _empty().add_node("Pointer")
    g, addr = g.add_node("Address", {"free": False})
    g, _ = g.add_edge(p, "ref", addr)
    report = cat["notRIrefWOcont"].report(g)
    assert not report.holds and report.witness == {"p": p, "a": addr}
    assert cat["notRIrefTofree"].report(g).holds
    # negative archetype: content restores integrity
    g, x = g.add_node("Int")
    g, _ = g.add_edge(addr, "cont", x)
    assert cat["notRIrefWOcont"].report(g).holds

    # archetype 4: succ cycle
    g, a1 = _empty().add_node("Address")
    g, b1 = g.add_node("Address")
    g, _ = g.add_edge(a1, "succ", b1)
    g, _ = g.add_edge(b1, "succ", a1)
    report = cat["isWFsuccChain"].report(g)
    assert not report.holds and report.witness["address"] in (a1, b1)
    # negative archetype: a plain chain passes
    g2, c1 = _empty().add_node("Address")
    g2, c2 = g2.add_node("Address")
    g2, _ = g2.add_edge(c1, "succ", c2)
    assert cat["isWFsuccChain"].report(g2).holds

    # exact agreement with the direct enumeration oracles on random graphs
    rng = random.Random(31)
    checked = 0
    for _ in range(200):
        g = random_wf_graph(rng, max_nodes=12)
        if rng.random() < 0.5 and g.nodes:
            nodes = sorted(g.nodes)
            a, b = rng.choice(nodes), rng.choice(nodes)
            ta, tb = g.nodes[a].type_name, g.nodes[b].type_name
            for label in ("succ", "ref", "cont", "fst"):
                if g.type_graph.edge_type_for(label, ta, tb):
                    g, _ = g.add_edge(a, label, b)
                    break
        for name, oracle in CONSTRAINT_ORACLES.items():
            assert cat[name].satisfied(g) == oracle(g), name
            checked += 1
    assert checked == 200 * len(CONSTRAINT_ORACLES)

    elapsed = clock()
    announce("constraint witness suite", elapsed)


def test_acceptance_match_oracle_equivalence(clock, announce):
    rng = random.Random(97)
    cat = rule_catalog()
    graphs = [random_wf_graph(rng, max_nodes=12) for _ in range(500)]
    for g in graphs:
        for rule in cat.values():
            got = [m.node_map for m in find_matches(g, rule)]
            expected = bf_rule_matches(g, rule)
            assert got == expected, rule.name
    elapsed = clock()
    assert elapsed < 60.0
    announce(f"match-oracle equivalence (500 graphs x {len(cat)} rules)", elapsed)


def test_acceptance_interpreter_oracle_equivalence(clock, announce):
    rng = random.Random(4242)
    n_programs = 1000
    for i in range(n_programs):
        prog = random_program(rng, max_len=10)
        oracle = FlatMemory(prog.decls, prog.input_stream, pool=8)
        for line in prog.lines:
            oracle.exec(parse_statement(line))
        trace = run(
            prog.decls,
            "\n".join(prog.lines),
            input_stream=prog.input_stream,
            config=SimConfig(address_pool=8),
        )
        assert trace.error is None, (i, prog.lines, trace.error)
        got = engine_snapshot(trace.final_state, trace.env, prog.decls)
        assert got == oracle.snapshot(), (i, prog.lines)
        assert trace.transcript == oracle.transcript, (i, prog.lines)
    elapsed = clock()
    assert elapsed < 60.0
    announce(f"interpreter-oracle equivalence ({n_programs} programs)", elapsed)


TABLE_ANSWERS = [
    "agep = age;",
    "s = *agep;",
    "*agep = age[1];",
    "maxp = agep;",
    "*agep = (age[1]+age[3])/2;",
    'scanf( "%i", &age[2] );',
    'scanf( "%i", agep );',
    'printf( "%i", *agep );',
]

TABLE_QUESTIONS = [
    "agep = age;",
    "s = agep;",
    "*agep = age[];",
    "maxp = agep;",
    "agep = (age[]+age[])/2;",
    'scanf( "%hi", age[] );',
    'scanf( "%hi", agep );',
    'printf( "%hi", agep );',
]


def test_acceptance_exercise_corpus(clock, announce):
    # all eight answer statements parse
    for text in TABLE_ANSWERS:
        parse_statement(text)

    # executing a-h with input [99, 7] completes; transcript equals oracle's
    trace = run(
        demo_declarations(),
        "\n".join(TABLE_ANSWERS),
        input_stream=[99, 7],
        config=SimConfig(address_pool=2),
    )
    assert trace.error is None
    oracle = FlatMemory(demo_declarations(), [99, 7], pool=2)
    for text in TABLE_ANSWERS:
        oracle.exec(parse_statement(text))
    assert trace.transcript == oracle.transcript == ["7"]
    assert engine_snapshot(trace.final_state, trace.env, trace.decls) == oracle.snapshot()

    # each question statement is either flagged with a typed error or is
    # demonstrably equivalent to its answer (three are already correct)
    flagged: dict[int, str] = {}
    equivalent: list[int] = []
    for idx, (question, answer) in enumerate(zip(TABLE_QUESTIONS, TABLE_ANSWERS)):
        prefix = TABLE_ANSWERS[:idx]
        session = new_session(
            demo_declarations(), SimConfig(address_pool=2), input_stream=[99, 7]
        )
        for text in prefix:
            step(session, text)
        try:
            result = step(session, question)
        except PtrGraphError as exc:
            flagged[idx] = exc.kind
            continue
        # ran without error: must be equivalent to the answer's effect
        answer_session = new_session(
            demo_declarations(), SimConfig(address_pool=2), input_stream=[99, 7]
        )
        for text in prefix:
            step(answer_session, text)
        expected = step(answer_session, answer)
        assert graph_digest(result.graph) == graph_digest(expected.graph), idx
        assert answer_session.transcript == session.transcript
        equivalent.append(idx)

    assert sorted(flagged) == [1, 2, 4, 5, 7]  # b, c, e, f, h
    assert flagged[1] == "TypeMismatch"  # s = agep;
    assert flagged[2] == "SyntaxError"  # *agep = age[];
    assert flagged[4] == "SyntaxError"  # agep = (age[]+age[])/2;
    assert flagged[5] == "SyntaxError"  # scanf("%hi", age[]);
    assert flagged[7] == "TypeMismatch"  # printf("%hi", agep);
    assert equivalent == [0, 3, 6]  # a, d identical; g differs only in width

    elapsed = clock()
    announce("exercise corpus (8 answers + 8 questions)", elapsed)


def test_acceptance_wf_invariance_under_random_sequences(clock, announce):
    rng = random.Random(271828)
    rule_names = sorted(rule_catalog())
    for seq in range(200):
        session = new_session(demo_declarations(), SimConfig(address_pool=2))
        ri_breaking_steps: list[int] = []
        for k in range(rng.randint(1, 20)):
            name = rng.choice(rule_names)
            from ptrgraph.simulator import what_if_matches

            matches = what_if_matches(session, name)
            if not matches:
                continue
            choice = rng.randrange(len(matches))
            params = (
                {"value": rng.randint(0, 99)}
                if rule_catalog()[name].params
                else None
            )
            pre_ri_ok = all(
                r.holds for r in check_referential_integrity(session.graph)
            )
            result = apply_what_if(session, name, choice, params)
            # well-formedness is invariant, checked two ways
            assert oracle_wellformed(session.graph), (seq, k, name)
            wf_reports = [
                r
                for r in result.reports
                if r.constraint.startswith(("isWF", "notWF"))
            ]
            assert all(r.holds for r in wf_reports), (seq, k, name)
            post_ri_ok = all(
                r.holds for r in check_referential_integrity(session.graph)
            )
            if pre_ri_ok and not post_ri_ok:
                ri_breaking_steps.append(len(session.history) - 1)
                # the violation is reported on the step that introduced it
                ri_reports = [
                    r for r in result.reports if r.constraint.startswith("notRI")
                ]
                assert any(not r.holds for r in ri_reports), (seq, k, name)
        final_ri_ok = all(
            r.holds for r in check_referential_integrity(session.graph)
        )
        if not final_ri_ok:
            assert ri_breaking_steps, seq  # damage never appears untracked
    elapsed = clock()
    announce("WF invariance over 200 random rule sequences", elapsed)


def test_acceptance_exploration_state_count(clock, announce):
    start, _ = build_start_graph([], 0)
    lts = explore(start, ["newInt", "newPointer"], 3)
    cat = rule_catalog()
    expected = bf_state_count(start, [cat["newInt"], cat["newPointer"]], 3)
    assert len(lts.states) == expected
    elapsed = clock()
    announce(
        f"exploration state count ({len(lts.states)} states == brute force)", elapsed
    )
