from __future__ import annotations

import random

import pytest

from oracles import bf_rule_matches, random_wf_graph
from ptrgraph.dsl import parse_rule
from ptrgraph.errors import AnchorTypeMismatch, MissingParam, StaleMatch
from ptrgraph.graphs import InstanceGraph
from ptrgraph.model import build_start_graph, build_type_graph, demo_declarations
from ptrgraph.rewrite import apply_rule, find_matches, match_is_valid, rewrite


def empty():
    return InstanceGraph(build_type_graph())


def test_copy_referent_matches_on_start_graph(start_graph, catalog):
    g, env = start_graph
    matches = find_matches(g, catalog["copyReferent"])
    # one pointer has a ref edge; s and t are the only unaddressed ints
    assert len(matches) == 2
    assert {m.node_map["t"] for m in matches} == {env["s"], env["t"]}


def test_null_pointer_referent_anchored(start_graph, catalog):
    g, env = start_graph
    matches = find_matches(
        g, catalog["nullPointerReferent"], anchors={"p2": env["agep"]}
    )
    assert len(matches) == 1
    assert matches[0].node_map["p2"] == env["agep"]


def test_find_matches_empty_graph(catalog):
    assert find_matches(empty(), catalog["copyReferent"]) == []


def test_anchor_type_mismatch(start_graph, catalog):
    g, env = start_graph
    with pytest.raises(AnchorTypeMismatch):
        find_matches(g, catalog["copyReferent"], anchors={"p": env["s"]})
    with pytest.raises(AnchorTypeMismatch):
        find_matches(g, catalog["copyReferent"], anchors={"nope": env["s"]})


def test_apply_copy_referent_sets_value(start_graph, catalog):
    g, env = start_graph
    match = find_matches(g, catalog["copyReferent"], anchors={"t": env["s"]})[0]
    out = apply_rule(g, match)
    assert out.nodes[env["s"]].attrs["val"] == 30
    assert g.nodes[env["s"]].attrs["val"] == 0  # value semantics


def test_apply_new_int_on_empty(catalog):
    g = empty()
    match = find_matches(g, catalog["newInt"])[0]
    out = apply_rule(g, match)
    assert len(out.nodes) == 1
    node = next(iter(out.nodes.values()))
    assert node.type_name == "Int" and node.attrs["val"] == 0


def test_stale_match_after_conflicting_application(start_graph, catalog):
    g, env = start_graph
    rule = catalog["nullPointerReferent"]
    match = find_matches(g, rule, anchors={"p2": env["agep"]})[0]
    g2 = apply_rule(g, match)  # agep now refs an address: embargo violated
    assert not match_is_valid(g2, match)
    with pytest.raises(StaleMatch):
        apply_rule(g2, match)


def test_missing_param(start_graph, catalog):
    g, env = start_graph
    rule = catalog["ext:writeThroughPointer"]
    match = find_matches(g, rule)[0]
    with pytest.raises(MissingParam):
        apply_rule(g, match)
    out = apply_rule(g, match, {"value": 8})
    target = match.node_map["x"]
    assert out.nodes[target].attrs["val"] == 8


def test_application_locality(start_graph, catalog):
    g, env = start_graph
    rule = catalog["pointerAssignedNewAddress"]
    addr = g.nodes_of_type("Address")[3].id
    g1 = apply_rule(
        g,
        find_matches(g, catalog["nullPointerReferent"], anchors={"p2": env["agep"]})[0],
    )
    match = find_matches(g1, rule, anchors={"p": env["agep"], "a2": addr})[0]
    g2 = apply_rule(g1, match)
    touched = set(match.node_map.values())
    for nid, node in g1.nodes.items():
        if nid not in touched:
            assert g2.nodes[nid] is node  # untouched nodes are shared
    for eid, edge in g1.edges.items():
        if edge.src not in touched and edge.tgt not in touched:
            assert g2.edges[eid] is edge


def test_determinism_of_match_order(start_graph, catalog):
    g, _ = start_graph
    a = [m.node_map for m in find_matches(g, catalog["nullPointerInt"])]
    b = [m.node_map for m in find_matches(g, catalog["nullPointerInt"])]
    assert a == b
    keys = [tuple(m[pn.var] for pn in catalog["nullPointerInt"].match_nodes) for m in a]
    assert keys == sorted(keys)


def test_embargo_never_increases_matches(rng):
    base = parse_rule(
        "rule base\nnodes\n  keep p: Pointer\n  keep a: Address\n"
        "edges\n  keep p -ref-> a\n"
    )
    embargoed = parse_rule(
        "rule embargoed\nnodes\n  keep p: Pointer\n  keep a: Address\n  forbid o: Object\n"
        "edges\n  keep p -ref-> a\n  forbid a -cont-> o\n"
    )
    for _ in range(60):
        g = random_wf_graph(rng)
        n_base = len(find_matches(g, base))
        n_embargoed = len(find_matches(g, embargoed))
        assert n_embargoed <= n_base


def test_rewrite_diff_reports_all_effects(start_graph, catalog):
    g, env = start_graph
    match = find_matches(g, catalog["nullPointerInt"], anchors={"p": env["maxp"], "x": env["t"]})[0]
    result = rewrite(g, match)
    assert len(result.created_edges) == 2  # ref and cont
    assert result.updated_nodes == [match.node_map["a"]]  # free flipped
    assert result.deleted_nodes == [] and result.deleted_edges == []
    assert result.graph.nodes[match.node_map["a"]].attrs["free"] is False


def test_eraser_cascade_deletes_incident_edges():
    rule = parse_rule(
        "rule dropAddress\nanchor a: Address\nnodes\n  keep p: Pointer\n"
        "edges\n  keep p -ref-> a\n"
    )
    # build: p -ref-> a, a -cont-> x; deleting a must cascade the cont edge
    drop = parse_rule(
        "rule dropIt\nanchor p: Pointer\nnodes\n  del a: Address\nedges\n  del p -ref-> a\n"
    )
    g, p = empty().add_node("Pointer")
    g, a = g.add_node("Address", {"free": False})
    g, x = g.add_node("Int")
    g, _ = g.add_edge(p, "ref", a)
    g, cont_eid = g.add_edge(a, "cont", x)
    match = find_matches(g, drop, anchors={"p": p})[0]
    result = rewrite(g, match)
    assert a not in result.graph.nodes
    assert cont_eid not in result.graph.edges
    assert {e.id for e in result.deleted_edges} >= {cont_eid}
    assert x in result.graph.nodes


def test_alias_pair_allows_same_address(catalog):
    # p2 = p1 where both already point at the same address
    g, p1 = empty().add_node("Pointer")
    g, p2 = g.add_node("Pointer")
    g, a = g.add_node("Address", {"free": False})
    g, x = g.add_node("Int")
    g, _ = g.add_edge(a, "cont", x)
    g, _ = g.add_edge(p1, "ref", a)
    g, _ = g.add_edge(p2, "ref", a)
    matches = find_matches(g, catalog["pointerReferent"], anchors={"p1": p1, "p2": p2})
    assert len(matches) == 1
    out = apply_rule(g, matches[0])
    refs = out.out_edges(p2, "ref")
    assert len(refs) == 1 and refs[0].tgt == a


@pytest.mark.parametrize("rule_name", [
    "copyReferent", "newInt", "newPointer", "pointerReferent",
    "nullPointerReferent", "pointerAssignedNewAddress", "pointerArray",
    "pointerInt", "nullPointerInt", "ext:writeThroughPointer",
    "ext:readIntoAddress",
])
def test_matches_agree_with_brute_force_on_random_graphs(rule_name, catalog, rng):
    rule = catalog[rule_name]
    for _ in range(40):
        g = random_wf_graph(rng)
        got = [m.node_map for m in find_matches(g, rule)]
        expected = bf_rule_matches(g, rule)
        assert got == expected


def test_soundness_of_returned_matches(start_graph, catalog, rng):
    for rule in catalog.values():
        g, _ = start_graph
        for m in find_matches(g, rule):
            assert match_is_valid(g, m)
            # morphism structure: mapped edges connect mapped endpoints
            for idx, pe in enumerate(rule.match_edges):
                e = g.edges[m.edge_map[idx]]
                assert e.src == m.node_map[pe.src]
                assert e.tgt == m.node_map[pe.tgt]
                assert e.label == pe.label
