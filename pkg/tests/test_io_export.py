from __future__ import annotations

import json

import pytest

from ptrgraph.errors import SchemaViolation, UnsupportedVersion
from ptrgraph.graphs import isomorphic
from ptrgraph.io_export import (
    config_from_json,
    config_to_json,
    from_json,
    graph_digest,
    session_from_json,
    session_to_json,
    to_dot,
    to_json,
    trace_to_json,
)
from ptrgraph.model import build_start_graph, build_type_graph, demo_declarations
from ptrgraph.graphs import InstanceGraph
from ptrgraph.simulator import SimConfig, new_session, run, step, what_if_matches

PROGRAM = "s=*age;\nagep=age;\nagep= &age[3];\n*maxp=t;"


def test_graph_roundtrip_exact(start_graph):
    g, _ = start_graph
    doc = to_json(g)
    g2 = from_json(doc)
    assert isomorphic(g, g2)
    assert to_json(g2) == doc
    assert g2.next_id == g.next_id


def test_from_json_rejects_bad_version(start_graph):
    g, _ = start_graph
    doc = to_json(g)
    doc["version"] = 2
    with pytest.raises(UnsupportedVersion):
        from_json(doc)


def test_from_json_rejects_dangling_edge():
    doc = {
        "version": 1,
        "typeGraph": "pointer",
        "nodes": [{"id": 0, "type": "Pointer", "attrs": {}}],
        "edges": [{"id": 1, "label": "ref", "src": 0, "tgt": 99}],
    }
    with pytest.raises(SchemaViolation):
        from_json(doc)


def test_from_json_rejects_ill_typed_edge():
    doc = {
        "version": 1,
        "typeGraph": "pointer",
        "nodes": [
            {"id": 0, "type": "Pointer", "attrs": {}},
            {"id": 1, "type": "Pointer", "attrs": {}},
        ],
        "edges": [{"id": 2, "label": "ref", "src": 0, "tgt": 1}],
    }
    with pytest.raises(SchemaViolation):
        from_json(doc)


def test_from_json_rejects_duplicate_ids():
    doc = {
        "version": 1,
        "typeGraph": "pointer",
        "nodes": [
            {"id": 0, "type": "Pointer", "attrs": {}},
            {"id": 0, "type": "Pointer", "attrs": {}},
        ],
        "edges": [],
    }
    with pytest.raises(SchemaViolation):
        from_json(doc)


def test_digest_is_stable_and_content_sensitive(start_graph):
    g, env = start_graph
    assert graph_digest(g) == graph_digest(g)
    g2 = g.set_attr(env["s"], "val", 1)
    assert graph_digest(g) != graph_digest(g2)
    assert graph_digest(g) == graph_digest(json.loads(json.dumps(to_json(g))))


def test_dot_deterministic_and_styled(start_graph):
    g, _ = start_graph
    assert to_dot(g) == to_dot(g)
    trace = run(demo_declarations(), "s=*age;", config=SimConfig(address_pool=2))
    dot = to_dot(trace.states[1], trace.steps[0].diff)
    assert '"#1a7f37"' in dot  # updated element rendered green
    assert "val=30" in dot


def test_dot_golden_small_graph():
    g = InstanceGraph(build_type_graph())
    g, p = g.add_node("Pointer")
    g, a = g.add_node("Address", {"free": False})
    g, _ = g.add_edge(p, "ref", a)
    expected = (
        'digraph "memory" {\n'
        "  rankdir=LR;\n"
        '  node [fontname="Helvetica", fontsize=11];\n'
        '  edge [fontname="Helvetica", fontsize=10];\n'
        '  n0 [label="Pointer", shape=ellipse];\n'
        '  n1 [label="Address\\nfree=false", shape=box];\n'
        '  n0 -> n1 [label="ref"];\n'
        "}\n"
    )
    assert to_dot(g) == expected


def test_dot_renders_deleted_ghosts():
    session = new_session(demo_declarations(), SimConfig(address_pool=2))
    step(session, "agep = age;")
    step(session, "agep = &age[3];")  # erases the old ref edge
    last = session.history[-1]
    dot = to_dot(session.graph, last.diff)
    assert '"#1f6feb"' in dot  # blue dashed ghost for the deleted edge


def test_trace_json_schema(start_graph):
    trace = run(
        demo_declarations(),
        PROGRAM + '\nprintf("%i", s);',
        config=SimConfig(address_pool=2),
    )
    doc = trace_to_json(trace)
    assert doc["version"] == 1
    assert len(doc["states"]) == len(doc["steps"]) + 1
    assert doc["digests"][0] == graph_digest(trace.states[0])
    assert doc["steps"][0]["rule"] == "copyReferent"
    assert doc["steps"][0]["from"] == 0 and doc["steps"][0]["to"] == 1
    assert doc["transcript"] == ["30"]
    assert doc["error"] is None
    json.dumps(doc)  # fully serializable


def test_config_roundtrip():
    config = SimConfig(
        address_pool=3, strict_c=True, materialize_addresses=True, ignore_names=True
    )
    assert config_from_json(config_to_json(config)) == config


def test_session_persistence_roundtrip():
    session = new_session(
        demo_declarations(), SimConfig(address_pool=2), input_stream=[9]
    )
    step(session, "agep = age;")
    step(session, 'scanf("%i", agep);')
    step(session, 'printf("%i", *agep);')
    doc = json.loads(json.dumps(session_to_json(session)))
    restored = session_from_json(doc)
    assert isomorphic(restored.graph, session.graph)
    assert restored.env == session.env
    assert restored.transcript == session.transcript
    assert restored.input_pos == session.input_pos
    assert [s.statement_text for s in restored.history] == [
        s.statement_text for s in session.history
    ]
    # the restored session keeps working (two ref-bearing pointers, two targets)
    assert len(what_if_matches(restored, "copyReferent")) == 4
    step(restored, "s = *agep;")
    assert restored.graph.nodes[restored.env["s"]].attrs["val"] == 9
