"""Serialization: graph documents, trace documents, DOT rendering.

All formats carry ``version: 1``. Graph JSON round-trips losslessly
(ids included), so a reloaded session continues exactly where it stopped.
DOT output is deterministic (elements sorted by id) and uses the
simulator's colour convention: created elements bold green, deleted
elements ghosted dashed blue, forbidden elements dotted red.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Mapping

from ptrgraph.constraints import ConstraintReport
from ptrgraph.errors import PtrGraphError, SchemaViolation, UnsupportedVersion
from ptrgraph.graphs import Edge, InstanceGraph, Node
from ptrgraph.model import build_type_graph
from ptrgraph.simulator import Diff, SimConfig, Trace

VERSION = 1


# -- graph documents ------------------------------------------------------------


def to_json(g: InstanceGraph) -> dict:
    """GraphDocument for a snapshot; ids and the id counter are preserved."""
    return {
        "version": VERSION,
        "typeGraph": g.type_graph.name,
        "nextId": g.next_id,
        "nodes": [
            {"id": n.id, "type": n.type_name, "attrs": dict(n.attrs)}
            for n in sorted(g.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {"id": e.id, "label": e.label, "src": e.src, "tgt": e.tgt}
            for e in sorted(g.edges.values(), key=lambda e: e.id)
        ],
    }


def from_json(doc: Mapping[str, Any]) -> InstanceGraph:
    """Rebuild a snapshot from a GraphDocument; validates fully."""
    if not isinstance(doc, Mapping):
        raise SchemaViolation("graph document must be an object")
    if doc.get("version") != VERSION:
        raise UnsupportedVersion(
            f"unsupported graph document version {doc.get('version')!r}"
        )
    if doc.get("typeGraph") != "pointer":
        raise SchemaViolation(f"unknown type graph {doc.get('typeGraph')!r}")
    tg = build_type_graph()
    nodes: dict[int, Node] = {}
    edges: dict[int, Edge] = {}
    try:
        for entry in doc.get("nodes", ()):
            nid = int(entry["id"])
            if nid in nodes:
                raise SchemaViolation(f"duplicate node id {nid}")
            nodes[nid] = Node(nid, entry["type"], dict(entry.get("attrs", {})))
        for entry in doc.get("edges", ()):
            eid = int(entry["id"])
            if eid in edges or eid in nodes:
                raise SchemaViolation(f"duplicate element id {eid}")
            edges[eid] = Edge(eid, entry["label"], int(entry["src"]), int(entry["tgt"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"malformed graph document: {exc}") from None
    top = max([nid for nid in nodes] + [eid for eid in edges], default=-1) + 1
    next_id = max(int(doc.get("nextId", top)), top)
    g = InstanceGraph(tg, nodes, edges, next_id)
    try:
        g.validate()
    except PtrGraphError as exc:
        raise SchemaViolation(f"invalid graph: {exc.message}") from None
    return g


def graph_digest(g_or_doc: InstanceGraph | Mapping[str, Any]) -> str:
    """Stable content hash of a snapshot (sha256 of canonical JSON)."""
    doc = to_json(g_or_doc) if isinstance(g_or_doc, InstanceGraph) else g_or_doc
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- trace documents --------------------------------------------------------------


def config_to_json(config: SimConfig) -> dict:
    return {
        "addressPool": config.address_pool,
        "strictC": config.strict_c,
        "materializeAddresses": config.materialize_addresses,
        "ignoreNames": config.ignore_names,
        "stateBudget": config.state_budget,
        "constraintNames": list(config.constraint_names),
    }


def config_from_json(doc: Mapping[str, Any]) -> SimConfig:
    return SimConfig(
        address_pool=int(doc.get("addressPool", 8)),
        strict_c=bool(doc.get("strictC", False)),
        materialize_addresses=bool(doc.get("materializeAddresses", False)),
        ignore_names=bool(doc.get("ignoreNames", False)),
        state_budget=int(doc.get("stateBudget", 10_000)),
        constraint_names=tuple(doc.get("constraintNames", ())),
    )


def reports_to_json(reports: list[ConstraintReport]) -> list[dict]:
    return [r.to_dict() for r in reports]


def trace_to_json(trace: Trace) -> dict:
    """Full trace document: every state embedded as a GraphDocument."""
    states = [to_json(s) for s in trace.states]
    return {
        "version": VERSION,
        "config": config_to_json(trace.config),
        "env": dict(trace.env),
        "states": states,
        "digests": [graph_digest(doc) for doc in states],
        "steps": [
            {
                "index": s.index,
                "statement": s.statement_text,
                "rule": s.rule_name,
                "anchors": dict(s.anchors),
                "match": dict(s.match_nodes),
                "params": dict(s.params),
                "from": s.index,
                "to": s.index + 1,
                "diff": s.diff.to_dict(),
                "reports": reports_to_json(s.reports),
                "output": s.output,
                "whatIf": s.what_if,
            }
            for s in trace.steps
        ],
        "transcript": list(trace.transcript),
        "error": trace.error.to_dict() if trace.error else None,
    }


# -- session persistence -----------------------------------------------------------


def _diff_to_json(diff: Diff) -> dict:
    return {
        "createdNodes": list(diff.created_nodes),
        "createdEdges": list(diff.created_edges),
        "deletedNodes": [
            {"id": n.id, "type": n.type_name, "attrs": dict(n.attrs)}
            for n in diff.deleted_nodes
        ],
        "deletedEdges": [
            {"id": e.id, "label": e.label, "src": e.src, "tgt": e.tgt}
            for e in diff.deleted_edges
        ],
        "updatedNodes": list(diff.updated_nodes),
        "forbiddenNodes": list(diff.forbidden_nodes),
    }


def _diff_from_json(doc: Mapping[str, Any]) -> Diff:
    return Diff(
        created_nodes=list(doc.get("createdNodes", ())),
        created_edges=list(doc.get("createdEdges", ())),
        deleted_nodes=[
            Node(d["id"], d["type"], dict(d["attrs"]))
            for d in doc.get("deletedNodes", ())
        ],
        deleted_edges=[
            Edge(d["id"], d["label"], d["src"], d["tgt"])
            for d in doc.get("deletedEdges", ())
        ],
        updated_nodes=list(doc.get("updatedNodes", ())),
        forbidden_nodes=list(doc.get("forbiddenNodes", ())),
    )


def _report_from_json(doc: Mapping[str, Any]) -> ConstraintReport:
    return ConstraintReport(
        constraint=doc["constraint"],
        verdict=doc["verdict"],
        witness=dict(doc["witness"]) if doc.get("witness") else None,
        detail=doc.get("detail", ""),
    )


def session_to_json(session) -> dict:
    """Persistable session document (full states, steps, IO position)."""
    from ptrgraph.frontend import pretty_statement
    from ptrgraph.model import ArrayDecl, IntVar

    states = [to_json(s) for s in session.states()]
    decl_lines = []
    for d in session.decls:
        if isinstance(d, IntVar):
            decl_lines.append(f"int {d.name} = {d.value};")
        elif isinstance(d, ArrayDecl):
            decl_lines.append(
                f"int {d.name}[] = {{ {', '.join(str(v) for v in d.values)} }};"
            )
        else:
            decl_lines.append(f"int *{d.name};")
    return {
        "version": VERSION,
        "config": config_to_json(session.config),
        "decls": "\n".join(decl_lines),
        "env": dict(session.env),
        "inputStream": list(session.input_stream),
        "inputPos": session.input_pos,
        "transcript": list(session.transcript),
        "states": states,
        "steps": [
            {
                "statement": s.statement_text,
                "rule": s.rule_name,
                "anchors": dict(s.anchors),
                "match": dict(s.match_nodes),
                "params": dict(s.params),
                "diff": _diff_to_json(s.diff),
                "reports": reports_to_json(s.reports),
                "output": s.output,
                "whatIf": s.what_if,
                "inputPosBefore": s.input_pos_before,
                "transcriptLenBefore": s.transcript_len_before,
            }
            for s in session.history
        ],
    }


def session_from_json(doc: Mapping[str, Any]):
    """Rebuild a live session from :func:`session_to_json` output."""
    from ptrgraph.frontend import parse_declarations
    from ptrgraph.simulator import Session, TraceStep

    if doc.get("version") != VERSION:
        raise UnsupportedVersion(
            f"unsupported session document version {doc.get('version')!r}"
        )
    config = config_from_json(doc.get("config", {}))
    decls = parse_declarations(doc.get("decls", ""))
    session = Session(decls, config, doc.get("inputStream", ()))
    states = [from_json(d) for d in doc["states"]]
    session.start_graph = states[0]
    session.graph = states[-1]
    session.env = {k: int(v) for k, v in doc.get("env", {}).items()}
    session.input_pos = int(doc.get("inputPos", 0))
    session.transcript = list(doc.get("transcript", ()))
    session.history = [
        TraceStep(
            index=i,
            statement_text=s["statement"],
            rule_name=s.get("rule"),
            anchors={k: int(v) for k, v in s.get("anchors", {}).items()},
            match_nodes={k: int(v) for k, v in s.get("match", {}).items()},
            params={k: int(v) for k, v in s.get("params", {}).items()},
            pre_graph=states[i],
            post_graph=states[i + 1],
            diff=_diff_from_json(s.get("diff", {})),
            reports=[_report_from_json(r) for r in s.get("reports", ())],
            output=s.get("output"),
            input_pos_before=int(s.get("inputPosBefore", 0)),
            transcript_len_before=int(s.get("transcriptLenBefore", 0)),
            what_if=bool(s.get("whatIf", False)),
        )
        for i, s in enumerate(doc.get("steps", ()))
    ]
    return session


def session_trace_json(session) -> dict:
    """Trace document for a live session (same schema as batch traces)."""
    trace = Trace(
        decls=list(session.decls),
        config=session.config,
        states=session.states(),
        steps=list(session.history),
        transcript=list(session.transcript),
        env=dict(session.env),
        error=None,
    )
    return trace_to_json(trace)


# -- DOT export --------------------------------------------------------------------

_SHAPES = {
    "Pointer": "ellipse",
    "Address": "box",
    "Array": "folder",
    "Int": "note",
    "Char": "note",
    "Object": "note",
}

_CREATED_STYLE = 'color="#1a7f37", penwidth=3'
_DELETED_STYLE = 'style=dashed, color="#1f6feb", fontcolor="#1f6feb"'
_FORBIDDEN_STYLE = 'style=dotted, color="#cf222e", fontcolor="#cf222e"'


def _node_label(node: Node) -> str:
    parts = [node.type_name]
    for key in sorted(node.attrs):
        value = node.attrs[key]
        if value == "" and key == "name":
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        parts.append(f"{key}={value}")
    return "\\n".join(str(p) for p in parts)


def to_dot(
    g: InstanceGraph,
    diff: Diff | None = None,
    *,
    title: str = "memory",
) -> str:
    """Render a snapshot (optionally with one step's diff ghosts) as DOT."""
    created_nodes = set(diff.created_nodes) if diff else set()
    created_edges = set(diff.created_edges) if diff else set()
    updated_nodes = set(diff.updated_nodes) if diff else set()
    forbidden_nodes = set(diff.forbidden_nodes) if diff else set()

    lines = [
        f'digraph "{title}" {{',
        "  rankdir=LR;",
        '  node [fontname="Helvetica", fontsize=11];',
        '  edge [fontname="Helvetica", fontsize=10];',
    ]
    for node in sorted(g.nodes.values(), key=lambda n: n.id):
        shape = _SHAPES.get(node.type_name, "box")
        style = ""
        if node.id in created_nodes or node.id in updated_nodes:
            style = f", {_CREATED_STYLE}"
        elif node.id in forbidden_nodes:
            style = f", {_FORBIDDEN_STYLE}"
        lines.append(
            f'  n{node.id} [label="{_node_label(node)}", shape={shape}{style}];'
        )
    if diff:
        for node in sorted(diff.deleted_nodes, key=lambda n: n.id):
            lines.append(
                f'  n{node.id} [label="{_node_label(node)}", '
                f"shape={_SHAPES.get(node.type_name, 'box')}, {_DELETED_STYLE}];"
            )
    for e in sorted(g.edges.values(), key=lambda e: e.id):
        style = f' [label="{e.label}"]'
        if e.id in created_edges:
            style = f' [label="{e.label}", {_CREATED_STYLE}]'
        lines.append(f"  n{e.src} -> n{e.tgt}{style};")
    if diff:
        for e in sorted(diff.deleted_edges, key=lambda e: e.id):
            lines.append(
                f'  n{e.src} -> n{e.tgt} [label="{e.label}", {_DELETED_STYLE}];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
