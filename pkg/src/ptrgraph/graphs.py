"""Typed attributed graphs with value semantics.

Graphs are immutable snapshots: every operation returns a fresh
``InstanceGraph`` that shares unchanged node/edge records with its input.
Element ids are monotonically increasing integers and survive rewriting for
preserved elements, so traces can be diffed by id.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ptrgraph import _kernel
from ptrgraph.errors import (
    AttributeSchemaMismatch,
    IllTypedEdge,
    TypeGraphMismatch,
    UnknownAttribute,
    UnknownEdge,
    UnknownNode,
    UnknownType,
)

AttrValue = int | bool | str

_ATTR_KINDS = {"int": int, "bool": bool, "string": str}


@dataclass(frozen=True)
class AttrSpec:
    """Declared attribute: value kind plus the default used when omitted."""

    kind: str  # "int" | "bool" | "string"
    default: AttrValue

    def accepts(self, value: AttrValue) -> bool:
        py = _ATTR_KINDS[self.kind]
        if py is int:
            # bool is a subclass of int; keep the domains disjoint.
            return isinstance(value, int) and not isinstance(value, bool)
        return isinstance(value, py)


@dataclass(frozen=True)
class EdgeType:
    label: str
    source: str
    target: str


class TypeGraph:
    """Schema for instance graphs: node types, attributes, edges, subtyping."""

    def __init__(
        self,
        name: str,
        node_types: Mapping[str, Mapping[str, AttrSpec]],
        edge_types: Iterable[EdgeType],
        subtyping: Mapping[str, str] | None = None,
    ):
        self.name = name
        self.node_types = {t: dict(schema) for t, schema in node_types.items()}
        self.edge_types = tuple(edge_types)
        self.parents = dict(subtyping or {})
        self._supertypes: dict[str, frozenset[str]] = {}
        self._schemas: dict[str, dict[str, AttrSpec]] = {}
        self._validate()

    def _validate(self) -> None:
        for t, parent in self.parents.items():
            if t not in self.node_types or parent not in self.node_types:
                raise UnknownType(f"subtyping references undeclared type {t!r} or {parent!r}")
        for t in self.node_types:
            chain, seen = t, {t}
            while chain in self.parents:
                chain = self.parents[chain]
                if chain in seen:  # antisymmetry: no cycles
                    raise TypeGraphMismatch(f"subtyping cycle through {t!r}")
                seen.add(chain)
            self._supertypes[t] = frozenset(seen)
        for t in self.node_types:
            merged: dict[str, AttrSpec] = {}
            for sup in self._ancestry(t):
                for attr, spec in self.node_types[sup].items():
                    if attr in merged and merged[attr] != spec:
                        raise TypeGraphMismatch(
                            f"attribute {attr!r} redeclared incompatibly on {t!r}"
                        )
                    merged[attr] = spec
            self._schemas[t] = merged
        for et in self.edge_types:
            if et.source not in self.node_types or et.target not in self.node_types:
                raise UnknownType(
                    f"edge type {et.label!r} references undeclared node type"
                )

    def _ancestry(self, t: str) -> list[str]:
        # root-first so subtype declarations can refine later (they cannot;
        # conflicts raise above, but ordering keeps merging deterministic)
        out = [t]
        while t in self.parents:
            t = self.parents[t]
            out.append(t)
        return list(reversed(out))

    def has_type(self, t: str) -> bool:
        return t in self.node_types

    def is_subtype(self, sub: str, sup: str) -> bool:
        """Reflexive-transitive subtype test."""
        return sup in self._supertypes.get(sub, frozenset())

    def schema(self, t: str) -> dict[str, AttrSpec]:
        """Effective attribute schema (own plus inherited)."""
        if t not in self._schemas:
            raise UnknownType(f"unknown node type {t!r}")
        return self._schemas[t]

    def edge_type_for(self, label: str, source_type: str, target_type: str) -> EdgeType | None:
        for et in self.edge_types:
            if (
                et.label == label
                and self.is_subtype(source_type, et.source)
                and self.is_subtype(target_type, et.target)
            ):
                return et
        return None

    def concrete_subtypes(self, t: str) -> frozenset[str]:
        return frozenset(s for s in self.node_types if self.is_subtype(s, t))


@dataclass(frozen=True)
class Node:
    id: int
    type_name: str
    attrs: dict[str, AttrValue]


@dataclass(frozen=True)
class Edge:
    id: int
    label: str
    src: int
    tgt: int


@dataclass
class Morphism:
    """Injective structure-preserving map between two instance graphs."""

    node_map: dict[int, int] = field(default_factory=dict)
    edge_map: dict[int, int] = field(default_factory=dict)

    def check(self, src: "InstanceGraph", dst: "InstanceGraph") -> bool:
        if len(set(self.node_map.values())) != len(self.node_map):
            return False
        if len(set(self.edge_map.values())) != len(self.edge_map):
            return False
        tg = dst.type_graph
        for nid, img in self.node_map.items():
            if nid not in src.nodes or img not in dst.nodes:
                return False
            if not tg.is_subtype(dst.nodes[img].type_name, src.nodes[nid].type_name):
                return False
        for eid, img in self.edge_map.items():
            if eid not in src.edges or img not in dst.edges:
                return False
            e, f = src.edges[eid], dst.edges[img]
            if e.label != f.label:
                return False
            if self.node_map.get(e.src) != f.src or self.node_map.get(e.tgt) != f.tgt:
                return False
        return True


class InstanceGraph:
    """A concrete memory state typed over a :class:`TypeGraph`.

    Treat instances as values: none of the operations mutate the receiver.
    """

    __slots__ = ("type_graph", "nodes", "edges", "next_id")

    def __init__(
        self,
        type_graph: TypeGraph,
        nodes: dict[int, Node] | None = None,
        edges: dict[int, Edge] | None = None,
        next_id: int = 0,
    ):
        self.type_graph = type_graph
        self.nodes = nodes or {}
        self.edges = edges or {}
        self.next_id = next_id

    # -- construction -------------------------------------------------

    def add_node(
        self, type_name: str, attrs: Mapping[str, AttrValue] | None = None
    ) -> tuple["InstanceGraph", int]:
        schema = self._schema_or_raise(type_name)
        attrs = dict(attrs or {})
        for key, value in attrs.items():
            if key not in schema:
                raise AttributeSchemaMismatch(
                    f"type {type_name!r} has no attribute {key!r}"
                )
            if not schema[key].accepts(value):
                raise AttributeSchemaMismatch(
                    f"attribute {key!r} of {type_name!r} expects {schema[key].kind}, "
                    f"got {value!r}"
                )
        for key, spec in schema.items():
            attrs.setdefault(key, spec.default)
        nid = self.next_id
        nodes = dict(self.nodes)
        nodes[nid] = Node(nid, type_name, attrs)
        return InstanceGraph(self.type_graph, nodes, self.edges, nid + 1), nid

    def add_edge(self, src: int, label: str, tgt: int) -> tuple["InstanceGraph", int]:
        if src not in self.nodes:
            raise UnknownNode(f"no node {src}")
        if tgt not in self.nodes:
            raise UnknownNode(f"no node {tgt}")
        s, t = self.nodes[src].type_name, self.nodes[tgt].type_name
        if self.type_graph.edge_type_for(label, s, t) is None:
            raise IllTypedEdge(f"no edge type {label!r} from {s} to {t}")
        eid = self.next_id
        edges = dict(self.edges)
        edges[eid] = Edge(eid, label, src, tgt)
        return InstanceGraph(self.type_graph, self.nodes, edges, eid + 1), eid

    def remove_node(self, nid: int) -> "InstanceGraph":
        """Remove a node and, SPO-style, every incident edge."""
        if nid not in self.nodes:
            raise UnknownNode(f"no node {nid}")
        nodes = dict(self.nodes)
        del nodes[nid]
        edges = {
            eid: e for eid, e in self.edges.items() if e.src != nid and e.tgt != nid
        }
        return InstanceGraph(self.type_graph, nodes, edges, self.next_id)

    def remove_edge(self, eid: int) -> "InstanceGraph":
        if eid not in self.edges:
            raise UnknownEdge(f"no edge {eid}")
        edges = dict(self.edges)
        del edges[eid]
        return InstanceGraph(self.type_graph, self.nodes, edges, self.next_id)

    def set_attr(self, nid: int, key: str, value: AttrValue) -> "InstanceGraph":
        if nid not in self.nodes:
            raise UnknownNode(f"no node {nid}")
        node = self.nodes[nid]
        schema = self.type_graph.schema(node.type_name)
        if key not in schema:
            raise UnknownAttribute(f"type {node.type_name!r} has no attribute {key!r}")
        if not schema[key].accepts(value):
            raise AttributeSchemaMismatch(
                f"attribute {key!r} of {node.type_name!r} expects {schema[key].kind}, "
                f"got {value!r}"
            )
        attrs = dict(node.attrs)
        attrs[key] = value
        nodes = dict(self.nodes)
        nodes[nid] = Node(nid, node.type_name, attrs)
        return InstanceGraph(self.type_graph, nodes, self.edges, self.next_id)

    def _schema_or_raise(self, type_name: str) -> dict[str, AttrSpec]:
        if not self.type_graph.has_type(type_name):
            raise UnknownType(f"unknown node type {type_name!r}")
        return self.type_graph.schema(type_name)

    # -- queries -------------------------------------------------------

    def node(self, nid: int) -> Node:
        if nid not in self.nodes:
            raise UnknownNode(f"no node {nid}")
        return self.nodes[nid]

    def out_edges(self, nid: int, label: str | None = None) -> list[Edge]:
        return sorted(
            (
                e
                for e in self.edges.values()
                if e.src == nid and (label is None or e.label == label)
            ),
            key=lambda e: e.id,
        )

    def in_edges(self, nid: int, label: str | None = None) -> list[Edge]:
        return sorted(
            (
                e
                for e in self.edges.values()
                if e.tgt == nid and (label is None or e.label == label)
            ),
            key=lambda e: e.id,
        )

    def nodes_of_type(self, type_name: str) -> list[Node]:
        tg = self.type_graph
        return sorted(
            (n for n in self.nodes.values() if tg.is_subtype(n.type_name, type_name)),
            key=lambda n: n.id,
        )

    def validate(self) -> None:
        """Full conformance check against the type graph."""
        for n in self.nodes.values():
            schema = self._schema_or_raise(n.type_name)
            if set(n.attrs) != set(schema):
                raise AttributeSchemaMismatch(
                    f"node {n.id} attributes {sorted(n.attrs)} do not match schema "
                    f"{sorted(schema)} of {n.type_name!r}"
                )
            for key, value in n.attrs.items():
                if not schema[key].accepts(value):
                    raise AttributeSchemaMismatch(
                        f"node {n.id} attribute {key!r} has ill-typed value {value!r}"
                    )
        for e in self.edges.values():
            if e.src not in self.nodes or e.tgt not in self.nodes:
                raise UnknownNode(f"edge {e.id} has a dangling endpoint")
            s, t = self.nodes[e.src].type_name, self.nodes[e.tgt].type_name
            if self.type_graph.edge_type_for(e.label, s, t) is None:
                raise IllTypedEdge(f"edge {e.id} ({e.label!r}: {s} -> {t}) is ill-typed")

    # -- equality ------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        """Exact structural equality, ids included (not isomorphism)."""
        if not isinstance(other, InstanceGraph):
            return NotImplemented
        return (
            self.type_graph is other.type_graph
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"<InstanceGraph nodes={len(self.nodes)} edges={len(self.edges)}>"


# -- isomorphism -------------------------------------------------------


def _attr_signature(node: Node, ignore_attrs: tuple[str, ...]) -> tuple:
    return tuple(
        sorted((k, v) for k, v in node.attrs.items() if k not in ignore_attrs)
    )


def invariant_signature(g: InstanceGraph, ignore_attrs: tuple[str, ...] = ()) -> tuple:
    """Isomorphism-invariant fingerprint used to bucket candidate states.

    Two rounds of neighbourhood refinement over (type, attrs, degree)
    colours; equal graphs always collide, unequal graphs rarely do. Exact
    equality is settled by :func:`isomorphic`.
    """
    colors = {
        n.id: (n.type_name, _attr_signature(n, ignore_attrs)) for n in g.nodes.values()
    }
    for _ in range(2):
        new_colors = {}
        for nid, color in colors.items():
            outs = sorted((e.label, colors[e.tgt]) for e in g.out_edges(nid))
            ins = sorted((e.label, colors[e.src]) for e in g.in_edges(nid))
            new_colors[nid] = (color, tuple(outs), tuple(ins))
        colors = new_colors
    return (len(g.nodes), len(g.edges), tuple(sorted(colors.values())))


def isomorphic(
    g1: InstanceGraph,
    g2: InstanceGraph,
    ignore_attrs: tuple[str, ...] = (),
) -> Morphism | None:
    """Return a witness bijection preserving types, attrs and edges, or None.

    Both graphs must share a type graph; isomorphism is checked up to node
    and edge ids.
    """
    if g1.type_graph is not g2.type_graph:
        raise TypeGraphMismatch("graphs are typed over different type graphs")
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return None

    host_ids = sorted(g2.nodes)
    host_index = {nid: i for i, nid in enumerate(host_ids)}
    pattern_ids = sorted(g1.nodes)

    def node_key(g: InstanceGraph, n: Node) -> tuple:
        out_labels = tuple(sorted(e.label for e in g.out_edges(n.id)))
        in_labels = tuple(sorted(e.label for e in g.in_edges(n.id)))
        return (n.type_name, _attr_signature(n, ignore_attrs), out_labels, in_labels)

    host_by_key: dict[tuple, list[int]] = {}
    for nid in host_ids:
        host_by_key.setdefault(node_key(g2, g2.nodes[nid]), []).append(nid)

    cands = []
    for pid in pattern_ids:
        matches = host_by_key.get(node_key(g1, g1.nodes[pid]), [])
        if not matches:
            return None
        cands.append(tuple(host_index[h] for h in matches))

    pat_index = {nid: i for i, nid in enumerate(pattern_ids)}
    labels = sorted({e.label for e in g1.edges.values()} | {e.label for e in g2.edges.values()})
    label_index = {lbl: i for i, lbl in enumerate(labels)}
    pedges = tuple(
        (pat_index[e.src], pat_index[e.tgt], label_index[e.label])
        for e in sorted(g1.edges.values(), key=lambda e: e.id)
    )
    hedges = frozenset(
        (host_index[e.src], host_index[e.tgt], label_index[e.label])
        for e in g2.edges.values()
    )

    for assignment in _kernel.enumerate_embeddings(
        cands, pedges, hedges, frozenset(), limit=0
    ):
        node_map = {pid: host_ids[assignment[i]] for i, pid in enumerate(pattern_ids)}
        edge_map = _map_edges(g1, g2, node_map)
        if edge_map is not None:
            return Morphism(node_map, edge_map)
    return None


def _map_edges(
    g1: InstanceGraph, g2: InstanceGraph, node_map: dict[int, int]
) -> dict[int, int] | None:
    """Assign g1 edges to distinct g2 edges consistent with node_map.

    Parallel edges with identical label/endpoints are interchangeable, so a
    greedy per-group pairing is exact. Returns None when multiplicities
    disagree (the node bijection then does not extend to edges).
    """
    groups: dict[tuple[int, str, int], list[int]] = {}
    for e in sorted(g1.edges.values(), key=lambda e: e.id):
        groups.setdefault((node_map[e.src], e.label, node_map[e.tgt]), []).append(e.id)
    host_groups: dict[tuple[int, str, int], list[int]] = {}
    for e in sorted(g2.edges.values(), key=lambda e: e.id):
        host_groups.setdefault((e.src, e.label, e.tgt), []).append(e.id)
    edge_map: dict[int, int] = {}
    for key, eids in groups.items():
        avail = host_groups.get(key, [])
        if len(avail) < len(eids):
            return None
        for eid, hid in zip(eids, avail):
            edge_map[eid] = hid
    if len(edge_map) != len(g1.edges):
        return None
    return edge_map


def merge_disjoint(g: InstanceGraph, other: InstanceGraph) -> InstanceGraph:
    """Union of two snapshots over the same type graph with disjoint ids."""
    if g.type_graph is not other.type_graph:
        raise TypeGraphMismatch("graphs are typed over different type graphs")
    overlap = (set(g.nodes) | {e for e in g.edges}) & (
        set(other.nodes) | {e for e in other.edges}
    )
    if overlap:
        raise UnknownNode(f"id overlap {sorted(overlap)[:4]}; reindex first")
    nodes = dict(itertools.chain(g.nodes.items(), other.nodes.items()))
    edges = dict(itertools.chain(g.edges.items(), other.edges.items()))
    return InstanceGraph(g.type_graph, nodes, edges, max(g.next_id, other.next_id))
