"""Combined-notation rewrite rules and their application.

A rule is one pattern graph whose elements carry roles: ``keep`` (required
and preserved), ``del`` (required and deleted), ``new`` (created), and
``forbid`` (negative application condition). Matching is injective over the
keep/del part; each connected ``forbid`` fragment blocks a match when it
extends the morphism (forbidden nodes may land on already-matched nodes,
which is what makes "pointer has no ref edge at all" expressible).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ptrgraph.errors import (
    AnchorTypeMismatch,
    MissingParam,
    StaleMatch,
)
from ptrgraph.graphs import AttrValue, Edge, InstanceGraph, Node
from ptrgraph.matching import (
    AttrGuard,
    PatternEdge,
    PatternNode,
    edges_between,
    find_embeddings,
)

KEEP, DEL, NEW, FORBID = "keep", "del", "new", "forbid"


@dataclass(frozen=True)
class RuleNode:
    var: str
    type_name: str
    role: str


@dataclass(frozen=True)
class RuleEdge:
    src: str
    label: str
    tgt: str
    role: str


@dataclass(frozen=True)
class Assignment:
    """``set target.attr = <source>`` where source is a literal, a copied
    attribute of a matched node, or a rule parameter."""

    target: str
    attr: str
    source_kind: str  # "lit" | "copy" | "param"
    value: AttrValue | None = None
    source_var: str | None = None
    source_attr: str | None = None


@dataclass(frozen=True)
class EmbargoFragment:
    nodes: tuple[PatternNode, ...]
    edges: tuple[PatternEdge, ...]
    guards: tuple[AttrGuard, ...]


@dataclass
class Rule:
    name: str
    nodes: list[RuleNode]
    edges: list[RuleEdge]
    guards: list[AttrGuard]
    assignments: list[Assignment]
    anchors: dict[str, str]  # var -> type name, in declaration order
    alias_pairs: list[tuple[str, str]] = field(default_factory=list)
    params: dict[str, int | None] = field(default_factory=dict)
    description: str = ""

    def __post_init__(self) -> None:
        self._node_by_var = {n.var: n for n in self.nodes}
        self._match_nodes = tuple(
            PatternNode(n.var, n.type_name)
            for n in self.nodes
            if n.role in (KEEP, DEL)
        )
        self._match_edges = tuple(
            PatternEdge(e.src, e.label, e.tgt)
            for e in self.edges
            if e.role in (KEEP, DEL)
        )
        self._match_edge_roles = tuple(
            e.role for e in self.edges if e.role in (KEEP, DEL)
        )
        self._match_guards = tuple(
            g for g in self.guards if self._node_by_var[g.var].role in (KEEP, DEL)
        )
        self._embargoes = self._build_embargoes()

    # -- derived views ---------------------------------------------------

    @property
    def match_nodes(self) -> tuple[PatternNode, ...]:
        return self._match_nodes

    @property
    def match_edges(self) -> tuple[PatternEdge, ...]:
        return self._match_edges

    @property
    def embargo_fragments(self) -> tuple[EmbargoFragment, ...]:
        return self._embargoes

    def node_role(self, var: str) -> str:
        return self._node_by_var[var].role

    def creator_nodes(self) -> list[RuleNode]:
        return [n for n in self.nodes if n.role == NEW]

    def creator_edges(self) -> list[RuleEdge]:
        return [e for e in self.edges if e.role == NEW]

    def eraser_nodes(self) -> list[RuleNode]:
        return [n for n in self.nodes if n.role == DEL]

    def eraser_edges(self) -> list[RuleEdge]:
        return [e for e in self.edges if e.role == DEL]

    def _build_embargoes(self) -> tuple[EmbargoFragment, ...]:
        forbid_nodes = {n.var for n in self.nodes if n.role == FORBID}
        forbid_edges = [e for e in self.edges if e.role == FORBID]
        # union-find over forbidden elements; forbidden edges join through
        # forbidden endpoints only (reader endpoints are fragment boundary)
        parent: dict[object, object] = {v: v for v in forbid_nodes}
        for i, _ in enumerate(forbid_edges):
            parent[("e", i)] = ("e", i)

        def find(x: object) -> object:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a: object, b: object) -> None:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for i, e in enumerate(forbid_edges):
            if e.src in forbid_nodes:
                union(("e", i), e.src)
            if e.tgt in forbid_nodes:
                union(("e", i), e.tgt)

        groups: dict[object, tuple[set[str], list[PatternEdge]]] = {}
        for v in forbid_nodes:
            groups.setdefault(find(v), (set(), []))[0].add(v)
        for i, e in enumerate(forbid_edges):
            groups.setdefault(find(("e", i)), (set(), []))[1].append(
                PatternEdge(e.src, e.label, e.tgt)
            )

        frags = []
        for vars_, edges_ in groups.values():
            nodes = tuple(
                PatternNode(v, self._node_by_var[v].type_name) for v in sorted(vars_)
            )
            guards = tuple(g for g in self.guards if g.var in vars_)
            frags.append(EmbargoFragment(nodes, tuple(edges_), guards))
        return tuple(sorted(frags, key=lambda f: [n.var for n in f.nodes]))


@dataclass
class Match:
    rule: Rule
    node_map: dict[str, int]  # keep/del pattern vars -> host node ids
    edge_map: dict[int, int]  # index into rule.match_edges -> host edge id
    anchors: dict[str, int]

    def sort_key(self) -> tuple[int, ...]:
        return tuple(self.node_map[pn.var] for pn in self.rule.match_nodes)


def find_matches(
    g: InstanceGraph,
    rule: Rule,
    anchors: Mapping[str, int] | None = None,
) -> list[Match]:
    """All valid matches, sorted by their bound host node ids.

    ``anchors`` pre-binds any subset of the rule's declared anchor
    variables to host nodes.
    """
    bound: dict[str, int] = {}
    for var, nid in (anchors or {}).items():
        if var not in rule.anchors:
            raise AnchorTypeMismatch(f"rule {rule.name!r} has no anchor {var!r}")
        bound[var] = nid

    embeddings = find_embeddings(
        g,
        rule.match_nodes,
        rule.match_edges,
        rule._match_guards,
        bound=bound,
        alias_pairs=rule.alias_pairs,
    )

    matches: list[Match] = []
    for emb in embeddings:
        if _embargo_blocked(g, rule, emb):
            continue
        edge_map = _assign_match_edges(g, rule, emb)
        if edge_map is None:
            continue
        matches.append(Match(rule, emb, edge_map, dict(bound)))
    matches.sort(key=Match.sort_key)
    return matches


def _embargo_blocked(g: InstanceGraph, rule: Rule, emb: Mapping[str, int]) -> bool:
    for frag in rule.embargo_fragments:
        hit = find_embeddings(
            g,
            frag.nodes,
            frag.edges,
            frag.guards,
            bound=emb,
            limit=1,
        )
        if hit:
            return True
    return False


def _assign_match_edges(
    g: InstanceGraph, rule: Rule, emb: Mapping[str, int]
) -> dict[int, int] | None:
    """Map each keep/del pattern edge to a distinct host edge id."""
    taken: set[int] = set()
    edge_map: dict[int, int] = {}
    for idx, pe in enumerate(rule.match_edges):
        options = [
            eid
            for eid in edges_between(g, emb[pe.src], pe.label, emb[pe.tgt])
            if eid not in taken
        ]
        if not options:
            return None  # parallel-edge multiplicity shortfall
        edge_map[idx] = options[0]
        taken.add(options[0])
    return edge_map


def match_is_valid(g: InstanceGraph, match: Match) -> bool:
    """Re-check a match against the current snapshot."""
    rule = match.rule
    for pn in rule.match_nodes:
        nid = match.node_map.get(pn.var)
        if nid is None or nid not in g.nodes:
            return False
        if not g.type_graph.is_subtype(g.nodes[nid].type_name, pn.type_name):
            return False
    for gd in rule._match_guards:
        if not gd.holds(g.nodes[match.node_map[gd.var]].attrs):
            return False
    for idx, pe in enumerate(rule.match_edges):
        eid = match.edge_map.get(idx)
        if eid is None or eid not in g.edges:
            return False
        e = g.edges[eid]
        if (
            e.label != pe.label
            or e.src != match.node_map[pe.src]
            or e.tgt != match.node_map[pe.tgt]
        ):
            return False
    if _embargo_blocked(g, rule, match.node_map):
        return False
    return True


@dataclass
class RewriteResult:
    graph: InstanceGraph
    created_nodes: list[int]
    created_edges: list[int]
    deleted_nodes: list[Node]
    deleted_edges: list[Edge]
    updated_nodes: list[int]
    node_map: dict[str, int]  # pattern vars incl. creators -> host ids


def rewrite(
    g: InstanceGraph,
    match: Match,
    params: Mapping[str, int] | None = None,
) -> RewriteResult:
    """Apply a rule at a match, returning the new snapshot plus a diff.

    Raises :class:`StaleMatch` when the match no longer holds in ``g``
    (elements vanished, guards fail, or an embargo appeared since it was
    computed).
    """
    if not match_is_valid(g, match):
        raise StaleMatch(
            f"match of rule {match.rule.name!r} is no longer valid in this state"
        )
    rule = match.rule
    supplied = dict(params or {})
    node_map = dict(match.node_map)

    # read copied attribute sources from the pre-state
    staged: list[tuple[str, str, AttrValue]] = []
    for a in rule.assignments:
        if a.source_kind == "lit":
            value = a.value
        elif a.source_kind == "copy":
            value = g.nodes[node_map[a.source_var]].attrs[a.source_attr]
        else:
            if a.source_var in supplied:
                value = supplied[a.source_var]
            elif rule.params.get(a.source_var) is not None:
                value = rule.params[a.source_var]
            else:
                raise MissingParam(
                    f"rule {rule.name!r} needs parameter {a.source_var!r}"
                )
        staged.append((a.target, a.attr, value))

    deleted_edges: list[Edge] = []
    deleted_nodes: list[Node] = []
    out = g
    for idx, role in enumerate(rule._match_edge_roles):
        if role == DEL:
            eid = match.edge_map[idx]
            if eid in out.edges:
                deleted_edges.append(out.edges[eid])
                out = out.remove_edge(eid)
    for rn in rule.eraser_nodes():
        nid = node_map[rn.var]
        if nid in out.nodes:
            deleted_nodes.append(out.nodes[nid])
            for e in out.out_edges(nid) + out.in_edges(nid):
                if e not in deleted_edges:
                    deleted_edges.append(e)
            out = out.remove_node(nid)

    created_nodes: list[int] = []
    for rn in sorted(rule.creator_nodes(), key=lambda n: n.var):
        out, nid = out.add_node(rn.type_name)
        node_map[rn.var] = nid
        created_nodes.append(nid)

    created_edges: list[int] = []
    for re_ in sorted(rule.creator_edges(), key=lambda e: (e.src, e.label, e.tgt)):
        out, eid = out.add_edge(node_map[re_.src], re_.label, node_map[re_.tgt])
        created_edges.append(eid)

    updated: list[int] = []
    for target, attr, value in staged:
        nid = node_map[target]
        before = out.nodes[nid].attrs.get(attr)
        if before != value:
            out = out.set_attr(nid, attr, value)
            if nid not in created_nodes and nid not in updated:
                updated.append(nid)

    return RewriteResult(
        out, created_nodes, created_edges, deleted_nodes, deleted_edges, updated, node_map
    )


def apply_rule(
    g: InstanceGraph, match: Match, params: Mapping[str, int] | None = None
) -> InstanceGraph:
    """Convenience wrapper over :func:`rewrite` when the diff is not needed."""
    return rewrite(g, match, params).graph
