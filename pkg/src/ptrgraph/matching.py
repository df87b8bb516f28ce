"""Pattern embeddings over instance graphs.

Shared by rule matching (rewrite module) and constraint evaluation: a
pattern is a list of typed variables, labelled edges between them, and
attribute guards. ``find_embeddings`` enumerates injective, type- and
guard-respecting assignments, with three extras the callers need:

* pre-bound variables (anchors, outer quantifier bindings, NAC boundaries);
* per-pair aliasing exemptions from injectivity;
* an exclusion set of host nodes (joint injectivity across nested levels).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ptrgraph import _kernel
from ptrgraph.errors import AnchorTypeMismatch, UnknownNode, UnknownType
from ptrgraph.graphs import AttrValue, InstanceGraph


@dataclass(frozen=True)
class PatternNode:
    var: str
    type_name: str


@dataclass(frozen=True)
class PatternEdge:
    src: str
    label: str
    tgt: str


@dataclass(frozen=True)
class AttrGuard:
    var: str
    attr: str
    op: str  # "==" or "!="
    value: AttrValue

    def holds(self, attrs: Mapping[str, AttrValue]) -> bool:
        if self.attr not in attrs:
            return False
        if self.op == "==":
            return attrs[self.attr] == self.value
        return attrs[self.attr] != self.value


def find_embeddings(
    g: InstanceGraph,
    nodes: Sequence[PatternNode],
    edges: Sequence[PatternEdge],
    guards: Sequence[AttrGuard] = (),
    *,
    bound: Mapping[str, int] | None = None,
    injective: bool = True,
    alias_pairs: Iterable[tuple[str, str]] = (),
    exclude: frozenset[int] = frozenset(),
    neq_pairs: Iterable[tuple[str, str]] = (),
    limit: int = 0,
) -> list[dict[str, int]]:
    """Enumerate assignments var -> host node id, sorted for determinism.

    ``bound`` pins variables to host nodes (they may also appear in
    ``nodes``; their type is then verified). ``exclude`` removes host nodes
    from every free variable's candidates. ``neq_pairs`` forces two
    variables apart even when one of them is bound. With ``injective``
    (rule matching) free variables are mutually distinct unless listed in
    ``alias_pairs``; without it (constraint matching) variables may share
    hosts freely and only ``neq_pairs`` separate them. Bound variables
    never constrain free ones beyond ``exclude``/``neq_pairs``.
    """
    bound = dict(bound or {})
    tg = g.type_graph
    guards_by_var: dict[str, list[AttrGuard]] = {}
    for gd in guards:
        guards_by_var.setdefault(gd.var, []).append(gd)

    node_by_var = {pn.var: pn for pn in nodes}

    # validate bound variables against the pattern
    for var, nid in bound.items():
        if nid not in g.nodes:
            raise UnknownNode(f"bound variable {var!r} maps to missing node {nid}")
        pn = node_by_var.get(var)
        if pn is not None and not tg.is_subtype(g.nodes[nid].type_name, pn.type_name):
            raise AnchorTypeMismatch(
                f"{var!r} is bound to a {g.nodes[nid].type_name}, pattern wants "
                f"{pn.type_name}"
            )
        for gd in guards_by_var.get(var, ()):
            if not gd.holds(g.nodes[nid].attrs):
                return []

    free_vars = [pn.var for pn in nodes if pn.var not in bound]
    free_index = {v: i for i, v in enumerate(free_vars)}

    # split edges: free-free go to the kernel, bound-free prune candidates,
    # bound-bound are direct checks
    kernel_edges: list[tuple[str, str, str]] = []
    adjacency_filters: dict[str, list[tuple[str, int, bool]]] = {}
    for pe in edges:
        s_bound, t_bound = pe.src in bound, pe.tgt in bound
        if s_bound and t_bound:
            if not _edge_exists(g, bound[pe.src], pe.label, bound[pe.tgt]):
                return []
        elif s_bound:
            adjacency_filters.setdefault(pe.tgt, []).append((pe.label, bound[pe.src], True))
        elif t_bound:
            adjacency_filters.setdefault(pe.src, []).append((pe.label, bound[pe.tgt], False))
        else:
            kernel_edges.append((pe.src, pe.tgt, pe.label))

    neq = [tuple(p) for p in neq_pairs]
    for a, b in neq:
        if a in bound and b in bound and bound[a] == bound[b]:
            return []

    if not free_vars:
        return [dict(bound)]

    host_ids = sorted(g.nodes)
    host_index = {nid: i for i, nid in enumerate(host_ids)}

    cands: list[tuple[int, ...]] = []
    for var in free_vars:
        pn = node_by_var.get(var)
        if pn is None:
            raise UnknownType(f"pattern variable {var!r} is not declared")
        ok: list[int] = []
        var_guards = guards_by_var.get(var, ())
        neq_hosts = {
            bound[b if a == var else a]
            for a, b in neq
            if var in (a, b) and (b if a == var else a) in bound
        }
        for n in g.nodes_of_type(pn.type_name):
            if n.id in exclude or n.id in neq_hosts:
                continue
            if any(not gd.holds(n.attrs) for gd in var_guards):
                continue
            keep = True
            for label, other, incoming in adjacency_filters.get(var, ()):
                present = (
                    _edge_exists(g, other, label, n.id)
                    if incoming
                    else _edge_exists(g, n.id, label, other)
                )
                if not present:
                    keep = False
                    break
            if keep:
                ok.append(host_index[n.id])
        cands.append(tuple(ok))

    labels = sorted({lbl for _, _, lbl in kernel_edges})
    label_index = {lbl: i for i, lbl in enumerate(labels)}
    pedges = tuple(
        (free_index[s], free_index[t], label_index[lbl]) for s, t, lbl in kernel_edges
    )
    if pedges:
        hedges = frozenset(
            (host_index[e.src], host_index[e.tgt], label_index[e.label])
            for e in g.edges.values()
            if e.label in label_index
        )
    else:
        hedges = frozenset()

    if injective:
        alias_ok = frozenset(
            (min(free_index[a], free_index[b]), max(free_index[a], free_index[b]))
            for a, b in alias_pairs
            if a in free_index and b in free_index
        )
    else:
        alias_ok = frozenset(
            (i, j)
            for i in range(len(free_vars))
            for j in range(i + 1, len(free_vars))
        )

    free_neq = [
        (free_index[a], free_index[b]) for a, b in neq if a in free_index and b in free_index
    ]

    results: list[dict[str, int]] = []
    for assignment in _kernel.enumerate_embeddings(cands, pedges, hedges, alias_ok, limit):
        if any(assignment[i] == assignment[j] for i, j in free_neq):
            continue
        emb = dict(bound)
        for i, var in enumerate(free_vars):
            emb[var] = host_ids[assignment[i]]
        results.append(emb)
    return results


def _edge_exists(g: InstanceGraph, src: int, label: str, tgt: int) -> bool:
    return any(
        e.src == src and e.tgt == tgt and e.label == label for e in g.edges.values()
    )


def edges_between(g: InstanceGraph, src: int, label: str, tgt: int) -> list[int]:
    """Ids of all host edges matching (src, label, tgt), ascending."""
    return sorted(
        e.id
        for e in g.edges.values()
        if e.src == src and e.tgt == tgt and e.label == label
    )
