"""The concrete C-pointer memory model.

Holds the fixed type graph (pointers, addresses, objects), the rule catalog
loaded from the DSL files shipped under ``rules/``, the indexed
``pointerArrayAt(k)`` family generated over the ``succ`` relation, and the
start-graph builder that turns declarations into an initial memory state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from ptrgraph.errors import DuplicateName, PoolTooSmall, UnknownRule
from ptrgraph.graphs import AttrSpec, EdgeType, InstanceGraph, TypeGraph
from ptrgraph.rewrite import Rule

POINTER, ADDRESS, OBJECT, INT, CHAR, ARRAY = (
    "Pointer",
    "Address",
    "Object",
    "Int",
    "Char",
    "Array",
)
REF, CONT, SUCC, FST = "ref", "cont", "succ", "fst"

_type_graph: TypeGraph | None = None


def build_type_graph() -> TypeGraph:
    """The pointer-structure schema; one shared immutable instance."""
    global _type_graph
    if _type_graph is None:
        _type_graph = TypeGraph(
            name="pointer",
            node_types={
                POINTER: {},
                ADDRESS: {"free": AttrSpec("bool", True)},
                OBJECT: {"name": AttrSpec("string", "")},
                INT: {"val": AttrSpec("int", 0)},
                CHAR: {"val": AttrSpec("string", "")},
                ARRAY: {"len": AttrSpec("int", 0)},
            },
            edge_types=[
                EdgeType(REF, POINTER, ADDRESS),
                EdgeType(CONT, ADDRESS, OBJECT),
                EdgeType(SUCC, ADDRESS, ADDRESS),
                EdgeType(FST, ARRAY, POINTER),
            ],
            subtyping={INT: OBJECT, CHAR: OBJECT, ARRAY: OBJECT},
        )
    return _type_graph


def empty_graph() -> InstanceGraph:
    return InstanceGraph(build_type_graph())


# -- rule catalog -------------------------------------------------------------

_catalog: dict[str, Rule] | None = None
_ARRAY_AT = re.compile(r"^pointerArrayAt\((\d+)\)$")


def rule_catalog() -> dict[str, Rule]:
    """All named rules; ``ext:``-prefixed entries are invented extensions."""
    global _catalog
    if _catalog is None:
        from ptrgraph.dsl import parse_rule

        rules: dict[str, Rule] = {}
        root = resources.files("ptrgraph").joinpath("rules")
        for entry in sorted(root.iterdir(), key=lambda p: p.name):
            if entry.name.endswith(".rule"):
                rule = parse_rule(entry.read_text())
                rules[rule.name] = rule
        _catalog = rules
    return dict(_catalog)


def pointer_array_at(k: int) -> Rule:
    """Indexed variant of ``pointerArray``: bind a null pointer to the
    address ``k`` succ-steps past the array's first address."""
    if k < 0:
        raise UnknownRule(f"pointerArrayAt index must be >= 0, got {k}")
    from ptrgraph.dsl import parse_rule

    chain_nodes = "\n".join(f"  keep a{i}: Address" for i in range(1, k + 1))
    chain_edges = "\n".join(
        f"  keep a{i} -succ-> a{i + 1}" for i in range(0, k)
    )
    text = f"""
# A null pointer is assigned the address of array element {k}.
rule pointerArrayAt({k})

anchor p: Pointer
anchor ar: Array

nodes
  keep pf: Pointer
  keep a0: Address
{chain_nodes}
  forbid ax: Address

edges
  keep ar -fst-> pf
  keep pf -ref-> a0
{chain_edges}
  forbid p -ref-> ax
  new p -ref-> a{k}
"""
    return parse_rule(text)


def resolve_rule(name: str) -> Rule:
    """Catalog lookup accepting the ``pointerArrayAt(k)`` family syntax."""
    cat = rule_catalog()
    if name in cat:
        return cat[name]
    m = _ARRAY_AT.match(name)
    if m:
        return pointer_array_at(int(m.group(1)))
    raise UnknownRule(f"no rule named {name!r}")


# -- declarations and the start graph -----------------------------------------


@dataclass(frozen=True)
class IntVar:
    name: str
    value: int = 0


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    values: tuple[int, ...]


@dataclass(frozen=True)
class PointerVar:
    name: str


Declaration = IntVar | ArrayDecl | PointerVar


def build_start_graph(
    decls: Sequence[Declaration],
    address_pool: int = 8,
    *,
    start_id: int = 0,
) -> tuple[InstanceGraph, dict[str, int]]:
    """Initial memory state for a list of declarations.

    Per int variable: one named Int object, deliberately unaddressed (the
    model permits partial representations). Per array of n values: an Array
    node with an fst edge to a fresh pointer, which refs the first of n
    allocated addresses chained by succ, each holding an Int. Per pointer
    variable: a ref-less (null) Pointer. ``address_pool`` additional free
    addresses are appended as their own succ chain so that store-at-free-
    address rules stay applicable.

    Returns the graph plus the name -> node id environment.
    """
    if address_pool < 0:
        raise PoolTooSmall(f"address pool must be >= 0, got {address_pool}")
    seen: set[str] = set()
    for d in decls:
        if d.name in seen:
            raise DuplicateName(f"name {d.name!r} declared twice")
        seen.add(d.name)

    g = InstanceGraph(build_type_graph(), next_id=start_id)
    env: dict[str, int] = {}
    for d in decls:
        if isinstance(d, IntVar):
            g, nid = g.add_node(INT, {"name": d.name, "val": d.value})
            env[d.name] = nid
        elif isinstance(d, ArrayDecl):
            g, array_id = g.add_node(ARRAY, {"name": d.name, "len": len(d.values)})
            env[d.name] = array_id
            g, ptr_id = g.add_node(POINTER)
            g, _ = g.add_edge(array_id, FST, ptr_id)
            prev_addr: int | None = None
            for i, value in enumerate(d.values):
                g, addr_id = g.add_node(ADDRESS, {"free": False})
                g, cell_id = g.add_node(INT, {"val": value})
                g, _ = g.add_edge(addr_id, CONT, cell_id)
                if i == 0:
                    g, _ = g.add_edge(ptr_id, REF, addr_id)
                else:
                    g, _ = g.add_edge(prev_addr, SUCC, addr_id)
                prev_addr = addr_id
        else:
            g, nid = g.add_node(POINTER)
            env[d.name] = nid

    prev_free: int | None = None
    for _ in range(address_pool):
        g, addr_id = g.add_node(ADDRESS, {"free": True})
        if prev_free is not None:
            g, _ = g.add_edge(prev_free, SUCC, addr_id)
        prev_free = addr_id
    return g, env


def demo_declarations() -> list[Declaration]:
    """The running example's declarations: two ints, one array, two pointers."""
    return [
        IntVar("s", 0),
        IntVar("t", 0),
        ArrayDecl("age", (30, 65, 41, 23)),
        PointerVar("agep"),
        PointerVar("maxp"),
    ]
