"""Independent oracles used by the test suite.

Everything here is deliberately written without touching the engine's
matching or evaluation code paths: embeddings are enumerated with
itertools over raw node dicts, constraint checks are direct loops over
edges, and the reference interpreter runs on a flat name -> location store
with no graphs at all.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ptrgraph.graphs import InstanceGraph
from ptrgraph.model import (
    ArrayDecl,
    Declaration,
    IntVar,
    PointerVar,
    build_type_graph,
)

# -- brute-force pattern embeddings ------------------------------------------------


def bf_embeddings(
    g: InstanceGraph,
    nodes,
    edges,
    guards=(),
    *,
    bound=None,
    alias_pairs=(),
    exclude=frozenset(),
    neq_pairs=(),
) -> list[dict[str, int]]:
    """Enumerate injective pattern embeddings by exhaustive product search."""
    bound = dict(bound or {})
    tg = g.type_graph

    def guards_ok(var: str, attrs) -> bool:
        for gd in guards:
            if gd.var != var:
                continue
            if gd.attr not in attrs:
                return False
            if gd.op == "==" and attrs[gd.attr] != gd.value:
                return False
            if gd.op == "!=" and attrs[gd.attr] == gd.value:
                return False
        return True

    for pn in nodes:
        if pn.var in bound:
            nid = bound[pn.var]
            if nid not in g.nodes:
                return []
            if not tg.is_subtype(g.nodes[nid].type_name, pn.type_name):
                return []
    for var, nid in bound.items():
        if not guards_ok(var, g.nodes[nid].attrs):
            return []

    free = [pn for pn in nodes if pn.var not in bound]
    candidates = []
    for pn in free:
        cands = [
            n.id
            for n in sorted(g.nodes.values(), key=lambda n: n.id)
            if tg.is_subtype(n.type_name, pn.type_name)
            and guards_ok(pn.var, n.attrs)
            and n.id not in exclude
        ]
        candidates.append(cands)

    alias = {frozenset(p) for p in alias_pairs}
    host_edges = [(e.src, e.label, e.tgt) for e in g.edges.values()]
    results = []
    for combo in itertools.product(*candidates):
        emb = dict(bound)
        for pn, nid in zip(free, combo):
            emb[pn.var] = nid
        ok = True
        for i in range(len(free)):
            for j in range(i + 1, len(free)):
                if combo[i] == combo[j] and frozenset(
                    (free[i].var, free[j].var)
                ) not in alias:
                    ok = False
        for a, b in neq_pairs:
            if a in emb and b in emb and emb[a] == emb[b]:
                ok = False
        for pe in edges:
            if (emb[pe.src], pe.label, emb[pe.tgt]) not in host_edges:
                ok = False
        if ok:
            results.append(emb)
    results.sort(key=lambda m: tuple(m[pn.var] for pn in free))
    return results


def bf_rule_matches(g: InstanceGraph, rule, anchors=None) -> list[dict[str, int]]:
    """Independent rule matcher: embeddings, guards, parallel-edge
    multiplicity, then embargo rejection by nested brute force."""
    embs = bf_embeddings(
        g,
        rule.match_nodes,
        rule.match_edges,
        rule._match_guards,
        bound=anchors or {},
        alias_pairs=rule.alias_pairs,
    )
    out = []
    for emb in embs:
        need: dict[tuple[int, str, int], int] = {}
        for pe in rule.match_edges:
            key = (emb[pe.src], pe.label, emb[pe.tgt])
            need[key] = need.get(key, 0) + 1
        have_ok = True
        for (src, lbl, tgt), count in need.items():
            have = sum(
                1
                for e in g.edges.values()
                if e.src == src and e.tgt == tgt and e.label == lbl
            )
            if have < count:
                have_ok = False
        if not have_ok:
            continue
        blocked = False
        for frag in rule.embargo_fragments:
            if bf_embeddings(g, frag.nodes, frag.edges, frag.guards, bound=emb):
                blocked = True
                break
        if not blocked:
            out.append(emb)
    out.sort(key=lambda m: tuple(m[pn.var] for pn in rule.match_nodes))
    return out


# -- direct constraint oracles -----------------------------------------------------


def _edges(g: InstanceGraph, label: str):
    return [e for e in g.edges.values() if e.label == label]


def _is_type(g: InstanceGraph, nid: int, type_name: str) -> bool:
    return g.type_graph.is_subtype(g.nodes[nid].type_name, type_name)


def oracle_isWFfstEx(g: InstanceGraph) -> bool:
    fst_sources = {e.src for e in _edges(g, "fst") if _is_type(g, e.tgt, "Pointer")}
    return all(
        n.id in fst_sources for n in g.nodes.values() if n.type_name == "Array"
    )


def _has_double(g: InstanceGraph, label: str, end: str) -> bool:
    seen: dict[int, set[int]] = {}
    for e in _edges(g, label):
        key = e.src if end == "src" else e.tgt
        other = e.tgt if end == "src" else e.src
        seen.setdefault(key, set()).add(other)
    return any(len(v) > 1 for v in seen.values())


def oracle_notWFfstToV(g: InstanceGraph) -> bool:
    return _has_double(g, "fst", "src")


def oracle_notWFrefToV(g: InstanceGraph) -> bool:
    return _has_double(g, "ref", "src")


def oracle_notWFcontToV(g: InstanceGraph) -> bool:
    return _has_double(g, "cont", "src")


def oracle_notWFcontFromV(g: InstanceGraph) -> bool:
    return _has_double(g, "cont", "tgt")


def oracle_notWFsuccToV(g: InstanceGraph) -> bool:
    return _has_double(g, "succ", "src")


def oracle_notRIrefTofree(g: InstanceGraph) -> bool:
    return any(g.nodes[e.tgt].attrs.get("free") for e in _edges(g, "ref"))


def oracle_notRIrefWOcont(g: InstanceGraph) -> bool:
    cont_sources = {e.src for e in _edges(g, "cont")}
    return any(e.tgt not in cont_sources for e in _edges(g, "ref"))


def oracle_succ_chain_ok(g: InstanceGraph) -> bool:
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    for e in _edges(g, "succ"):
        if e.src in succ or e.tgt in pred:
            return False  # branching either way
        succ[e.src] = e.tgt
        pred[e.tgt] = e.src
    visited = set()
    for head in succ:
        if head in pred:
            continue
        cur = head
        while cur in succ:
            visited.add(cur)
            cur = succ[cur]
    return len(visited) == len(succ)  # anything unvisited sits on a cycle


CONSTRAINT_ORACLES = {
    "isWFfstEx": oracle_isWFfstEx,
    "notWFfstToV": oracle_notWFfstToV,
    "notWFrefToV": oracle_notWFrefToV,
    "notWFcontToV": oracle_notWFcontToV,
    "notWFcontFromV": oracle_notWFcontFromV,
    "notWFsuccToV": oracle_notWFsuccToV,
    "notRIrefTofree": oracle_notRIrefTofree,
    "notRIrefWOcont": oracle_notRIrefWOcont,
    "isWFsuccChain": oracle_succ_chain_ok,
}


def oracle_wellformed(g: InstanceGraph) -> bool:
    return (
        oracle_isWFfstEx(g)
        and not oracle_notWFfstToV(g)
        and not oracle_notWFrefToV(g)
        and not oracle_notWFcontToV(g)
        and not oracle_notWFcontFromV(g)
        and not oracle_notWFsuccToV(g)
        and oracle_succ_chain_ok(g)
    )


# -- naive isomorphism (for exploration counting) ------------------------------------


def bf_isomorphic(g1: InstanceGraph, g2: InstanceGraph, ignore=()) -> bool:
    """Permutation search over node bijections; fine for tiny graphs."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False

    def sig(g, n):
        return (n.type_name, tuple(sorted((k, v) for k, v in n.attrs.items() if k not in ignore)))

    ids1 = sorted(g1.nodes)
    for perm in itertools.permutations(sorted(g2.nodes)):
        mapping = dict(zip(ids1, perm))
        if any(sig(g1, g1.nodes[a]) != sig(g2, g2.nodes[b]) for a, b in mapping.items()):
            continue
        e1 = sorted((mapping[e.src], e.label, mapping[e.tgt]) for e in g1.edges.values())
        e2 = sorted((e.src, e.label, e.tgt) for e in g2.edges.values())
        if e1 == e2:
            return True
    return False


def bf_state_count(start: InstanceGraph, rules, depth: int, ignore=()) -> int:
    """Naive BFS with pairwise brute-force isomorphism collapsing."""
    from ptrgraph.rewrite import find_matches, rewrite

    states = [start]
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for g in frontier:
            for rule in rules:
                for match in find_matches(g, rule):
                    post = rewrite(g, match).graph
                    if not any(bf_isomorphic(post, s, ignore) for s in states):
                        states.append(post)
                        nxt.append(post)
        frontier = nxt
        if not frontier:
            break
    return len(states)


# -- flat-memory reference interpreter -----------------------------------------------


class OracleError(Exception):
    pass


class FlatMemory:
    """Reference interpreter over named locations; no graphs involved.

    Locations are strings; pointers hold a location or None; each int
    variable and each array cell owns one location. Storing a variable
    through a null pointer (the model's allocation idiom) aliases the
    pointer with the variable's own location.
    """

    def __init__(self, decls: list[Declaration], input_stream=(), pool: int = 8):
        self.store: dict[str, int] = {}
        self.int_vars: list[str] = []
        self.arrays: dict[str, list[str]] = {}
        self.pointers: dict[str, str | None] = {}
        self.addressed_vars: set[str] = set()
        self.pool_left = pool
        self.input = list(input_stream)
        self.ipos = 0
        self.transcript: list[str] = []
        for d in decls:
            if isinstance(d, IntVar):
                self.store[f"var:{d.name}"] = d.value
                self.int_vars.append(d.name)
            elif isinstance(d, ArrayDecl):
                locs = []
                for i, v in enumerate(d.values):
                    loc = f"{d.name}[{i}]"
                    self.store[loc] = v
                    locs.append(loc)
                self.arrays[d.name] = locs
            else:
                self.pointers[d.name] = None

    # -- helpers -----------------------------------------------------------

    def loc_of_var(self, name: str) -> str:
        return f"var:{name}"

    def pointer_loc(self, name: str) -> str | None:
        if name in self.arrays:
            return self.arrays[name][0]
        if name not in self.pointers:
            raise OracleError(f"{name} is not a pointer")
        return self.pointers[name]

    def read_input(self) -> int:
        if self.ipos >= len(self.input):
            raise OracleError("input exhausted")
        v = self.input[self.ipos]
        self.ipos += 1
        return v

    def eval(self, expr) -> int:
        from ptrgraph import frontend as f

        if isinstance(expr, f.IntLit):
            return expr.value
        if isinstance(expr, f.VarRef):
            if expr.name in self.pointers or expr.name in self.arrays:
                raise OracleError("pointer value in int context")
            return self.store[self.loc_of_var(expr.name)]
        if isinstance(expr, f.Deref):
            loc = self.pointer_loc(expr.name)
            if loc is None:
                raise OracleError("null dereference")
            return self.store[loc]
        if isinstance(expr, f.Index):
            return self.store[self.arrays[expr.name][expr.index]]
        if isinstance(expr, f.BinOp):
            left, right = self.eval(expr.left), self.eval(expr.right)
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            if right == 0:
                raise OracleError("division by zero")
            q = abs(left) // abs(right)
            return q if (left >= 0) == (right >= 0) else -q
        raise OracleError(f"cannot evaluate {expr!r}")

    # -- statements ----------------------------------------------------------

    def exec(self, stmt) -> None:
        from ptrgraph import frontend as f

        if isinstance(stmt, f.Printf):
            self.transcript.append(str(self.eval(stmt.arg)))
            return
        if isinstance(stmt, f.Scanf):
            self.store[self._scanf_loc(stmt)] = self.read_input()
            return
        if not isinstance(stmt, f.Assign):
            raise OracleError(f"unsupported statement {stmt!r}")
        lhs, rhs = stmt.lhs, stmt.rhs

        if isinstance(lhs, f.VarRef) and lhs.name in self.pointers:
            self.pointers[lhs.name] = self._pointer_rhs_loc(rhs)
            return
        if isinstance(lhs, f.VarRef):
            self.store[self.loc_of_var(lhs.name)] = self.eval(rhs)
            return
        if isinstance(lhs, f.Index):
            self.store[self.arrays[lhs.name][lhs.index]] = self.eval(rhs)
            return
        assert isinstance(lhs, f.Deref)
        loc = self.pointer_loc(lhs.name)
        if loc is None:
            # the allocation idiom: bind the pointer to the variable's location
            if not isinstance(rhs, f.VarRef) or rhs.name not in self.int_vars:
                raise OracleError("null write needs a named int variable")
            if self.pool_left <= 0:
                raise OracleError("pool exhausted")
            self.pool_left -= 1
            self.pointers[lhs.name] = self.loc_of_var(rhs.name)
            self.addressed_vars.add(rhs.name)
            return
        self.store[loc] = self.eval(rhs)

    def _scanf_loc(self, stmt) -> str:
        from ptrgraph import frontend as f

        target = stmt.target
        if stmt.has_amp:
            if isinstance(target, f.Index):
                return self.arrays[target.name][target.index]
            if isinstance(target, f.VarRef) and target.name in self.int_vars:
                raise OracleError("address-of an unaddressed variable")
            raise OracleError("unsupported scanf target")
        if isinstance(target, f.VarRef):
            loc = self.pointer_loc(target.name)
            if loc is None:
                raise OracleError("null dereference")
            return loc
        raise OracleError("unsupported scanf target")

    def _pointer_rhs_loc(self, rhs) -> str:
        from ptrgraph import frontend as f

        if isinstance(rhs, f.AddrOf) and isinstance(rhs.target, f.Deref):
            rhs = f.VarRef(rhs.target.name)
        if isinstance(rhs, f.VarRef):
            loc = self.pointer_loc(rhs.name)
            if loc is None:
                raise OracleError("copying a null pointer")
            return loc
        if isinstance(rhs, f.AddrOf) and isinstance(rhs.target, f.Index):
            return self.arrays[rhs.target.name][rhs.target.index]
        raise OracleError(f"unsupported pointer rhs {rhs!r}")

    # -- final observation ------------------------------------------------------

    def snapshot(self) -> dict[str, int]:
        out = {}
        for name in self.int_vars:
            out[name] = self.store[self.loc_of_var(name)]
        for name, locs in self.arrays.items():
            for i, loc in enumerate(locs):
                out[f"{name}[{i}]"] = self.store[loc]
        return out


def engine_snapshot(g: InstanceGraph, env: dict[str, int], decls) -> dict[str, int]:
    """Same observation extracted from the engine's final graph."""
    out = {}
    for d in decls:
        if isinstance(d, IntVar):
            out[d.name] = g.nodes[env[d.name]].attrs["val"]
        elif isinstance(d, ArrayDecl):
            array_id = env[d.name]
            ptr = next(e.tgt for e in g.edges.values() if e.label == "fst" and e.src == array_id)
            addr = next(e.tgt for e in g.edges.values() if e.label == "ref" and e.src == ptr)
            for i in range(len(d.values)):
                obj = next(e.tgt for e in g.edges.values() if e.label == "cont" and e.src == addr)
                out[f"{d.name}[{i}]"] = g.nodes[obj].attrs["val"]
                if i + 1 < len(d.values):
                    addr = next(
                        e.tgt for e in g.edges.values() if e.label == "succ" and e.src == addr
                    )
    return out


# -- random generators ------------------------------------------------------------------


def random_wf_graph(rng: random.Random, max_nodes: int = 12) -> InstanceGraph:
    """Random well-formed memory graph (referential integrity may or may not
    hold: pointers sometimes dangle into the free chain)."""
    g = InstanceGraph(build_type_graph())
    addresses: list[int] = []  # allocated, with content
    free_addrs: list[int] = []
    ints: list[int] = []

    def room(needed: int) -> bool:
        return len(g.nodes) + needed <= max_nodes

    if rng.random() < 0.6 and room(2 + 2 * 2):
        n = rng.randint(1, 2)
        g, array_id = g.add_node("Array", {"name": "a", "len": n})
        g, ptr = g.add_node("Pointer")
        g, _ = g.add_edge(array_id, "fst", ptr)
        prev = None
        for i in range(n):
            g, addr = g.add_node("Address", {"free": False})
            g, cell = g.add_node("Int", {"val": rng.randint(0, 9)})
            g, _ = g.add_edge(addr, "cont", cell)
            if i == 0:
                g, _ = g.add_edge(ptr, "ref", addr)
            else:
                g, _ = g.add_edge(prev, "succ", addr)
            addresses.append(addr)
            prev = addr

    while rng.random() < 0.5 and room(1):
        g, nid = g.add_node("Int", {"name": rng.choice("xyz"), "val": rng.randint(0, 9)})
        ints.append(nid)

    prev = None
    while rng.random() < 0.4 and room(1):
        g, addr = g.add_node("Address", {"free": True})
        if prev is not None and rng.random() < 0.7:
            g, _ = g.add_edge(prev, "succ", addr)
        free_addrs.append(addr)
        prev = addr

    while rng.random() < 0.6 and room(1):
        g, ptr = g.add_node("Pointer")
        roll = rng.random()
        targets = addresses + free_addrs
        if roll < 0.6 and targets:
            g, _ = g.add_edge(ptr, "ref", rng.choice(targets))
    return g


_POOL = 8


@dataclass
class GeneratedProgram:
    decls: list[Declaration]
    lines: list[str] = field(default_factory=list)
    input_stream: list[int] = field(default_factory=list)


def random_program(rng: random.Random, max_len: int = 10) -> GeneratedProgram:
    """Random straight-line UB-free program over random declarations.

    The generator tracks a FlatMemory instance so every emitted statement is
    legal both in C (no UB) and in the engine's modelled subset.
    """
    n_ints = rng.randint(1, 3)
    n_ptrs = rng.randint(1, 3)
    arr_len = rng.randint(2, 4)
    decls: list[Declaration] = []
    for i in range(n_ints):
        decls.append(IntVar(f"v{i}", rng.randint(0, 9)))
    decls.append(ArrayDecl("arr", tuple(rng.randint(0, 9) for _ in range(arr_len))))
    for i in range(n_ptrs):
        decls.append(PointerVar(f"p{i}"))

    prog = GeneratedProgram(decls)
    mem = FlatMemory(decls, input_stream=[], pool=_POOL)
    mem.input = prog.input_stream  # grows as scanfs are emitted

    from ptrgraph.frontend import parse_statement

    ptr_names = [d.name for d in decls if isinstance(d, PointerVar)]
    int_names = [d.name for d in decls if isinstance(d, IntVar)]

    def non_null_ptrs():
        return [p for p in ptr_names if mem.pointers[p] is not None]

    def rand_expr(depth: int = 0) -> str:
        choices = ["lit", "var", "cell"]
        if non_null_ptrs():
            choices.append("deref")
        if depth == 0:
            choices += ["arith", "arith"]
        kind = rng.choice(choices)
        if kind == "lit":
            return str(rng.randint(0, 99))
        if kind == "var":
            return rng.choice(int_names)
        if kind == "cell":
            return f"arr[{rng.randint(0, arr_len - 1)}]"
        if kind == "deref":
            return f"*{rng.choice(non_null_ptrs())}"
        op = rng.choice(["+", "-", "*", "/"])
        if op == "*":
            return f"({rng.randint(0, 99)} * {rng.randint(0, 99)})"
        if op == "/":
            return f"({rand_expr(1)} / {rng.randint(1, 9)})"
        return f"({rand_expr(1)} {op} {rand_expr(1)})"

    attempts = 0
    while len(prog.lines) < max_len and attempts < max_len * 30:
        attempts += 1
        kind = rng.choice(
            ["copy_referent", "ptr_copy", "ptr_array", "write_deref", "null_store",
             "write_cell", "scanf", "printf"]
        )
        line = None
        if kind == "copy_referent":
            sources = non_null_ptrs() + ["arr"]
            targets = [v for v in int_names if v not in mem.addressed_vars]
            if sources and targets:
                src = rng.choice(sources)
                expr = f"*{src}" if rng.random() < 0.7 or src != "arr" else "arr[0]"
                line = f"{rng.choice(targets)} = {expr};"
        elif kind == "ptr_copy":
            sources = non_null_ptrs() + ["arr"]
            if sources:
                src = rng.choice(sources)
                targets = [p for p in ptr_names if p != src]
                if targets:
                    tmpl = rng.choice(["{t} = {s};", "{t} = &*{s};"])
                    if src == "arr":
                        tmpl = "{t} = {s};"
                    line = tmpl.format(t=rng.choice(targets), s=src)
        elif kind == "ptr_array":
            p = rng.choice(ptr_names)
            k = rng.randint(0, arr_len - 1)
            if mem.pointers[p] != f"arr[{k}]":
                line = f"{p} = &arr[{k}];"
        elif kind == "write_deref":
            ps = non_null_ptrs()
            if ps:
                line = f"*{rng.choice(ps)} = {rand_expr()};"
        elif kind == "null_store":
            nulls = [p for p in ptr_names if mem.pointers[p] is None]
            frees = [v for v in int_names if v not in mem.addressed_vars]
            if nulls and frees and mem.pool_left > 0:
                line = f"*{rng.choice(nulls)} = {rng.choice(frees)};"
        elif kind == "write_cell":
            line = f"arr[{rng.randint(0, arr_len - 1)}] = {rand_expr()};"
        elif kind == "scanf":
            value = rng.randint(0, 99)
            if rng.random() < 0.5 and non_null_ptrs():
                line = f'scanf("%i", {rng.choice(non_null_ptrs())});'
            else:
                line = f'scanf("%i", &arr[{rng.randint(0, arr_len - 1)}]);'
            if line:
                prog.input_stream.append(value)
        else:
            line = f'printf("%i", {rand_expr()});'

        if line is None:
            continue
        mem.exec(parse_statement(line))
        prog.lines.append(line)
    return prog
