"""Quantified graph constraints, the well-formedness/referential-integrity
catalog, and ``G(...)`` invariant checking over state sequences.

A pattern constraint is a chain/tree of quantifier levels (``forall`` /
``exists``), each carrying a graph fragment. Matching is deliberately
non-injective: two pattern nodes may land on the same host node, and only
explicit inequality pairs (the catalog's ``p1 != p2`` edges) force
distinctness. That is what makes the cardinality constraints exact, e.g.
an address whose two successors include itself still has two successors.
Negative fragments block a binding when they extend it. A constraint is
either a requirement (``require``: the formula must hold) or a forbidden
pattern (``forbid``: any occurrence is a violation, reported with a
witness binding).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ptrgraph.errors import TypeGraphMismatch, UnknownConstraint
from ptrgraph.graphs import InstanceGraph
from ptrgraph.matching import AttrGuard, PatternEdge, PatternNode, find_embeddings

HOLDS = "holds"
VIOLATED = "violated"


@dataclass(frozen=True)
class Fragment:
    nodes: tuple[PatternNode, ...]
    edges: tuple[PatternEdge, ...]
    guards: tuple[AttrGuard, ...] = ()
    neq_pairs: tuple[tuple[str, str], ...] = ()


@dataclass
class Level:
    kind: str  # "forall" | "exists"
    fragment: Fragment
    children: list["Level"] = field(default_factory=list)
    negatives: list[Fragment] = field(default_factory=list)


@dataclass(frozen=True)
class ConstraintReport:
    constraint: str
    verdict: str  # "holds" | "violated"
    witness: dict[str, int] | None = None
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        d = {"constraint": self.constraint, "verdict": self.verdict}
        if self.witness is not None:
            d["witness"] = dict(self.witness)
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class Constraint:
    """Pattern constraint with quantifier levels."""

    name: str
    mode: str  # "require" | "forbid"
    root: Level
    description: str = ""

    def satisfied(self, g: InstanceGraph) -> bool:
        """Truth of the quantified formula itself.

        For ``forbid`` constraints this is "the pattern occurs", the value
        the constraint's name denotes inside temporal formulas (hence
        ``G(!notWFfstToV)``); the well-formedness verdict is the
        mode-adjusted :meth:`report`.
        """
        truth, _ = _level_truth(g, self.root, {})
        return truth

    def report(self, g: InstanceGraph) -> ConstraintReport:
        _check_types(g, self.root)
        truth, witness = _level_truth(g, self.root, {})
        if self.mode == "require":
            if truth:
                return ConstraintReport(self.name, HOLDS)
            return ConstraintReport(
                self.name, VIOLATED, witness, "required pattern is missing"
            )
        if truth:
            return ConstraintReport(
                self.name, VIOLATED, witness, "forbidden pattern occurs"
            )
        return ConstraintReport(self.name, HOLDS)


def _check_types(g: InstanceGraph, level: Level) -> None:
    for pn in level.fragment.nodes:
        if not g.type_graph.has_type(pn.type_name):
            raise TypeGraphMismatch(
                f"constraint refers to node type {pn.type_name!r} missing from "
                f"type graph {g.type_graph.name!r}"
            )
    for frag in level.negatives:
        for pn in frag.nodes:
            if not g.type_graph.has_type(pn.type_name):
                raise TypeGraphMismatch(
                    f"constraint refers to node type {pn.type_name!r} missing from "
                    f"type graph {g.type_graph.name!r}"
                )
    for child in level.children:
        _check_types(g, child)


def _level_truth(
    g: InstanceGraph,
    level: Level,
    binding: dict[str, int],
) -> tuple[bool, dict[str, int] | None]:
    """Evaluate one quantifier level under an outer binding.

    Returns (truth, witness): for a failing ``forall`` the witness is the
    first binding whose body fails; for a succeeding ``exists`` it is the
    first binding whose body holds. Enumeration order is deterministic
    (lexicographically smallest host ids first).
    """
    frag = level.fragment
    embeddings = find_embeddings(
        g,
        frag.nodes,
        frag.edges,
        frag.guards,
        bound=binding,
        injective=False,
        neq_pairs=frag.neq_pairs,
    )
    for emb in embeddings:
        ok = _body_holds(g, level, emb)
        if level.kind == "forall" and not ok:
            return False, dict(emb)
        if level.kind == "exists" and ok:
            return True, dict(emb)
    return (True, None) if level.kind == "forall" else (False, None)


def _body_holds(g: InstanceGraph, level: Level, binding: dict[str, int]) -> bool:
    for frag in level.negatives:
        # negative fragments may overlap outer images freely
        hit = find_embeddings(
            g,
            frag.nodes,
            frag.edges,
            frag.guards,
            bound=binding,
            injective=False,
            neq_pairs=frag.neq_pairs,
            limit=1,
        )
        if hit:
            return False
    for child in level.children:
        truth, _ = _level_truth(g, child, binding)
        if not truth:
            return False
    return True


class SuccChainConstraint:
    """Addresses must form disjoint simple ``succ`` chains.

    Linearity of the address space is not a finite pattern (cycles of any
    length must be excluded), so this check is algorithmic: per-node
    in/out-degree at most one and no cycles.
    """

    name = "isWFsuccChain"
    mode = "require"
    description = "succ edges form disjoint simple chains (no branching, no cycles)"

    def satisfied(self, g: InstanceGraph) -> bool:
        return self.report(g).holds

    def report(self, g: InstanceGraph) -> ConstraintReport:
        succ: dict[int, list[int]] = {}
        pred: dict[int, list[int]] = {}
        for e in sorted(g.edges.values(), key=lambda e: e.id):
            if e.label != "succ":
                continue
            succ.setdefault(e.src, []).append(e.tgt)
            pred.setdefault(e.tgt, []).append(e.src)
        for nid in sorted(succ):
            if len(succ[nid]) > 1:
                return ConstraintReport(
                    self.name, VIOLATED, {"address": nid},
                    f"address {nid} has {len(succ[nid])} successors",
                )
        for nid in sorted(pred):
            if len(pred[nid]) > 1:
                return ConstraintReport(
                    self.name, VIOLATED, {"address": nid},
                    f"address {nid} has {len(pred[nid])} predecessors",
                )
        # in/out degrees are all <= 1; any edge not reachable from a chain
        # head sits on a cycle
        heads = [nid for nid in sorted(succ) if nid not in pred]
        seen: set[int] = set()
        for head in heads:
            cur = head
            while cur in succ and cur not in seen:
                seen.add(cur)
                cur = succ[cur][0]
        cyclic = sorted(set(succ) - seen)
        if cyclic:
            return ConstraintReport(
                self.name, VIOLATED, {"address": cyclic[0]},
                f"succ cycle through address {cyclic[0]}",
            )
        return ConstraintReport(self.name, HOLDS)


# -- catalog ----------------------------------------------------------------

_CATALOG_DSL = """
# For every array there is an fst edge to a pointer.
constraint isWFfstEx
require
forall
  node a: Array
exists
  node p: Pointer
  edge a -fst-> p

# An array with fst edges to two different pointers.
constraint notWFfstToV
forbid
exists
  node a: Array
  node p1: Pointer
  node p2: Pointer
  edge a -fst-> p1
  edge a -fst-> p2
  p1 != p2

# A pointer referring to two different addresses.
constraint notWFrefToV
forbid
exists
  node p: Pointer
  node a1: Address
  node a2: Address
  edge p -ref-> a1
  edge p -ref-> a2
  a1 != a2

# An address containing two different objects.
constraint notWFcontToV
forbid
exists
  node a: Address
  node o1: Object
  node o2: Object
  edge a -cont-> o1
  edge a -cont-> o2
  o1 != o2

# An object stored at two different addresses.
constraint notWFcontFromV
forbid
exists
  node o: Object
  node a1: Address
  node a2: Address
  edge a1 -cont-> o
  edge a2 -cont-> o
  a1 != a2

# An address with two different succ-successors.
constraint notWFsuccToV
forbid
exists
  node a: Address
  node b1: Address
  node b2: Address
  edge a -succ-> b1
  edge a -succ-> b2
  b1 != b2

# A pointer referring to a free (unallocated) address.
constraint notRIrefTofree
forbid
exists
  node p: Pointer
  node a: Address
  edge p -ref-> a
  a.free == true

# A pointer referring to an address that holds no object.
constraint notRIrefWOcont
forbid
exists
  node p: Pointer
  node a: Address
  edge p -ref-> a
  not
    node o: Object
    edge a -cont-> o
  end
"""

WF_NAMES = (
    "isWFfstEx",
    "notWFfstToV",
    "notWFrefToV",
    "notWFcontToV",
    "notWFcontFromV",
    "notWFsuccToV",
    "isWFsuccChain",
)
RI_NAMES = ("notRIrefTofree", "notRIrefWOcont")

WF_FORMULA = "G (isWFfstEx & ! notWFfstToV)"
RI_FORMULA = "G (! notRIrefTofree & ! notRIrefWOcont)"

_catalog_cache: dict[str, object] | None = None


def catalog() -> dict:
    """Name -> constraint for the built-in WF and RI catalog."""
    global _catalog_cache
    if _catalog_cache is None:
        from ptrgraph.dsl import parse_constraints

        items: dict[str, object] = {c.name: c for c in parse_constraints(_CATALOG_DSL)}
        items[SuccChainConstraint.name] = SuccChainConstraint()
        _catalog_cache = items
    return dict(_catalog_cache)


def eval_constraint(g: InstanceGraph, constraint) -> ConstraintReport:
    """Evaluate one constraint (object or catalog name) on a snapshot."""
    if isinstance(constraint, str):
        cat = catalog()
        if constraint not in cat:
            raise UnknownConstraint(f"no constraint named {constraint!r}")
        constraint = cat[constraint]
    return constraint.report(g)


def check_wellformed(g: InstanceGraph) -> list[ConstraintReport]:
    cat = catalog()
    return [cat[name].report(g) for name in WF_NAMES]


def check_referential_integrity(g: InstanceGraph) -> list[ConstraintReport]:
    cat = catalog()
    return [cat[name].report(g) for name in RI_NAMES]


def is_wellformed(g: InstanceGraph) -> bool:
    return all(r.holds for r in check_wellformed(g))


# -- temporal formulas --------------------------------------------------------


@dataclass(frozen=True)
class TemporalFormula:
    """``G(phi)`` where phi is a propositional combination of constraint names."""

    text: str
    expr: tuple

    def atoms(self) -> set[str]:
        out: set[str] = set()

        def walk(e: tuple) -> None:
            if e[0] == "atom":
                out.add(e[1])
            else:
                for sub in e[1:]:
                    walk(sub)

        walk(self.expr)
        return out


@dataclass(frozen=True)
class FormulaVerdict:
    holds: bool
    violation_index: int | None = None
    reports: tuple[ConstraintReport, ...] = ()

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violationIndex": self.violation_index,
            "reports": [r.to_dict() for r in self.reports],
        }


def parse_formula(text: str) -> TemporalFormula:
    """Parse ``G (expr)`` with ``!``, ``&``, ``|`` and parentheses."""
    tokens = _tokenize_formula(text)
    if not tokens or tokens[0] != "G":
        raise UnknownConstraint(f"formula must start with G: {text!r}")
    expr, rest = _parse_or(tokens[1:])
    if rest:
        raise UnknownConstraint(f"trailing tokens in formula: {rest!r}")
    return TemporalFormula(text=text.strip(), expr=expr)


def _tokenize_formula(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "!&|()":
            out.append(ch)
            i += 1
        else:
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] in "_:"):
                j += 1
            if j == i:
                raise UnknownConstraint(f"bad character {ch!r} in formula")
            out.append(text[i:j])
            i = j
    return out


def _parse_or(tokens: list[str]) -> tuple[tuple, list[str]]:
    left, tokens = _parse_and(tokens)
    while tokens and tokens[0] == "|":
        right, tokens = _parse_and(tokens[1:])
        left = ("or", left, right)
    return left, tokens


def _parse_and(tokens: list[str]) -> tuple[tuple, list[str]]:
    left, tokens = _parse_not(tokens)
    while tokens and tokens[0] == "&":
        right, tokens = _parse_not(tokens[1:])
        left = ("and", left, right)
    return left, tokens


def _parse_not(tokens: list[str]) -> tuple[tuple, list[str]]:
    if not tokens:
        raise UnknownConstraint("formula ended unexpectedly")
    if tokens[0] == "!":
        inner, rest = _parse_not(tokens[1:])
        return ("not", inner), rest
    if tokens[0] == "(":
        inner, rest = _parse_or(tokens[1:])
        if not rest or rest[0] != ")":
            raise UnknownConstraint("unbalanced parenthesis in formula")
        return inner, rest[1:]
    name = tokens[0]
    if name in "&|()!G":
        raise UnknownConstraint(f"unexpected token {name!r} in formula")
    return ("atom", name), tokens[1:]


def _eval_expr(expr: tuple, values: Mapping[str, bool]) -> bool:
    op = expr[0]
    if op == "atom":
        return values[expr[1]]
    if op == "not":
        return not _eval_expr(expr[1], values)
    if op == "and":
        return _eval_expr(expr[1], values) and _eval_expr(expr[2], values)
    return _eval_expr(expr[1], values) or _eval_expr(expr[2], values)


def eval_formula_on_trace(
    states: Sequence[InstanceGraph],
    formula: TemporalFormula | str,
    registry: Mapping[str, object] | None = None,
) -> FormulaVerdict:
    """``G(phi)``: phi must hold in every state; reports the first failure."""
    if isinstance(formula, str):
        formula = parse_formula(formula)
    reg = dict(registry) if registry is not None else catalog()
    names = sorted(formula.atoms())
    for name in names:
        if name not in reg:
            raise UnknownConstraint(f"formula references unknown constraint {name!r}")
    for index, g in enumerate(states):
        values = {name: reg[name].satisfied(g) for name in names}
        if not _eval_expr(formula.expr, values):
            reports = tuple(reg[name].report(g) for name in names)
            return FormulaVerdict(False, index, reports)
    return FormulaVerdict(True)


def constraints_from_dsl(text: str) -> dict[str, Constraint]:
    """Load extra constraints from DSL text (same syntax as the catalog)."""
    from ptrgraph.dsl import parse_constraints

    return {c.name: c for c in parse_constraints(text)}
