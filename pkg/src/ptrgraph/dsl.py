"""Textual DSL for rewrite rules and graph constraints.

One rule per file/text block. Grammar (also documented in docs/rule-dsl.md):

    rule <name>
    param <name> [= <int>]
    anchor <var>: <TypeName>
    allow-alias <var> <var>

    nodes
      keep|del|new|forbid <var>: <TypeName>
    edges
      keep|del|new|forbid <src> -<label>-> <tgt>
    guards
      <var>.<attr> == <literal>     # literal: int, true, false, "text"
      <var>.<attr> != <literal>
    assign
      set <var>.<attr> = <literal> | <other>.<attr> | $<param>

Constraints reuse the node/edge/guard line syntax:

    constraint <name>
    require | forbid
    forall | exists               # opens a nested quantifier level
      node <var>: <TypeName>
      edge <src> -<label>-> <tgt>
      <var> != <var>
      not                          # negative fragment of the current level
        ...node/edge/guard lines...
      end

Comment lines start with ``#``; indentation is not significant.
"""

from __future__ import annotations

import re

from ptrgraph.constraints import Constraint, Fragment, Level
from ptrgraph.errors import DslSyntaxError, RoleConflict
from ptrgraph.graphs import AttrValue
from ptrgraph.matching import AttrGuard, PatternEdge, PatternNode
from ptrgraph.rewrite import (
    DEL,
    FORBID,
    KEEP,
    NEW,
    Assignment,
    Rule,
    RuleEdge,
    RuleNode,
)

_NAME = r"[A-Za-z_][A-Za-z0-9_:()]*"
_VAR = r"[A-Za-z_][A-Za-z0-9_]*"

_RULE_HEADER = re.compile(rf"^rule\s+({_NAME})\s*$")
_CONSTRAINT_HEADER = re.compile(rf"^constraint\s+({_NAME})\s*$")
_PARAM = re.compile(rf"^param\s+({_VAR})(?:\s*=\s*(-?\d+))?\s*$")
_ANCHOR = re.compile(rf"^anchor\s+({_VAR})\s*:\s*({_VAR})\s*$")
_ALIAS = re.compile(rf"^allow-alias\s+({_VAR})\s+({_VAR})\s*$")
_NODE = re.compile(rf"^(keep|del|new|forbid)\s+({_VAR})\s*:\s*({_VAR})\s*$")
_EDGE = re.compile(
    rf"^(keep|del|new|forbid)\s+({_VAR})\s*-({_VAR})->\s*({_VAR})\s*$"
)
_GUARD = re.compile(
    rf"^({_VAR})\.({_VAR})\s*(==|!=)\s*(-?\d+|true|false|\"[^\"]*\")\s*$"
)
_ASSIGN = re.compile(
    rf"^set\s+({_VAR})\.({_VAR})\s*=\s*"
    rf"(\$({_VAR})|({_VAR})\.({_VAR})|-?\d+|true|false|\"[^\"]*\")\s*$"
)
_PLAIN_NODE = re.compile(rf"^node\s+({_VAR})\s*:\s*({_VAR})\s*$")
_PLAIN_EDGE = re.compile(rf"^edge\s+({_VAR})\s*-({_VAR})->\s*({_VAR})\s*$")
_NEQ = re.compile(rf"^({_VAR})\s*!=\s*({_VAR})\s*$")


def _literal(text: str) -> AttrValue:
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith('"'):
        return text[1:-1]
    return int(text)


def _lines(text: str) -> list[tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append((i, stripped))
    return out


def _description(text: str) -> str:
    for raw in text.splitlines():
        s = raw.strip()
        if s.startswith("#"):
            return s.lstrip("#").strip()
        if s:
            break
    return ""


def parse_rule(text: str) -> Rule:
    """Parse one rule; raises :class:`DslSyntaxError`/:class:`RoleConflict`
    with 1-based source positions."""
    lines = _lines(text)
    if not lines or not _RULE_HEADER.match(lines[0][1]):
        line = lines[0][0] if lines else 1
        raise DslSyntaxError("expected 'rule <name>' header", line, 1)
    name = _RULE_HEADER.match(lines[0][1]).group(1)

    nodes: list[RuleNode] = []
    edges: list[RuleEdge] = []
    guards: list[AttrGuard] = []
    assignments: list[Assignment] = []
    anchors: dict[str, str] = {}
    alias_pairs: list[tuple[str, str]] = []
    params: dict[str, int | None] = {}
    node_roles: dict[str, tuple[str, int]] = {}
    edge_roles: dict[tuple[str, str, str], tuple[str, int]] = {}

    def declare_node(var: str, type_name: str, role: str, lineno: int) -> None:
        if var in node_roles:
            prev_role, prev_line = node_roles[var]
            if prev_role != role:
                raise RoleConflict(
                    f"node {var!r} tagged both {prev_role!r} (line {prev_line}) "
                    f"and {role!r}",
                    lineno,
                    1,
                )
            raise DslSyntaxError(f"node {var!r} declared twice", lineno, 1)
        node_roles[var] = (role, lineno)
        nodes.append(RuleNode(var, type_name, role))

    section = None
    for lineno, line in lines[1:]:
        if line in ("nodes", "edges", "guards", "assign"):
            section = line
            continue
        m = _PARAM.match(line)
        if m:
            params[m.group(1)] = int(m.group(2)) if m.group(2) is not None else None
            continue
        m = _ANCHOR.match(line)
        if m:
            var, type_name = m.group(1), m.group(2)
            anchors[var] = type_name
            declare_node(var, type_name, KEEP, lineno)
            continue
        m = _ALIAS.match(line)
        if m:
            alias_pairs.append((m.group(1), m.group(2)))
            continue
        if section == "nodes":
            m = _NODE.match(line)
            if not m:
                raise DslSyntaxError(f"bad node line: {line!r}", lineno, 1)
            declare_node(m.group(2), m.group(3), m.group(1), lineno)
            continue
        if section == "edges":
            m = _EDGE.match(line)
            if not m:
                raise DslSyntaxError(f"bad edge line: {line!r}", lineno, 1)
            role, src, label, tgt = m.groups()
            key = (src, label, tgt)
            if key in edge_roles and edge_roles[key][0] != role:
                raise RoleConflict(
                    f"edge {src}-{label}->{tgt} tagged both "
                    f"{edge_roles[key][0]!r} (line {edge_roles[key][1]}) and {role!r}",
                    lineno,
                    1,
                )
            edge_roles.setdefault(key, (role, lineno))
            edges.append(RuleEdge(src, label, tgt, role))
            continue
        if section == "guards":
            m = _GUARD.match(line)
            if not m:
                raise DslSyntaxError(f"bad guard line: {line!r}", lineno, 1)
            guards.append(
                AttrGuard(m.group(1), m.group(2), m.group(3), _literal(m.group(4)))
            )
            continue
        if section == "assign":
            m = _ASSIGN.match(line)
            if not m:
                raise DslSyntaxError(f"bad assign line: {line!r}", lineno, 1)
            target, attr = m.group(1), m.group(2)
            if m.group(4):  # $param
                assignments.append(Assignment(target, attr, "param", source_var=m.group(4)))
            elif m.group(5):  # var.attr copy
                assignments.append(
                    Assignment(
                        target, attr, "copy", source_var=m.group(5), source_attr=m.group(6)
                    )
                )
            else:
                assignments.append(Assignment(target, attr, "lit", value=_literal(m.group(3))))
            continue
        raise DslSyntaxError(f"unexpected line outside any section: {line!r}", lineno, 1)

    _validate_rule(name, nodes, edges, guards, assignments, params, lines)
    return Rule(
        name=name,
        nodes=nodes,
        edges=edges,
        guards=guards,
        assignments=assignments,
        anchors=anchors,
        alias_pairs=alias_pairs,
        params=params,
        description=_description(text),
    )


def _validate_rule(name, nodes, edges, guards, assignments, params, lines) -> None:
    roles = {n.var: n.role for n in nodes}
    lineno = lines[0][0]

    def role_of(var: str) -> str:
        if var not in roles:
            raise DslSyntaxError(f"rule {name!r}: undeclared variable {var!r}", lineno, 1)
        return roles[var]

    for e in edges:
        s, t = role_of(e.src), role_of(e.tgt)
        if e.role in (KEEP, DEL):
            if s not in (KEEP, DEL) or t not in (KEEP, DEL):
                raise DslSyntaxError(
                    f"rule {name!r}: matched edge {e.src}-{e.label}->{e.tgt} "
                    "touches a non-matched node",
                    lineno,
                    1,
                )
        elif e.role == NEW:
            if s not in (KEEP, NEW) or t not in (KEEP, NEW):
                raise DslSyntaxError(
                    f"rule {name!r}: created edge {e.src}-{e.label}->{e.tgt} "
                    "must connect kept or created nodes",
                    lineno,
                    1,
                )
        else:  # FORBID
            if s == NEW or t == NEW:
                raise DslSyntaxError(
                    f"rule {name!r}: forbidden edge cannot touch created nodes",
                    lineno,
                    1,
                )
    for gd in guards:
        if role_of(gd.var) == NEW:
            raise DslSyntaxError(
                f"rule {name!r}: guard on created node {gd.var!r}", lineno, 1
            )
    for a in assignments:
        if role_of(a.target) in (DEL, FORBID):
            raise DslSyntaxError(
                f"rule {name!r}: assignment to {a.target!r} which is not preserved",
                lineno,
                1,
            )
        if a.source_kind == "copy" and role_of(a.source_var) not in (KEEP, DEL):
            raise DslSyntaxError(
                f"rule {name!r}: assignment copies from unmatched node {a.source_var!r}",
                lineno,
                1,
            )
        if a.source_kind == "param" and a.source_var not in params:
            raise DslSyntaxError(
                f"rule {name!r}: unknown parameter ${a.source_var}", lineno, 1
            )


def parse_constraint(text: str) -> Constraint:
    """Parse one quantified constraint (see module docstring for grammar)."""
    lines = _lines(text)
    if not lines or not _CONSTRAINT_HEADER.match(lines[0][1]):
        line = lines[0][0] if lines else 1
        raise DslSyntaxError("expected 'constraint <name>' header", line, 1)
    name = _CONSTRAINT_HEADER.match(lines[0][1]).group(1)
    if len(lines) < 2 or lines[1][1] not in ("require", "forbid"):
        raise DslSyntaxError(
            "expected 'require' or 'forbid' after constraint header",
            lines[1][0] if len(lines) > 1 else lines[0][0],
            1,
        )
    mode = lines[1][1]

    # quantifier levels form a chain; each entry is (kind, positive fragment
    # builder, list of finished negative fragments)
    stack: list[tuple[str, _FragmentBuilder, list[Fragment]]] = []
    neg: _FragmentBuilder | None = None

    for lineno, line in lines[2:]:
        if line in ("forall", "exists"):
            if neg is not None:
                raise DslSyntaxError("quantifier inside 'not' block", lineno, 1)
            stack.append((line, _FragmentBuilder(), []))
            continue
        if line == "not":
            if not stack:
                raise DslSyntaxError("'not' before any quantifier", lineno, 1)
            if neg is not None:
                raise DslSyntaxError("nested 'not' blocks are not supported", lineno, 1)
            neg = _FragmentBuilder()
            continue
        if line == "end":
            if neg is None:
                raise DslSyntaxError("'end' without open 'not' block", lineno, 1)
            stack[-1][2].append(neg.build())
            neg = None
            continue
        target = neg if neg is not None else (stack[-1][1] if stack else None)
        if target is None:
            raise DslSyntaxError(f"pattern line before any quantifier: {line!r}", lineno, 1)
        m = _PLAIN_NODE.match(line)
        if m:
            target.nodes.append(PatternNode(m.group(1), m.group(2)))
            continue
        m = _PLAIN_EDGE.match(line)
        if m:
            target.edges.append(PatternEdge(m.group(1), m.group(2), m.group(3)))
            continue
        m = _GUARD.match(line)
        if m:
            target.guards.append(
                AttrGuard(m.group(1), m.group(2), m.group(3), _literal(m.group(4)))
            )
            continue
        m = _NEQ.match(line)
        if m:
            target.neq_pairs.append((m.group(1), m.group(2)))
            continue
        raise DslSyntaxError(f"bad constraint line: {line!r}", lineno, 1)

    if neg is not None:
        raise DslSyntaxError("unterminated 'not' block", lines[-1][0], 1)
    if not stack:
        raise DslSyntaxError("constraint has no quantifier level", lines[-1][0], 1)

    root: Level | None = None
    for kind, builder, negatives in reversed(stack):
        level = Level(
            kind=kind,
            fragment=builder.build(),
            children=[] if root is None else [root],
            negatives=negatives,
        )
        root = level
    return Constraint(name=name, mode=mode, root=root, description=_description(text))


class _FragmentBuilder:
    def __init__(self) -> None:
        self.nodes: list[PatternNode] = []
        self.edges: list[PatternEdge] = []
        self.guards: list[AttrGuard] = []
        self.neq_pairs: list[tuple[str, str]] = []

    def build(self) -> Fragment:
        return Fragment(
            tuple(self.nodes), tuple(self.edges), tuple(self.guards), tuple(self.neq_pairs)
        )


def parse_rules(text: str) -> list[Rule]:
    """Parse a catalog file holding several ``rule`` blocks."""
    return [parse_rule(block) for block in _split_blocks(text, "rule ")]


def parse_constraints(text: str) -> list[Constraint]:
    """Parse a catalog file holding several ``constraint`` blocks."""
    return [parse_constraint(block) for block in _split_blocks(text, "constraint ")]


def _split_blocks(text: str, header_prefix: str) -> list[str]:
    blocks: list[list[str]] = []
    for raw in text.splitlines():
        if raw.strip().startswith(header_prefix):
            blocks.append([])
        if blocks:
            blocks[-1].append(raw)
    return ["\n".join(b) for b in blocks]
