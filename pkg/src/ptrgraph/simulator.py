"""Session management, statement stepping, what-if exploration, undo,
bounded state-space search with isomorphism collapsing, and G-formula
checking over traces and state spaces.

A session is single-writer: statement, what-if and undo operations on the
same session must be externally serialized (the HTTP service does this with
a per-session lock); distinct sessions are independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ptrgraph.constraints import (
    ConstraintReport,
    FormulaVerdict,
    catalog as constraint_catalog,
    eval_formula_on_trace,
)
from ptrgraph.errors import (
    BadIndex,
    EmptyHistory,
    InputExhausted,
    PoolExhausted,
    PtrGraphError,
    RuleInapplicable,
    StateBudgetExceeded,
    UnknownRule,
)
from ptrgraph.frontend import (
    DeclStmt,
    ElabConfig,
    Environment,
    Plan,
    Statement,
    elaborate,
    parse_program,
    parse_statement,
    pretty_statement,
)
from ptrgraph.graphs import Edge, InstanceGraph, Node, invariant_signature, isomorphic
from ptrgraph.model import (
    ArrayDecl,
    Declaration,
    IntVar,
    build_start_graph,
    resolve_rule,
    rule_catalog,
)
from ptrgraph.rewrite import Match, Rule, RewriteResult, find_matches, rewrite


@dataclass(frozen=True)
class SimConfig:
    address_pool: int = 8
    strict_c: bool = False
    materialize_addresses: bool = False
    ignore_names: bool = False
    state_budget: int = 10_000
    constraint_names: tuple[str, ...] = ()  # empty = full WF+RI catalog

    def elab(self) -> ElabConfig:
        return ElabConfig(self.strict_c, self.materialize_addresses)

    def iso_ignored_attrs(self) -> tuple[str, ...]:
        return ("name",) if self.ignore_names else ()


@dataclass
class Diff:
    created_nodes: list[int] = field(default_factory=list)
    created_edges: list[int] = field(default_factory=list)
    deleted_nodes: list[Node] = field(default_factory=list)
    deleted_edges: list[Edge] = field(default_factory=list)
    updated_nodes: list[int] = field(default_factory=list)
    # elements a rule's negative condition forbids (match visualisation only)
    forbidden_nodes: list[int] = field(default_factory=list)

    @classmethod
    def from_rewrite(cls, result: RewriteResult) -> "Diff":
        return cls(
            list(result.created_nodes),
            list(result.created_edges),
            list(result.deleted_nodes),
            list(result.deleted_edges),
            list(result.updated_nodes),
        )

    def to_dict(self) -> dict:
        return {
            "createdNodes": list(self.created_nodes),
            "createdEdges": list(self.created_edges),
            "deletedNodes": [n.id for n in self.deleted_nodes],
            "deletedEdges": [e.id for e in self.deleted_edges],
            "updatedNodes": list(self.updated_nodes),
            "forbiddenNodes": list(self.forbidden_nodes),
        }


@dataclass
class TraceStep:
    index: int
    statement_text: str
    rule_name: str | None
    anchors: dict[str, int]
    match_nodes: dict[str, int]
    params: dict[str, int]
    pre_graph: InstanceGraph
    post_graph: InstanceGraph
    diff: Diff
    reports: list[ConstraintReport]
    output: str | None = None
    input_pos_before: int = 0
    transcript_len_before: int = 0
    what_if: bool = False


@dataclass
class StepResult:
    step: TraceStep

    @property
    def graph(self) -> InstanceGraph:
        return self.step.post_graph

    @property
    def reports(self) -> list[ConstraintReport]:
        return self.step.reports

    @property
    def rule_name(self) -> str | None:
        return self.step.rule_name

    @property
    def output(self) -> str | None:
        return self.step.output


class Session:
    """Interactive simulation state over one start graph."""

    def __init__(
        self,
        decls: Sequence[Declaration],
        config: SimConfig | None = None,
        input_stream: Sequence[int] = (),
    ):
        self.config = config or SimConfig()
        graph, env = build_start_graph(decls, self.config.address_pool)
        self.decls = list(decls)
        self.start_graph = graph
        self.graph = graph
        self.env: Environment = env
        self.history: list[TraceStep] = []
        self.input_stream = list(input_stream)
        self.input_pos = 0
        self.transcript: list[str] = []

    # -- introspection ---------------------------------------------------

    def constraint_registry(self) -> dict:
        return constraint_catalog()

    def check_now(self) -> list[ConstraintReport]:
        names = self.config.constraint_names or tuple(sorted(self.constraint_registry()))
        reg = self.constraint_registry()
        return [reg[n].report(self.graph) for n in names]

    def states(self) -> list[InstanceGraph]:
        """Start state followed by every post-state, in order."""
        return [self.start_graph] + [s.post_graph for s in self.history]

    def describe_node(self, nid: int) -> str:
        names = {v: k for k, v in self.env.items()}
        if nid in names:
            return names[nid]
        if nid not in self.graph.nodes:
            return f"#{nid}"
        node = self.graph.nodes[nid]
        attrs = "".join(
            f" {k}={v!r}" for k, v in sorted(node.attrs.items()) if v not in ("",)
        )
        return f"{node.type_name}#{nid}{attrs}"


def new_session(
    decls: Sequence[Declaration],
    config: SimConfig | None = None,
    input_stream: Sequence[int] = (),
) -> Session:
    """Fresh session at the start graph; well-formedness is verified."""
    session = Session(decls, config, input_stream)
    from ptrgraph.constraints import is_wellformed

    if not is_wellformed(session.graph):
        raise PtrGraphError("start graph is not well-formed")  # pragma: no cover
    return session


def step(session: Session, statement_text: str) -> StepResult:
    """Parse, elaborate and execute one statement.

    On any error the session is left unchanged and the exception propagates
    (interactive callers report it and carry on).
    """
    stmt = parse_statement(statement_text)
    plan = elaborate(stmt, session.graph, session.env, session.config.elab())
    return _execute_plan(session, plan, pretty_statement(stmt), what_if=False)


def _execute_plan(
    session: Session, plan: Plan, text: str, *, what_if: bool, match: Match | None = None
) -> StepResult:
    pre = session.graph
    input_pos_before = session.input_pos
    transcript_before = len(session.transcript)
    output: str | None = None
    params = dict(plan.params)

    if plan.kind == "print":
        post = pre
        diff = Diff()
        output = plan.output
        rule_name = None
        anchors: dict[str, int] = {}
        match_nodes: dict[str, int] = {}
    elif plan.kind == "decl":
        post, created = _apply_decls(session, pre, plan.decls)
        diff = Diff(created_nodes=created)
        rule_name = None
        anchors = {}
        match_nodes = {}
    else:
        if plan.needs_input:
            if session.input_pos >= len(session.input_stream):
                raise InputExhausted("input stream is empty")
            params["value"] = session.input_stream[session.input_pos]
        g = pre
        pre_created: list[int] = []
        for addr, obj in plan.pre_stores:
            g = g.set_attr(addr, "free", False)
            g, eid = g.add_edge(addr, "cont", obj)
            pre_created.append(eid)
        if match is None:
            matches = find_matches(g, plan.rule, plan.anchors)
            if not matches:
                if plan.rule.name == "nullPointerInt":
                    raise PoolExhausted("no free address available")
                raise RuleInapplicable(
                    f"rule {plan.rule.name!r} has no match for this statement"
                )
            match = matches[0]
        result = rewrite(g, match, params)
        post = result.graph
        diff = Diff.from_rewrite(result)
        diff.created_edges = pre_created + diff.created_edges
        rule_name = plan.rule.name
        anchors = dict(plan.anchors) or dict(match.anchors)
        match_nodes = dict(result.node_map)
        if plan.needs_input:
            session.input_pos += 1

    reports = _reports_for(session, post)
    step_record = TraceStep(
        index=len(session.history),
        statement_text=text,
        rule_name=rule_name,
        anchors=anchors,
        match_nodes=match_nodes,
        params=params,
        pre_graph=pre,
        post_graph=post,
        diff=diff,
        reports=reports,
        output=output,
        input_pos_before=input_pos_before,
        transcript_len_before=transcript_before,
        what_if=what_if,
    )
    session.graph = post
    session.history.append(step_record)
    if output is not None:
        session.transcript.append(output)
    return StepResult(step_record)


def _apply_decls(
    session: Session, g: InstanceGraph, decls: Iterable[Declaration]
) -> tuple[InstanceGraph, list[int]]:
    created: list[int] = []
    for d in decls:
        if d.name in session.env:
            from ptrgraph.errors import DuplicateName

            raise DuplicateName(f"name {d.name!r} is already declared")
        if isinstance(d, ArrayDecl):
            from ptrgraph.errors import UnsupportedConstruct

            raise UnsupportedConstruct("arrays can only be declared up front")
        if isinstance(d, IntVar):
            g, nid = g.add_node("Int", {"name": d.name, "val": d.value})
        else:
            g, nid = g.add_node("Pointer")
        session.env[d.name] = nid
        created.append(nid)
    return g, created


def _reports_for(session: Session, g: InstanceGraph) -> list[ConstraintReport]:
    reg = session.constraint_registry()
    names = session.config.constraint_names or tuple(sorted(reg))
    return [reg[n].report(g) for n in names]


@dataclass
class Trace:
    """Batch execution result."""

    decls: list[Declaration]
    config: SimConfig
    states: list[InstanceGraph]
    steps: list[TraceStep]
    transcript: list[str]
    env: Environment
    error: PtrGraphError | None = None

    @property
    def final_state(self) -> InstanceGraph:
        return self.states[-1]

    def violated_reports(self) -> list[ConstraintReport]:
        return [r for s in self.steps for r in s.reports if not r.holds]


def run(
    decls: Sequence[Declaration],
    program_text: str,
    input_stream: Sequence[int] = (),
    config: SimConfig | None = None,
) -> Trace:
    """Execute a program start to finish; halt at the first error.

    The whole program must parse up front; runtime errors leave a partial
    trace with the error recorded.
    """
    statements = parse_program(program_text)
    session = new_session(decls, config, input_stream)
    error: PtrGraphError | None = None
    for _, stmt in statements:
        try:
            _execute_plan(
                session,
                elaborate(stmt, session.graph, session.env, session.config.elab()),
                pretty_statement(stmt),
                what_if=False,
            )
        except PtrGraphError as exc:
            error = exc
            break
    return Trace(
        decls=list(decls),
        config=session.config,
        states=session.states(),
        steps=list(session.history),
        transcript=list(session.transcript),
        env=dict(session.env),
        error=error,
    )


# -- what-if exploration --------------------------------------------------------


@dataclass(frozen=True)
class MatchSummary:
    index: int
    rule_name: str
    bindings: dict[str, int]
    description: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "rule": self.rule_name,
            "bindings": dict(self.bindings),
            "description": self.description,
        }


def what_if_matches(session: Session, rule_name: str) -> list[MatchSummary]:
    """All current matches of a catalog rule, with human-readable anchors."""
    rule = resolve_rule(rule_name)
    out = []
    for i, m in enumerate(find_matches(session.graph, rule)):
        parts = [
            f"{var}={session.describe_node(nid)}"
            for var, nid in sorted(m.node_map.items())
        ]
        out.append(MatchSummary(i, rule.name, dict(m.node_map), ", ".join(parts)))
    return out


def apply_what_if(
    session: Session,
    rule_name: str,
    match_index: int,
    params: Mapping[str, int] | None = None,
) -> StepResult:
    """Apply the i-th current match of a rule as an exploratory step."""
    rule = resolve_rule(rule_name)
    matches = find_matches(session.graph, rule)
    if match_index < 0 or match_index >= len(matches):
        raise BadIndex(
            f"rule {rule.name!r} has {len(matches)} matches; index {match_index} "
            "is out of range"
        )
    match = matches[match_index]
    plan = Plan(
        kind="rule",
        statement=None,
        rule=rule,
        anchors=dict(match.anchors),
        params=dict(params or {}),
    )
    text = f"// what-if: {rule.name} match {match_index}"
    return _execute_plan(session, plan, text, what_if=True, match=match)


def undo(session: Session) -> Session:
    """Pop the last step, restoring state, input position and transcript."""
    if not session.history:
        raise EmptyHistory("nothing to undo")
    last = session.history.pop()
    session.graph = last.pre_graph
    session.input_pos = last.input_pos_before
    del session.transcript[last.transcript_len_before :]
    # declarations-as-statements extend the environment; drop those bindings
    for name, nid in list(session.env.items()):
        if nid not in session.graph.nodes:
            del session.env[name]
    return session


def replay(session: Session) -> InstanceGraph:
    """Re-derive the current state from the start graph and history."""
    g = session.start_graph
    for step_record in session.history:
        if step_record.rule_name is None:
            g = step_record.post_graph
            continue
        rule = resolve_rule(step_record.rule_name)
        anchors = {
            k: v for k, v in step_record.anchors.items() if k in rule.anchors
        }
        matches = find_matches(g, rule, anchors)
        wanted = {
            var: nid
            for var, nid in step_record.match_nodes.items()
            if any(pn.var == var for pn in rule.match_nodes)
        }
        match = next(m for m in matches if m.node_map == wanted)
        g = rewrite(g, match, step_record.params).graph
    return g


# -- state-space exploration ------------------------------------------------------


@dataclass
class Transition:
    source: int
    rule_name: str
    match_nodes: dict[str, int]
    target: int

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "rule": self.rule_name,
            "match": dict(self.match_nodes),
            "target": self.target,
        }


class LTS:
    """States up to isomorphism plus the rule applications between them."""

    def __init__(self, ignore_attrs: tuple[str, ...] = ()):
        self.states: list[InstanceGraph] = []
        self.transitions: list[Transition] = []
        self.ignore_attrs = ignore_attrs
        self._buckets: dict[tuple, list[int]] = {}

    def intern(self, g: InstanceGraph) -> tuple[int, bool]:
        """State id for g, collapsing isomorphic states; True when new."""
        key = invariant_signature(g, self.ignore_attrs)
        for sid in self._buckets.get(key, ()):
            if isomorphic(self.states[sid], g, ignore_attrs=self.ignore_attrs):
                return sid, False
        sid = len(self.states)
        self.states.append(g)
        self._buckets.setdefault(key, []).append(sid)
        return sid, True


def explore(
    start: InstanceGraph,
    rule_names: Iterable[str],
    max_depth: int,
    *,
    ignore_names: bool = False,
    state_budget: int = 10_000,
) -> LTS:
    """BFS over rule applications with isomorphism collapsing."""
    rules: list[Rule] = [resolve_rule(name) for name in sorted(set(rule_names))]
    for rule in rules:
        for a in rule.assignments:
            if a.source_kind == "param" and rule.params.get(a.source_var) is None:
                raise UnknownRule(
                    f"rule {rule.name!r} needs parameter {a.source_var!r}; "
                    "exploration only supports parameterless rules"
                )
    lts = LTS(("name",) if ignore_names else ())
    start_id, _ = lts.intern(start)
    frontier = [start_id]
    for _ in range(max_depth):
        next_frontier: list[int] = []
        for sid in frontier:
            g = lts.states[sid]
            for rule in rules:
                for match in find_matches(g, rule):
                    post = rewrite(g, match).graph
                    tid, is_new = lts.intern(post)
                    if len(lts.states) > state_budget:
                        raise StateBudgetExceeded(
                            f"exploration exceeded {state_budget} states"
                        )
                    lts.transitions.append(
                        Transition(sid, rule.name, dict(match.node_map), tid)
                    )
                    if is_new:
                        next_frontier.append(tid)
        frontier = next_frontier
        if not frontier:
            break
    return lts


def model_check(
    target: Trace | LTS | Sequence[InstanceGraph] | Session,
    formula: str,
    registry: Mapping[str, object] | None = None,
) -> FormulaVerdict:
    """Check ``G(phi)`` over every state of a trace, LTS or session."""
    if isinstance(target, Trace):
        states: Sequence[InstanceGraph] = target.states
    elif isinstance(target, LTS):
        states = target.states
    elif isinstance(target, Session):
        states = target.states()
    else:
        states = target
    return eval_formula_on_trace(states, formula, registry)
