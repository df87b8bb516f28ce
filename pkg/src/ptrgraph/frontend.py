"""Parser and elaborator for the C statement subset.

Statements are declarations, assignments over ``*``/``&``/subscripts, and
``scanf``/``printf``. Elaboration turns a statement plus the current state
into a plan: which catalog rule to apply at which anchored nodes, or a pure
read for ``printf``. The ``*``/``&`` notation follows the memory model:
``*p`` navigates ref then cont to the object, ``&x`` walks cont backwards to
the address.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ptrgraph.errors import (
    AddressOfUnaddressed,
    DivisionByZero,
    IndexOutOfBounds,
    NullDereference,
    PoolExhausted,
    StatementSyntaxError,
    TypeMismatch,
    UnboundName,
    UnsupportedConstruct,
)
from ptrgraph.graphs import InstanceGraph
from ptrgraph.model import (
    ADDRESS,
    ARRAY,
    CONT,
    FST,
    INT,
    POINTER,
    REF,
    SUCC,
    ArrayDecl,
    Declaration,
    IntVar,
    PointerVar,
    pointer_array_at,
    rule_catalog,
)
from ptrgraph.rewrite import Rule

Environment = dict[str, int]


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Deref:
    name: str


@dataclass(frozen=True)
class Index:
    name: str
    index: int


@dataclass(frozen=True)
class AddrOf:
    target: "LValue"


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "RValue"
    right: "RValue"


LValue = VarRef | Deref | Index
RValue = VarRef | Deref | Index | AddrOf | IntLit | BinOp


@dataclass(frozen=True)
class Assign:
    lhs: LValue
    rhs: RValue


@dataclass(frozen=True)
class Scanf:
    target: LValue
    has_amp: bool
    fmt: str = "%i"


@dataclass(frozen=True)
class Printf:
    arg: RValue
    fmt: str = "%i"


@dataclass(frozen=True)
class DeclStmt:
    decls: tuple[Declaration, ...]


Statement = Assign | Scanf | Printf | DeclStmt

_FORMATS = ("%i", "%hi")


# -- tokenizer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<sym>[=*&\[\]();,+\-/{}])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num" | "name" | "str" | "sym" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise StatementSyntaxError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        i = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            raise StatementSyntaxError(
                f"expected {text!r}, found {t.text!r}" if t.kind != "eof" else f"expected {text!r}",
                t.line,
                t.col,
            )
        return self.next()

    def expect_name(self) -> _Tok:
        t = self.peek()
        if t.kind != "name":
            raise StatementSyntaxError(f"expected a name, found {t.text!r}", t.line, t.col)
        return self.next()

    def fail(self, message: str) -> StatementSyntaxError:
        t = self.peek()
        return StatementSyntaxError(message, t.line, t.col)

    # -- expressions ---------------------------------------------------

    def parse_rvalue(self) -> RValue:
        left = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            right = self.parse_term()
            left = BinOp(op, left, right)
        return left

    def parse_term(self) -> RValue:
        left = self.parse_primary()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            right = self.parse_primary()
            left = BinOp(op, left, right)
        return left

    def parse_primary(self) -> RValue:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return IntLit(int(t.text))
        if t.text == "-":
            self.next()
            num = self.peek()
            if num.kind != "num":
                raise self.fail("expected a number after unary '-'")
            self.next()
            return IntLit(-int(num.text))
        if t.text == "(":
            self.next()
            inner = self.parse_rvalue()
            self.expect(")")
            return inner
        if t.text == "&":
            self.next()
            return AddrOf(self.parse_lvalue())
        if t.text == "*":
            self.next()
            return Deref(self.expect_name().text)
        if t.kind == "name":
            return self.parse_name_ref()
        raise self.fail(f"unexpected token {t.text!r} in expression")

    def parse_name_ref(self) -> VarRef | Index:
        name = self.expect_name().text
        if self.peek().text == "[":
            open_tok = self.next()
            idx_tok = self.peek()
            if idx_tok.text == "]":
                raise StatementSyntaxError(
                    "empty subscript: an index is required", open_tok.line, open_tok.col
                )
            if idx_tok.kind != "num":
                raise UnsupportedConstruct(
                    "only literal subscripts are supported", idx_tok.line, idx_tok.col
                )
            self.next()
            self.expect("]")
            return Index(name, int(idx_tok.text))
        return VarRef(name)

    def parse_lvalue(self) -> LValue:
        t = self.peek()
        if t.text == "*":
            self.next()
            return Deref(self.expect_name().text)
        if t.kind == "name":
            return self.parse_name_ref()
        raise self.fail(f"expected an lvalue, found {t.text!r}")

    # -- statements ------------------------------------------------------

    def parse_statement(self) -> Statement:
        t = self.peek()
        if t.text == "int":
            return DeclStmt(tuple(self.parse_declaration()))
        if t.text in ("scanf", "printf"):
            return self.parse_io(t.text)
        lhs = self.parse_lvalue()
        self.expect("=")
        rhs = self.parse_rvalue()
        self.expect(";")
        return Assign(lhs, rhs)

    def parse_io(self, which: str) -> Scanf | Printf:
        self.next()
        self.expect("(")
        fmt_tok = self.peek()
        if fmt_tok.kind != "str":
            raise self.fail(f"{which} needs a format string")
        fmt = fmt_tok.text[1:-1]
        if fmt not in _FORMATS:
            raise StatementSyntaxError(
                f"unsupported format string {fmt!r} (use %i or %hi)",
                fmt_tok.line,
                fmt_tok.col,
            )
        self.next()
        self.expect(",")
        if which == "scanf":
            if self.peek().text == "&":
                self.next()
                target = self.parse_lvalue()
                stmt: Scanf | Printf = Scanf(target, True, fmt)
            else:
                target = self.parse_lvalue()
                stmt = Scanf(target, False, fmt)
        else:
            stmt = Printf(self.parse_rvalue(), fmt)
        self.expect(")")
        self.expect(";")
        return stmt

    def parse_declaration(self) -> list[Declaration]:
        self.expect("int")
        decls: list[Declaration] = []
        while True:
            is_pointer = False
            if self.peek().text == "*":
                self.next()
                is_pointer = True
            name = self.expect_name().text
            if is_pointer:
                decls.append(PointerVar(name))
            elif self.peek().text == "[":
                self.next()
                self.expect("]")
                self.expect("=")
                self.expect("{")
                values: list[int] = []
                while True:
                    v = self.peek()
                    sign = 1
                    if v.text == "-":
                        self.next()
                        sign = -1
                        v = self.peek()
                    if v.kind != "num":
                        raise self.fail("expected an integer in array initializer")
                    self.next()
                    values.append(sign * int(v.text))
                    if self.peek().text == ",":
                        self.next()
                        continue
                    break
                self.expect("}")
                decls.append(ArrayDecl(name, tuple(values)))
            elif self.peek().text == "=":
                self.next()
                v = self.peek()
                sign = 1
                if v.text == "-":
                    self.next()
                    sign = -1
                    v = self.peek()
                if v.kind != "num":
                    raise self.fail("expected an integer initializer")
                self.next()
                decls.append(IntVar(name, sign * int(v.text)))
            else:
                decls.append(IntVar(name, 0))
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect(";")
        return decls


def parse_statement(text: str) -> Statement:
    """Parse exactly one statement; whitespace-insensitive."""
    parser = _Parser(_tokenize(text))
    stmt = parser.parse_statement()
    t = parser.peek()
    if t.kind != "eof":
        raise StatementSyntaxError(f"trailing input {t.text!r}", t.line, t.col)
    return stmt


def parse_program(text: str) -> list[tuple[int, Statement]]:
    """Parse a ``.pgs`` program: one statement per line, ``//`` comments."""
    statements: list[tuple[int, Statement]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("//", 1)[0].strip()
        if not stripped:
            continue
        try:
            statements.append((lineno, parse_statement(stripped)))
        except StatementSyntaxError as exc:
            raise StatementSyntaxError(
                f"line {lineno}: {exc.message}", lineno, exc.column
            ) from None
    return statements


def parse_declarations(text: str) -> list[Declaration]:
    """Parse a declarations file (``int`` lines only)."""
    decls: list[Declaration] = []
    for lineno, stmt in parse_program(text):
        if not isinstance(stmt, DeclStmt):
            raise StatementSyntaxError(
                f"line {lineno}: only declarations are allowed here", lineno, 1
            )
        decls.extend(stmt.decls)
    return decls


# -- pretty printing -----------------------------------------------------------


def pretty_rvalue(rv: RValue) -> str:
    if isinstance(rv, IntLit):
        return str(rv.value)
    if isinstance(rv, VarRef):
        return rv.name
    if isinstance(rv, Deref):
        return f"*{rv.name}"
    if isinstance(rv, Index):
        return f"{rv.name}[{rv.index}]"
    if isinstance(rv, AddrOf):
        return f"&{pretty_rvalue(rv.target)}"
    return f"({pretty_rvalue(rv.left)} {rv.op} {pretty_rvalue(rv.right)})"


def pretty_statement(stmt: Statement) -> str:
    if isinstance(stmt, Assign):
        return f"{pretty_rvalue(stmt.lhs)} = {pretty_rvalue(stmt.rhs)};"
    if isinstance(stmt, Scanf):
        amp = "&" if stmt.has_amp else ""
        return f'scanf("{stmt.fmt}", {amp}{pretty_rvalue(stmt.target)});'
    if isinstance(stmt, Printf):
        return f'printf("{stmt.fmt}", {pretty_rvalue(stmt.arg)});'
    parts = []
    for d in stmt.decls:
        if isinstance(d, IntVar):
            parts.append(f"int {d.name} = {d.value};")
        elif isinstance(d, ArrayDecl):
            init = ", ".join(str(v) for v in d.values)
            parts.append(f"int {d.name}[] = {{ {init} }};")
        else:
            parts.append(f"int *{d.name};")
    return " ".join(parts)


# -- evaluation ----------------------------------------------------------------


@dataclass(frozen=True)
class AddressValue:
    """An address (node id), the result of ``&``-style expressions."""

    node_id: int


def c_div(a: int, b: int) -> int:
    """C integer division: truncate toward zero."""
    if b == 0:
        raise DivisionByZero("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


class Navigator:
    """Graph navigation helpers shared by elaboration and evaluation."""

    def __init__(self, g: InstanceGraph, env: Environment):
        self.g = g
        self.env = env

    def resolve(self, name: str) -> int:
        if name not in self.env or self.env[name] not in self.g.nodes:
            raise UnboundName(f"name {name!r} is not bound in this state")
        return self.env[name]

    def kind_of(self, nid: int) -> str:
        return self.g.nodes[nid].type_name

    def pointer_target(self, pid: int) -> int | None:
        refs = self.g.out_edges(pid, REF)
        return refs[0].tgt if refs else None

    def object_at(self, aid: int) -> int | None:
        conts = self.g.out_edges(aid, CONT)
        return conts[0].tgt if conts else None

    def address_holding(self, oid: int) -> int | None:
        conts = self.g.in_edges(oid, CONT)
        return conts[0].src if conts else None

    def array_pointer(self, array_id: int) -> int:
        fsts = self.g.out_edges(array_id, FST)
        if not fsts:
            raise UnboundName("array has no fst pointer (malformed state)")
        return fsts[0].tgt

    def array_address(self, array_id: int, k: int) -> int:
        length = self.g.nodes[array_id].attrs["len"]
        if k < 0 or k >= length:
            raise IndexOutOfBounds(
                f"index {k} out of bounds for array of length {length}"
            )
        addr = self.pointer_target(self.array_pointer(array_id))
        if addr is None:
            raise NullDereference("array's first-element pointer is null")
        for _ in range(k):
            succs = self.g.out_edges(addr, SUCC)
            if not succs:
                raise IndexOutOfBounds(f"address chain shorter than index {k}")
            addr = succs[0].tgt
        return addr

    def deref_pointer_node(self, name: str) -> int:
        """The pointer node a name dereferences: arrays decay to their
        first-element pointer."""
        nid = self.resolve(name)
        kind = self.kind_of(nid)
        if kind == POINTER:
            return nid
        if kind == ARRAY:
            return self.array_pointer(nid)
        raise TypeMismatch(f"{name!r} is a plain int and cannot be dereferenced")

    def referent_value(self, name: str) -> int:
        pid = self.deref_pointer_node(name)
        addr = self.pointer_target(pid)
        if addr is None:
            raise NullDereference(f"{name!r} is null")
        obj = self.object_at(addr)
        if obj is None:
            raise NullDereference(
                f"{name!r} refers to an address that holds no object"
            )
        node = self.g.nodes[obj]
        if node.type_name != INT:
            raise TypeMismatch(f"referent of {name!r} is not an int")
        return node.attrs["val"]

    def free_addresses(self) -> list[int]:
        out = []
        for n in self.g.nodes_of_type(ADDRESS):
            if n.attrs.get("free") and self.object_at(n.id) is None:
                out.append(n.id)
        return out


def eval_rvalue(
    rv: RValue, g: InstanceGraph, env: Environment, *, materialize: bool = False
) -> int | AddressValue | None:
    """Evaluate by graph navigation.

    Int-valued expressions yield ints; ``&``-style expressions yield
    :class:`AddressValue`; a bare null pointer yields None. Arithmetic over
    addresses is rejected.
    """
    nav = Navigator(g, env)
    return _eval(rv, nav, materialize)


def _eval(rv: RValue, nav: Navigator, materialize: bool) -> int | AddressValue | None:
    if isinstance(rv, IntLit):
        return rv.value
    if isinstance(rv, VarRef):
        nid = nav.resolve(rv.name)
        kind = nav.kind_of(nid)
        if kind == INT:
            return nav.g.nodes[nid].attrs["val"]
        if kind == POINTER:
            target = nav.pointer_target(nid)
            return AddressValue(target) if target is not None else None
        # array name decays to the address of its first element
        target = nav.pointer_target(nav.array_pointer(nid))
        return AddressValue(target) if target is not None else None
    if isinstance(rv, Deref):
        return nav.referent_value(rv.name)
    if isinstance(rv, Index):
        nid = nav.resolve(rv.name)
        if nav.kind_of(nid) != ARRAY:
            raise TypeMismatch(f"{rv.name!r} is not an array")
        addr = nav.array_address(nid, rv.index)
        obj = nav.object_at(addr)
        if obj is None:
            raise NullDereference(f"array slot {rv.index} holds no object")
        return nav.g.nodes[obj].attrs["val"]
    if isinstance(rv, AddrOf):
        return AddressValue(_address_of(rv.target, nav, materialize))
    left = _eval(rv.left, nav, materialize)
    right = _eval(rv.right, nav, materialize)
    if not isinstance(left, int) or not isinstance(right, int):
        raise TypeMismatch("arithmetic over addresses is not supported")
    if rv.op == "+":
        return left + right
    if rv.op == "-":
        return left - right
    if rv.op == "*":
        return left * right
    return c_div(left, right)


def _address_of(lv: LValue, nav: Navigator, materialize: bool) -> int:
    if isinstance(lv, VarRef):
        nid = nav.resolve(lv.name)
        kind = nav.kind_of(nid)
        if kind == POINTER:
            raise AddressOfUnaddressed(
                f"pointer {lv.name!r} is not stored at any address in this model"
            )
        if kind == ARRAY:
            return nav.array_address(nid, 0)
        addr = nav.address_holding(nid)
        if addr is not None:
            return addr
        if not materialize:
            raise AddressOfUnaddressed(
                f"{lv.name!r} is not stored at any address; "
                "re-run with materialize-addresses to allocate one"
            )
        free = nav.free_addresses()
        if not free:
            raise PoolExhausted("no free address left to materialize into")
        return free[0]
    if isinstance(lv, Deref):
        pid = nav.deref_pointer_node(lv.name)
        addr = nav.pointer_target(pid)
        if addr is None:
            raise NullDereference(f"{lv.name!r} is null")
        return addr
    nid = nav.resolve(lv.name)
    if nav.kind_of(nid) != ARRAY:
        raise TypeMismatch(f"{lv.name!r} is not an array")
    return nav.array_address(nid, lv.index)


# -- elaboration ---------------------------------------------------------------


@dataclass
class Plan:
    """Executable realization of one statement in a given state."""

    kind: str  # "rule" | "print" | "decl"
    statement: Statement
    rule: Rule | None = None
    anchors: dict[str, int] = field(default_factory=dict)
    params: dict[str, int] = field(default_factory=dict)
    needs_input: bool = False
    output: str | None = None
    decls: tuple[Declaration, ...] = ()
    pre_stores: tuple[tuple[int, int], ...] = ()  # (address, object) materializations
    note: str = ""

    @property
    def rule_name(self) -> str | None:
        return self.rule.name if self.rule is not None else None


@dataclass(frozen=True)
class ElabConfig:
    strict_c: bool = False
    materialize_addresses: bool = False


def elaborate(
    stmt: Statement,
    g: InstanceGraph,
    env: Environment,
    config: ElabConfig | None = None,
) -> Plan:
    """Choose the rule and anchor bindings (or the pure read) for a statement."""
    config = config or ElabConfig()
    nav = Navigator(g, env)
    catalog = rule_catalog()

    if isinstance(stmt, DeclStmt):
        return Plan(kind="decl", statement=stmt, decls=stmt.decls)

    if isinstance(stmt, Printf):
        value = _eval(stmt.arg, nav, config.materialize_addresses)
        if not isinstance(value, int):
            raise TypeMismatch(
                "printf with %i needs an int value, not an address or null pointer"
            )
        return Plan(kind="print", statement=stmt, output=str(value))

    if isinstance(stmt, Scanf):
        addr = _scanf_address(stmt, nav, config)
        plan = Plan(
            kind="rule",
            statement=stmt,
            rule=catalog["ext:readIntoAddress"],
            anchors={"a": addr},
            needs_input=True,
            note="read one int from the input stream",
        )
        if config.materialize_addresses and isinstance(stmt.target, VarRef):
            nid = nav.resolve(stmt.target.name)
            if nav.kind_of(nid) == INT and nav.address_holding(nid) is None:
                plan.pre_stores = ((addr, nid),)
        return plan

    assert isinstance(stmt, Assign)
    return _elaborate_assign(stmt, nav, catalog, config)


def _scanf_address(stmt: Scanf, nav: Navigator, config: ElabConfig) -> int:
    target = stmt.target
    if stmt.has_amp:
        return _address_of(target, nav, config.materialize_addresses)
    if isinstance(target, VarRef):
        nid = nav.resolve(target.name)
        kind = nav.kind_of(nid)
        if kind == POINTER:
            addr = nav.pointer_target(nid)
            if addr is None:
                raise NullDereference(f"{target.name!r} is null")
            return addr
        if kind == ARRAY:
            return nav.array_address(nid, 0)
        raise TypeMismatch(
            f"scanf needs an address: write &{target.name} for a plain int"
        )
    if isinstance(target, Deref):
        raise TypeMismatch("scanf needs an address, not the int *p reads")
    raise TypeMismatch(
        f"scanf needs an address: write &{target.name}[{target.index}]"
    )


def _elaborate_assign(stmt: Assign, nav, catalog, config: ElabConfig) -> Plan:
    lhs, rhs = stmt.lhs, stmt.rhs

    if isinstance(lhs, VarRef):
        nid = nav.resolve(lhs.name)
        kind = nav.kind_of(nid)
        if kind == INT:
            return _assign_into_int_var(stmt, nid, nav, catalog)
        if kind == POINTER:
            return _assign_into_pointer(stmt, nid, nav, catalog, config)
        raise TypeMismatch(f"cannot assign to array {lhs.name!r}")

    if isinstance(lhs, Deref):
        return _assign_through_deref(stmt, nav, catalog, config)

    # lhs is a subscript: store the evaluated value at the cell's address
    nid = nav.resolve(lhs.name)
    if nav.kind_of(nid) != ARRAY:
        raise TypeMismatch(f"{lhs.name!r} is not an array")
    addr = nav.array_address(nid, lhs.index)
    if nav.object_at(addr) is None:
        raise NullDereference(f"array slot {lhs.index} holds no object")
    value = _eval(rhs, nav, config.materialize_addresses)
    if not isinstance(value, int):
        raise TypeMismatch("cannot store an address in an int array cell")
    return Plan(
        kind="rule",
        statement=stmt,
        rule=catalog["ext:readIntoAddress"],
        anchors={"a": addr},
        params={"value": value},
        note=f"store {value} in {lhs.name}[{lhs.index}]",
    )


def _assign_into_int_var(stmt: Assign, target_id: int, nav, catalog) -> Plan:
    rhs = stmt.rhs
    if isinstance(rhs, Deref) or (isinstance(rhs, Index) and rhs.index == 0):
        name = rhs.name
        pid = nav.deref_pointer_node(name)
        addr = nav.pointer_target(pid)
        if addr is None:
            raise NullDereference(f"{name!r} is null")
        obj = nav.object_at(addr)
        if obj is None:
            raise NullDereference(f"{name!r} refers to an address that holds no object")
        if nav.g.nodes[obj].type_name != INT:
            raise TypeMismatch(f"referent of {name!r} is not an int")
        if nav.address_holding(target_id) is not None:
            raise UnsupportedConstruct(
                f"{stmt.lhs.name!r} is stored at an address; reading into it has "
                "no modelling rule"
            )
        return Plan(
            kind="rule",
            statement=stmt,
            rule=catalog["copyReferent"],
            anchors={"p": pid, "t": target_id},
            note=f"copy the referent of {name} into {stmt.lhs.name}",
        )
    if isinstance(rhs, VarRef):
        other = nav.resolve(rhs.name)
        if nav.kind_of(other) in (POINTER, ARRAY):
            raise TypeMismatch(
                f"cannot assign pointer/array {rhs.name!r} to int {stmt.lhs.name!r}"
            )
        raise UnsupportedConstruct(
            "plain int-to-int copies have no modelling rule; only 'x = *p' reads"
        )
    if isinstance(rhs, Index):
        raise UnsupportedConstruct(
            "reading an array cell into a variable is modelled only for index 0 "
            "(via the first-element pointer)"
        )
    raise UnsupportedConstruct(
        "computed right-hand sides can only be stored through a pointer or "
        "into an array cell"
    )


def _assign_into_pointer(stmt: Assign, target_id: int, nav, catalog, config) -> Plan:
    rhs = stmt.rhs
    target_null = nav.pointer_target(target_id) is None

    if isinstance(rhs, AddrOf) and isinstance(rhs.target, Deref):
        # p = &*q is p = q
        rhs = VarRef(rhs.target.name)

    if isinstance(rhs, VarRef):
        source_id = nav.resolve(rhs.name)
        kind = nav.kind_of(source_id)
        if kind == INT:
            raise TypeMismatch(f"cannot assign int {rhs.name!r} to a pointer")
        if kind == ARRAY:
            source_id = nav.array_pointer(source_id)
        if nav.pointer_target(source_id) is None:
            raise UnsupportedConstruct(
                f"{rhs.name!r} is null; copying a null pointer has no modelling rule"
            )
        rule = catalog["nullPointerReferent" if target_null else "pointerReferent"]
        return Plan(
            kind="rule",
            statement=stmt,
            rule=rule,
            anchors={"p1": source_id, "p2": target_id},
            note=f"{stmt.lhs.name} takes over the address of {rhs.name}",
        )

    if isinstance(rhs, AddrOf):
        inner = rhs.target
        if target_null and isinstance(inner, Index):
            array_id = nav.resolve(inner.name)
            if nav.kind_of(array_id) != ARRAY:
                raise TypeMismatch(f"{inner.name!r} is not an array")
            nav.array_address(array_id, inner.index)  # bounds check
            rule = (
                catalog["pointerArray"]
                if inner.index == 0
                else pointer_array_at(inner.index)
            )
            return Plan(
                kind="rule",
                statement=stmt,
                rule=rule,
                anchors={"p": target_id, "ar": array_id},
                note=f"{stmt.lhs.name} refers to element {inner.index} of {inner.name}",
            )
        addr = _address_of(inner, nav, config.materialize_addresses)
        if target_null:
            raise UnsupportedConstruct(
                "binding a null pointer to an arbitrary object address has no "
                "modelling rule (only array elements and pointer copies)"
            )
        if nav.pointer_target(target_id) == addr:
            raise UnsupportedConstruct(
                f"{stmt.lhs.name!r} already refers to that address; the retargeting "
                "rule needs a different one"
            )
        return Plan(
            kind="rule",
            statement=stmt,
            rule=catalog["pointerAssignedNewAddress"],
            anchors={"p": target_id, "a2": addr},
            note=f"{stmt.lhs.name} is retargeted",
        )

    if isinstance(rhs, Deref):
        raise TypeMismatch(f"cannot assign the int *{rhs.name} to a pointer")
    if isinstance(rhs, Index):
        raise TypeMismatch(
            f"cannot assign the int {rhs.name}[{rhs.index}] to a pointer "
            f"(did you mean &{rhs.name}[{rhs.index}]?)"
        )
    raise TypeMismatch("cannot assign an int expression to a pointer")


def _assign_through_deref(stmt: Assign, nav, catalog, config) -> Plan:
    lhs, rhs = stmt.lhs, stmt.rhs
    pid = nav.deref_pointer_node(lhs.name)
    target = nav.pointer_target(pid)

    if target is None:
        if config.strict_c:
            raise NullDereference(
                f"*{lhs.name} = ... writes through a null pointer (undefined "
                "behaviour in C)"
            )
        if isinstance(rhs, VarRef):
            source_id = nav.resolve(rhs.name)
            if nav.kind_of(source_id) != INT:
                raise TypeMismatch(f"*{lhs.name} = {rhs.name}: expected an int")
            if nav.address_holding(source_id) is not None:
                raise UnsupportedConstruct(
                    f"{rhs.name!r} is already stored at an address; the "
                    "store-at-free-address rule needs an unaddressed int"
                )
            nav_free = nav.free_addresses()
            if not nav_free:
                raise PoolExhausted(
                    "no free address available to bind the null pointer to"
                )
            return Plan(
                kind="rule",
                statement=stmt,
                rule=catalog["nullPointerInt"],
                anchors={"p": pid, "x": source_id},
                note=f"{lhs.name} is bound to a fresh address holding {rhs.name}",
            )
        raise NullDereference(
            f"*{lhs.name} = ... with a null pointer is modelled only for "
            "storing a named int variable"
        )

    obj = nav.object_at(target)
    if obj is None:
        raise NullDereference(
            f"{lhs.name!r} refers to an address that holds no object"
        )
    if nav.g.nodes[obj].type_name != INT:
        raise TypeMismatch(f"referent of {lhs.name!r} is not an int")
    value = _eval(rhs, nav, config.materialize_addresses)
    if not isinstance(value, int):
        raise TypeMismatch("cannot store an address through an int pointer")
    return Plan(
        kind="rule",
        statement=stmt,
        rule=catalog["ext:writeThroughPointer"],
        anchors={"p": pid},
        params={"value": value},
        note=f"*{lhs.name} receives {value}",
    )
