"""Exception taxonomy shared by all layers.

Every error carries a machine-readable ``kind`` (used verbatim by the HTTP
service and the CLI) and, for source-level problems, a 1-based line/column
position.
"""

from __future__ import annotations


class PtrGraphError(Exception):
    """Base class for all domain errors."""

    kind = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message}


class SourceError(PtrGraphError):
    """A problem tied to a position in source text (DSL or C subset)."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["position"] = {"line": self.line, "column": self.column}
        return d


# --- graph core ---------------------------------------------------------

class UnknownType(PtrGraphError):
    kind = "UnknownType"


class UnknownNode(PtrGraphError):
    kind = "UnknownNode"


class UnknownEdge(PtrGraphError):
    kind = "UnknownEdge"


class UnknownAttribute(PtrGraphError):
    kind = "UnknownAttribute"


class AttributeSchemaMismatch(PtrGraphError):
    kind = "AttributeSchemaMismatch"


class IllTypedEdge(PtrGraphError):
    kind = "IllTypedEdge"


class TypeGraphMismatch(PtrGraphError):
    kind = "TypeGraphMismatch"


# --- rule DSL and rewriting ----------------------------------------------

class DslSyntaxError(SourceError):
    kind = "SyntaxError"


class RoleConflict(SourceError):
    kind = "RoleConflict"


class AnchorTypeMismatch(PtrGraphError):
    kind = "AnchorTypeMismatch"


class StaleMatch(PtrGraphError):
    kind = "StaleMatch"


class MissingParam(PtrGraphError):
    kind = "MissingParam"


class UnknownRule(PtrGraphError):
    kind = "UnknownRule"


# --- constraints ----------------------------------------------------------

class UnknownConstraint(PtrGraphError):
    kind = "UnknownConstraint"


# --- model / start graph --------------------------------------------------

class DuplicateName(PtrGraphError):
    kind = "DuplicateName"


class PoolTooSmall(PtrGraphError):
    kind = "PoolTooSmall"


# --- frontend / execution -------------------------------------------------

class StatementSyntaxError(SourceError):
    kind = "SyntaxError"


class UnsupportedConstruct(SourceError):
    kind = "UnsupportedConstruct"


class UnboundName(PtrGraphError):
    kind = "UnboundName"


class TypeMismatch(PtrGraphError):
    kind = "TypeMismatch"


class NullDereference(PtrGraphError):
    kind = "NullDereference"


class AddressOfUnaddressed(PtrGraphError):
    kind = "AddressOfUnaddressed"


class IndexOutOfBounds(PtrGraphError):
    kind = "IndexOutOfBounds"


class PoolExhausted(PtrGraphError):
    kind = "PoolExhausted"


class InputExhausted(PtrGraphError):
    kind = "InputExhausted"


class DivisionByZero(PtrGraphError):
    kind = "DivisionByZero"


class RuleInapplicable(PtrGraphError):
    """The elaborated rule has no match in the current state."""

    kind = "RuleInapplicable"


# --- simulator ------------------------------------------------------------

class BadIndex(PtrGraphError):
    kind = "BadIndex"


class EmptyHistory(PtrGraphError):
    kind = "EmptyHistory"


class StateBudgetExceeded(PtrGraphError):
    kind = "StateBudgetExceeded"


# --- io -------------------------------------------------------------------

class UnsupportedVersion(PtrGraphError):
    kind = "UnsupportedVersion"


class SchemaViolation(PtrGraphError):
    kind = "SchemaViolation"
