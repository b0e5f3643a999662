"""
Exception hierarchy for uniprov

Every domain error derives from ProvenanceError. The two families below carry
the exit status the command line reports for them.
"""

from typing import Optional


class ProvenanceError(Exception):
    """Base class for all uniprov errors."""

    exit_code = 1


class UserError(ProvenanceError):
    """Bad arguments or invalid definitions (exit status 1)."""

    exit_code = 1


class DataError(ProvenanceError):
    """Query, type and data errors (exit status 2)."""

    exit_code = 2


# -- data model ---------------------------------------------------------------


class SchemaError(UserError):
    """Invalid schema or attribute type definition."""


class DuplicateRelationError(SchemaError):
    pass


class UnknownRelationError(DataError):
    pass


class UnknownAttributeError(DataError):
    pass


class UnknownTupleError(UserError):
    """No tuple with the requested base identifier."""


class TypeMismatchError(DataError):
    pass


class LiteralRangeError(TypeMismatchError):
    """Numeric literal of a compatible type that the attribute cannot hold exactly."""


class VersionRangeError(UserError):
    """Requested logical timestamp lies outside the database history."""


# -- annotations --------------------------------------------------------------


class AnnotationError(DataError):
    pass


class MissingVariableError(AnnotationError):
    pass


class PolynomialSyntaxError(AnnotationError):
    pass


# -- query engine -------------------------------------------------------------


class QuerySyntaxError(DataError):
    """Raised by the SQL parser.

    Attributes:
        token: 1-based index of the offending token
        offset: character offset of the offending token in the query text
    """

    def __init__(self, message: str, token: int, offset: int):
        super().__init__(f"syntax error at token {token} (offset {offset}): {message}")
        self.token = token
        self.offset = offset


class QueryError(DataError):
    """Query is syntactically valid but cannot be evaluated."""


class RowNotFoundError(QueryError):
    pass


class NotMissingError(DataError):
    """A why-not expectation is actually part of the query result."""

    def __init__(self, expectation: str):
        super().__init__(f"not missing: {expectation} is part of the query result")


# -- workflow graph -----------------------------------------------------------


class GraphValidationError(UserError):
    pass


class GraphDocumentError(GraphValidationError):
    """Malformed graph document."""


class UnknownNodeError(GraphValidationError):
    def __init__(self, node_id: str, what: Optional[str] = None):
        super().__init__(f"unknown {what or 'node'}: {node_id}")
        self.node_id = node_id


class RevisionChainError(GraphValidationError):
    pass


# -- bridge -------------------------------------------------------------------


class RegistrationError(UserError):
    pass


class UnregisteredIdError(UserError):
    pass


# -- questions ----------------------------------------------------------------


class UnsupportedScopeError(UserError):
    def __init__(self, kind: str, scope: str):
        super().__init__(f"{kind} is only defined for workflow provenance")
        self.kind = kind
        self.scope = scope


class SubjectError(UserError):
    """Question subject does not fit the requested kind and scope."""


class MissingContextError(UserError):
    pass


# -- project ------------------------------------------------------------------


class ProjectError(UserError):
    pass


class ProjectLockedError(ProjectError):
    pass


class InputFileError(UserError):
    """Unreadable or malformed input file (CSV, graph document)."""


def first_validation_message(exc: Exception) -> str:
    """First message of a pydantic ValidationError, prefixed with its location."""
    errors = getattr(exc, "errors", None)
    if not callable(errors) or not errors():
        return str(exc)
    error = errors()[0]
    location = ".".join(str(part) for part in error.get("loc", ()))
    return f"{location}: {error['msg']}" if location else error["msg"]
