"""
Question scopes and dispatch.

Each scope routes the eight question kinds to the matching provenance
machinery. Scopes are kept in a registry so the command line can list them.
"""

from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Set, Tuple, Type

from uniprov.annotations import Polynomial, to_witness_basis
from uniprov.common.errors import MissingContextError, SubjectError, UnsupportedScopeError
from uniprov.common.logging import get_logger
from uniprov.data.model import DatabaseState, VersionedDatabase
from uniprov.data.types import ProvenanceId
from uniprov.query.evaluator import AnnotatedResult, ResultRow, evaluate, what_provenance
from uniprov.query.parser import parse_query
from uniprov.query.why_not import MissingJoinPartner, PickySelection, why_not
from uniprov.questions.model import (
    WORKFLOW_ONLY_KINDS,
    ActivityListAnswer,
    AgentListAnswer,
    Answer,
    CombinedAnswer,
    Context,
    DataAnswer,
    DeviceListAnswer,
    EntitySubject,
    ExpectationSubject,
    Granularity,
    LocationAnswer,
    NoteListAnswer,
    PlanAnswer,
    PolynomialAnswer,
    ProcessAnswer,
    Question,
    QuestionKind,
    RowSubject,
    Scope,
    TimeAnswer,
    TypeMapAnswer,
    WhereAnswer,
    WhyNotAnswer,
    WitnessAnswer,
    WorkflowAnswer,
    dedupe,
)
from uniprov.workflow.graph import ProvGraph

logger = get_logger(__name__)

LOCATION_ATTRIBUTE = "location"


def _snapshot(database: VersionedDatabase, at_time: Optional[int]) -> DatabaseState:
    return database.snapshot_at(database.current_version if at_time is None else at_time)


def _row_subject(question: Question) -> RowSubject:
    if not isinstance(question.subject, RowSubject):
        raise SubjectError(
            f"{question.kind} with {question.scope} scope needs a result row and its query"
        )
    return question.subject


def _expectation_subject(question: Question) -> ExpectationSubject:
    if not isinstance(question.subject, ExpectationSubject):
        raise SubjectError(f"why_not with {question.scope} scope needs a query and an expectation")
    return question.subject


def _entity_subject(question: Question) -> EntitySubject:
    if not isinstance(question.subject, EntitySubject):
        raise SubjectError(f"{question.kind} with workflow scope needs an entity")
    return question.subject


class BaseScope(ABC):
    """Base class for question scopes."""

    name: str = ""
    requires: Tuple[str, ...] = ()

    def check_context(self, context: Context) -> None:
        for component in self.requires:
            if getattr(context, component) is None:
                raise MissingContextError(f"{self.name} questions need the {component} component")

    @abstractmethod
    def answer(self, question: Question, context: Context) -> Answer:
        """Answer a question whose scope is this one."""


class DataScope(BaseScope):
    """Tuple-level provenance of query results."""

    name = "data"
    requires = ("database",)

    def resolve_row(
        self, subject: RowSubject, database: VersionedDatabase
    ) -> Tuple[ResultRow, AnnotatedResult]:
        result = evaluate(parse_query(subject.sql), _snapshot(database, subject.at_time))
        return result.row(subject.row), result

    def answer(self, question: Question, context: Context) -> DataAnswer:
        if question.kind in WORKFLOW_ONLY_KINDS:
            raise UnsupportedScopeError(question.kind.value, question.scope.value)
        database = context.database
        assert database is not None
        idb = context.idb
        coarse = question.granularity is Granularity.COARSE
        if coarse and idb is None:
            raise MissingContextError("coarse data answers need the idb component")

        if question.kind is QuestionKind.WHY_NOT:
            subject = _expectation_subject(question)
            explanation = why_not(
                parse_query(subject.sql),
                _snapshot(database, subject.at_time),
                dict(subject.expectation),
            )
            return WhyNotAnswer(explanation)

        subject = _row_subject(question)
        row, result = self.resolve_row(subject, database)

        if question.kind is QuestionKind.HOW:
            if coarse:
                return PolynomialAnswer(idb.lift(row.polynomial), lifted=True)
            return PolynomialAnswer(row.polynomial)

        if question.kind is QuestionKind.WHY:
            basis = to_witness_basis(row.polynomial)
            if coarse:
                return WitnessAnswer(idb.lift_witnesses(basis), lifted=True)
            return WitnessAnswer(basis)

        if question.kind is QuestionKind.WHERE:
            attributes = [subject.attribute] if subject.attribute else list(row.where)
            cells = {}
            for attribute in attributes:
                if attribute not in row.where:
                    raise SubjectError(f"result has no attribute {attribute!r}")
                cells[attribute] = row.where[attribute]
            files = None
            if coarse:
                files = {
                    attribute: tuple(
                        r.file_id for r in idb.records_for(c.id for c in cells[attribute])
                    )
                    for attribute in attributes
                }
            return WhereAnswer(cells, files)

        types = what_provenance(result)
        if subject.attribute:
            if subject.attribute not in types:
                raise SubjectError(f"result has no attribute {subject.attribute!r}")
            types = {subject.attribute: types[subject.attribute]}
        return TypeMapAnswer(types)


class WorkflowScope(BaseScope):
    """Workflow provenance of an entity."""

    name = "workflow"
    requires = ("graph",)

    @staticmethod
    def _activities_with_ancestors(graph: ProvGraph, entity: str) -> List[str]:
        activities: Set[str] = set()
        for activity_id in graph.path_activities(entity):
            current: Optional[str] = activity_id
            while current is not None:
                activities.add(current)
                current = graph.activity(current).parent
        return sorted(activities)

    def answer(self, question: Question, context: Context) -> WorkflowAnswer:
        graph = context.graph
        assert graph is not None
        entity = _entity_subject(question).entity
        kind = question.kind
        granularity = question.granularity

        if kind is QuestionKind.WHAT:
            return ProcessAnswer(tuple(graph.derivation_chain(entity)))

        trace = tuple(graph.activity_trace(entity, granularity.value))
        if kind is QuestionKind.HOW:
            return ActivityListAnswer(trace, granularity)
        if kind is QuestionKind.WHEN:
            return TimeAnswer(trace)
        if kind is QuestionKind.WHERE:
            located = []
            for node in (graph.entity(entity),) + trace:
                if LOCATION_ATTRIBUTE in node.attributes:
                    located.append((node.id, node.attributes[LOCATION_ATTRIBUTE]))
            return LocationAnswer(tuple(located))

        activities = self._activities_with_ancestors(graph, entity)
        chain = [step.entity for step in graph.derivation_chain(entity)]
        if kind is QuestionKind.WHY:
            plans = []
            for plan in graph.plans_of(activities):
                revisions = tuple(p.id for p in graph.plan_revisions(plan))
                plans.append((plan, revisions))
            return PlanAnswer(tuple(plans))
        if kind is QuestionKind.WHO:
            return AgentListAnswer(tuple(graph.responsible_agents(chain + activities)))
        if kind is QuestionKind.WHICH:
            return DeviceListAnswer(tuple(graph.devices_used(activities)))
        # why_not: notes collected on the trace, its plans included
        targets = chain + activities + graph.plans_of(activities)
        return NoteListAnswer(tuple(graph.notes_for(targets)))


class CombinedScope(BaseScope):
    """Data provenance lifted to files, then traced through the workflow."""

    name = "combined"
    requires = ("database", "graph", "idb")

    def answer(self, question: Question, context: Context) -> CombinedAnswer:
        database, graph, idb = context.database, context.graph, context.idb
        assert database is not None and graph is not None and idb is not None
        data_question = Question(question.kind, Scope.DATA, question.subject, question.granularity)
        data: Optional[DataAnswer] = None

        if question.kind is QuestionKind.WHY_NOT:
            data = DataScope().answer(data_question, context)
            assert isinstance(data, WhyNotAnswer)
            polynomial = _missing_derivations(data)
        else:
            subject = _row_subject(question)
            row, _ = DataScope().resolve_row(subject, database)
            polynomial = row.polynomial
            if question.kind not in WORKFLOW_ONLY_KINDS:
                data = DataScope().answer(data_question, context)

        records = idb.records_for(polynomial.variables())
        entities = dedupe([r.workflow_entity for r in records if r.workflow_entity is not None])
        workflow_scope = WorkflowScope()
        chains = {}
        workflow = {}
        for entity in entities:
            chains[entity] = tuple(graph.derivation_chain(entity))
            entity_question = Question(
                question.kind, Scope.WORKFLOW, EntitySubject(entity), question.granularity
            )
            workflow[entity] = workflow_scope.answer(entity_question, context)
        return CombinedAnswer(
            data=data,
            polynomial=polynomial,
            lifted=idb.lift(polynomial),
            files=tuple(r.file_id for r in records),
            entities=tuple(entities),
            chains=chains,
            workflow=workflow,
        )


def _missing_derivations(answer: WhyNotAnswer) -> Polynomial:
    """Polynomial of the tuple combinations named by why-not findings."""
    terms: Dict[Tuple[ProvenanceId, ...], int] = {}
    for finding in answer.explanation.findings:
        if isinstance(finding, PickySelection):
            key = tuple(sorted(finding.witness))
        elif isinstance(finding, MissingJoinPartner):
            key = (finding.id,)
        else:
            continue
        terms[key] = 1
    return Polynomial.from_terms(terms)


_AVAILABLE_SCOPES: Dict[str, Type[BaseScope]] = {
    "data": DataScope,
    "workflow": WorkflowScope,
    "combined": CombinedScope,
}


def get_scope_names() -> List[str]:
    """Get the names of all available scopes.

    Returns:
        List[str]: List of available scope names
    """
    return list(_AVAILABLE_SCOPES.keys())


def get_available_scopes() -> Dict[str, Type[BaseScope]]:
    """Get all available scopes.

    Returns:
        Dict[str, Type]: Dictionary mapping scope names to scope classes
    """
    return _AVAILABLE_SCOPES.copy()


def check_supported(kind: QuestionKind, scope: Scope) -> None:
    """Reject the kinds that are only defined for workflow provenance.

    Raises:
        UnsupportedScopeError: For when, who and which with data scope.
    """
    if scope is Scope.DATA and kind in WORKFLOW_ONLY_KINDS:
        raise UnsupportedScopeError(kind.value, scope.value)


def ask(question: Question, context: Context) -> Answer:
    """Route a question to its scope and return the typed answer.

    Raises:
        UnsupportedScopeError: For when, who and which with data scope.
        MissingContextError: If the context lacks a component the scope needs.
        SubjectError: If the subject does not fit the kind and scope.
    """
    check_supported(question.kind, question.scope)
    scope = _AVAILABLE_SCOPES[question.scope.value]()
    scope.check_context(context)
    logger.debug("Asking %s/%s about %s", question.kind, question.scope, question.subject)
    return scope.answer(question, context)
