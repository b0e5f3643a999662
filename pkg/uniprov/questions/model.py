"""
W7+1 questions and their typed answers.

A question has a kind (what, when, where, who, which, how, why, why_not), a
scope (data, workflow, combined) and a subject. Every answer variant offers
``to_dict()`` for the JSON envelope and ``render()`` for a text block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from uniprov.annotations import Polynomial, WitnessBasis
from uniprov.bridge import IdDatabase
from uniprov.data.model import VersionedDatabase
from uniprov.query.evaluator import AttributeOrigin, SourceCell
from uniprov.query.why_not import WhyNotExplanation
from uniprov.workflow.graph import ChainStep, ProvGraph
from uniprov.workflow.model import Activity, Agent, Entity, Note


class QuestionKind(StrEnum):
    WHAT = "what"
    WHEN = "when"
    WHERE = "where"
    WHO = "who"
    WHICH = "which"
    HOW = "how"
    WHY = "why"
    WHY_NOT = "why_not"

    @classmethod
    def parse(cls, text: str) -> QuestionKind:
        return cls(text.strip().lower().replace("-", "_"))


class Scope(StrEnum):
    DATA = "data"
    WORKFLOW = "workflow"
    COMBINED = "combined"


class Granularity(StrEnum):
    FINE = "fine"
    COARSE = "coarse"


# kinds that only make sense for workflow provenance
WORKFLOW_ONLY_KINDS = frozenset({QuestionKind.WHEN, QuestionKind.WHO, QuestionKind.WHICH})


@dataclass(frozen=True)
class RowSubject:
    """Row ``row`` (1-based, sorted order) of the result of ``sql``."""

    sql: str
    row: int
    attribute: Optional[str] = None
    at_time: Optional[int] = None


@dataclass(frozen=True)
class EntitySubject:
    entity: str


@dataclass(frozen=True)
class ExpectationSubject:
    """Values expected, but missing, in the result of ``sql``."""

    sql: str
    expectation: Tuple[Tuple[str, str], ...]
    at_time: Optional[int] = None


Subject = Union[RowSubject, EntitySubject, ExpectationSubject]


@dataclass(frozen=True)
class Question:
    kind: QuestionKind
    scope: Scope
    subject: Subject
    granularity: Granularity = Granularity.FINE


@dataclass(frozen=True)
class Context:
    """What a question is answered against; scopes need different parts."""

    database: Optional[VersionedDatabase] = None
    graph: Optional[ProvGraph] = None
    idb: Optional[IdDatabase] = None


# -- data answers ---------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialAnswer:
    polynomial: Polynomial
    lifted: bool = False

    variant = "polynomial"

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.variant, "polynomial": str(self.polynomial), "lifted": self.lifted}

    def render(self) -> str:
        return str(self.polynomial)


@dataclass(frozen=True)
class WitnessAnswer:
    basis: WitnessBasis
    lifted: bool = False

    variant = "witness-basis"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "witnesses": [[str(pid) for pid in w] for w in self.basis.sorted_witnesses()],
            "lifted": self.lifted,
        }

    def render(self) -> str:
        return str(self.basis)


@dataclass(frozen=True)
class WhereAnswer:
    """Source cells per output attribute; with files when lifted."""

    cells: Mapping[str, FrozenSet[SourceCell]]
    files: Optional[Mapping[str, Tuple[str, ...]]] = None

    variant = "where"

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "type": self.variant,
            "cells": {
                attribute: [
                    {"relation": c.relation, "id": str(c.id), "attribute": c.attribute}
                    for c in sorted(cells)
                ]
                for attribute, cells in self.cells.items()
            },
        }
        if self.files is not None:
            payload["files"] = {attribute: list(ids) for attribute, ids in self.files.items()}
        return payload

    def render(self) -> str:
        lines = []
        for attribute, cells in self.cells.items():
            lines.append(f"{attribute}: {', '.join(str(c) for c in sorted(cells))}")
            if self.files is not None:
                lines.append(f"{attribute} files: {', '.join(self.files[attribute])}")
        return "\n".join(lines)


@dataclass(frozen=True)
class TypeMapAnswer:
    types: Mapping[str, AttributeOrigin]

    variant = "type-map"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "attributes": {
                name: {"type": str(origin.type), "sources": sorted(origin.sources)}
                for name, origin in self.types.items()
            },
        }

    def render(self) -> str:
        return "\n".join(f"{name}: {origin}" for name, origin in self.types.items())


@dataclass(frozen=True)
class WhyNotAnswer:
    explanation: WhyNotExplanation

    variant = "why-not"

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.variant, **self.explanation.to_dict()}

    def render(self) -> str:
        lines = [f"missing: {self.explanation.expectation_text()}"]
        lines.extend(f"- {finding}" for finding in self.explanation.findings)
        return "\n".join(lines)


# -- workflow answers -----------------------------------------------------------


def _stamp(activity: Activity, which: str) -> Optional[str]:
    moment = activity.start if which == "start" else activity.end
    return moment.isoformat() if moment else None


@dataclass(frozen=True)
class ActivityListAnswer:
    activities: Tuple[Activity, ...]
    granularity: Granularity

    variant = "activities"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "granularity": self.granularity.value,
            "activities": [a.id for a in self.activities],
        }

    def render(self) -> str:
        return " -> ".join(a.id for a in self.activities) or "(no activities)"


@dataclass(frozen=True)
class ProcessAnswer:
    """Ordered process list: derivation steps origin first."""

    steps: Tuple[ChainStep, ...]

    variant = "processes"

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.variant, "steps": [step.to_dict() for step in self.steps]}

    def render(self) -> str:
        return "\n".join(f"{n}. {step}" for n, step in enumerate(self.steps, start=1))


@dataclass(frozen=True)
class PlanAnswer:
    """Plans behind the trace, each with its revision chain (oldest first)."""

    plans: Tuple[Tuple[str, Tuple[str, ...]], ...]

    variant = "plans"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "plans": [{"plan": plan, "revisions": list(chain)} for plan, chain in self.plans],
        }

    def render(self) -> str:
        if not self.plans:
            return "(no plan)"
        return "\n".join(f"{plan}: {' -> '.join(chain)}" for plan, chain in self.plans)


@dataclass(frozen=True)
class LocationAnswer:
    locations: Tuple[Tuple[str, str], ...]

    variant = "locations"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "locations": [{"node": node, "location": where} for node, where in self.locations],
        }

    def render(self) -> str:
        return "\n".join(f"{node}: {where}" for node, where in self.locations) or "(no locations)"


@dataclass(frozen=True)
class TimeAnswer:
    activities: Tuple[Activity, ...]

    variant = "timestamps"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "timestamps": [
                {"activity": a.id, "start": _stamp(a, "start"), "end": _stamp(a, "end")}
                for a in self.activities
            ],
        }

    def render(self) -> str:
        return "\n".join(
            f"{a.id}: {_stamp(a, 'start') or '?'} .. {_stamp(a, 'end') or '?'}"
            for a in self.activities
        )


@dataclass(frozen=True)
class AgentListAnswer:
    agents: Tuple[Agent, ...]

    variant = "agents"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "agents": [{"id": a.id, "type": a.agent_type.value} for a in self.agents],
        }

    def render(self) -> str:
        return "\n".join(f"{a.id} ({a.agent_type.value})" for a in self.agents) or "(no agents)"


@dataclass(frozen=True)
class DeviceListAnswer:
    devices: Tuple[Entity, ...]

    variant = "devices"

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.variant, "devices": [d.id for d in self.devices]}

    def render(self) -> str:
        return "\n".join(d.id for d in self.devices) or "(no devices)"


@dataclass(frozen=True)
class NoteListAnswer:
    notes: Tuple[Note, ...]

    variant = "notes"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "notes": [n.model_dump(mode="json", exclude_none=True) for n in self.notes],
        }

    def render(self) -> str:
        return (
            "\n".join(f"[{n.kind.value}] {n.target}: {n.text}" for n in self.notes)
            or "(no notes)"
        )


# -- combined -------------------------------------------------------------------


@dataclass(frozen=True)
class CombinedAnswer:
    """Data answer traced through files to workflow entities.

    ``data`` is None for the workflow-only kinds.
    """

    data: Optional[DataAnswer]
    polynomial: Polynomial
    lifted: Polynomial
    files: Tuple[str, ...]
    entities: Tuple[str, ...]
    chains: Mapping[str, Tuple[ChainStep, ...]] = field(default_factory=dict)
    workflow: Mapping[str, WorkflowAnswer] = field(default_factory=dict)

    variant = "combined"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.variant,
            "data": self.data.to_dict() if self.data is not None else None,
            "polynomial": str(self.polynomial),
            "lifted": str(self.lifted),
            "files": list(self.files),
            "entities": list(self.entities),
            "chains": {
                entity: [step.to_dict() for step in chain] for entity, chain in self.chains.items()
            },
            "workflow": {entity: answer.to_dict() for entity, answer in self.workflow.items()},
        }

    def render(self) -> str:
        lines = []
        if self.data is not None:
            lines.append("data:")
            lines.extend(f"  {line}" for line in self.data.render().splitlines())
        lines.append(f"polynomial: {self.polynomial}")
        lines.append(f"files: {self.lifted}")
        for entity in self.entities:
            lines.append(f"entity {entity}:")
            for step in self.chains.get(entity, ()):
                lines.append(f"  {step}")
            if entity in self.workflow:
                lines.extend(f"  | {line}" for line in self.workflow[entity].render().splitlines())
        return "\n".join(lines)


DataAnswer = Union[PolynomialAnswer, WitnessAnswer, WhereAnswer, TypeMapAnswer, WhyNotAnswer]
WorkflowAnswer = Union[
    ActivityListAnswer,
    ProcessAnswer,
    PlanAnswer,
    LocationAnswer,
    TimeAnswer,
    AgentListAnswer,
    DeviceListAnswer,
    NoteListAnswer,
]
Answer = Union[DataAnswer, WorkflowAnswer, CombinedAnswer]


def dedupe(items: Sequence[str]) -> List[str]:
    """Order-preserving de-duplication."""
    return list(dict.fromkeys(items))
