"""
PROV node, edge and note models.

Nodes are agents, activities and entities. Edges point from the result to
the origin, e.g. ``wasGeneratedBy(dataset -> measuring)``.
"""

from datetime import datetime, timezone
from enum import StrEnum
from typing import Annotated, ClassVar, Dict, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

NodeId = Annotated[str, Field(pattern=r"^[A-Za-z0-9_][A-Za-z0-9_.:-]*$", max_length=200)]


class AgentType(StrEnum):
    PERSON = "person"
    ORGANIZATION = "organization"
    SOFTWARE = "software"


class EntityCategory(StrEnum):
    DATA = "data"
    SAMPLE = "sample"
    DEVICE = "device"
    DOCUMENT = "document"
    PLAN = "plan"


class NoteKind(StrEnum):
    NOTE = "note"
    DESIGN_COMMENT = "design-comment"
    WARNING = "warning"


class EdgeType(StrEnum):
    USED = "used"
    WAS_GENERATED_BY = "wasGeneratedBy"
    WAS_ASSOCIATED_WITH = "wasAssociatedWith"
    WAS_ATTRIBUTED_TO = "wasAttributedTo"
    ACTED_ON_BEHALF_OF = "actedOnBehalfOf"
    WAS_DERIVED_FROM = "wasDerivedFrom"
    WAS_INFORMED_BY = "wasInformedBy"
    HAD_PLAN = "hadPlan"
    WAS_REVISION_OF = "wasRevisionOf"


def _utc(moment: datetime) -> datetime:
    """Naive timestamps are read as UTC."""
    return moment if moment.tzinfo else moment.replace(tzinfo=timezone.utc)


class _Model(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class Agent(_Model):
    id: NodeId
    agent_type: AgentType = Field(alias="type")
    attributes: Dict[str, str] = Field(default_factory=dict)

    kind: ClassVar[str] = "Agent"


class Activity(_Model):
    id: NodeId
    start: Optional[datetime] = None
    end: Optional[datetime] = None
    parent: Optional[NodeId] = None
    attributes: Dict[str, str] = Field(default_factory=dict)

    kind: ClassVar[str] = "Activity"

    @model_validator(mode="after")
    def _check_interval(self) -> "Activity":
        if self.start is not None and self.end is not None and _utc(self.end) < _utc(self.start):
            raise ValueError(f"activity {self.id} ends before it starts")
        if self.parent == self.id:
            raise ValueError(f"activity {self.id} cannot be its own parent")
        return self

    def sort_key(self) -> Tuple[bool, datetime, str]:
        """Start time first (unknown starts last), then id."""
        if self.start is None:
            return (True, datetime.min.replace(tzinfo=timezone.utc), self.id)
        return (False, _utc(self.start), self.id)


class Entity(_Model):
    id: NodeId
    category: EntityCategory
    attributes: Dict[str, str] = Field(default_factory=dict)

    kind: ClassVar[str] = "Entity"


Node = Union[Agent, Activity, Entity]


class Edge(_Model):
    type: EdgeType
    source: NodeId = Field(alias="from")
    target: NodeId = Field(alias="to")

    def key(self) -> Tuple[str, str, str]:
        return (self.type.value, self.source, self.target)

    def __str__(self) -> str:
        return f"{self.type.value}({self.source} -> {self.target})"


class Note(_Model):
    target: NodeId
    kind: NoteKind
    text: str
    author: Optional[NodeId] = None
    timestamp: Optional[datetime] = None

    def sort_key(self) -> Tuple[str, bool, str, str, str]:
        stamp = self.timestamp.isoformat() if self.timestamp else ""
        return (self.target, self.timestamp is None, stamp, self.kind.value, self.text)


# endpoint kinds per edge type: (from, to)
EDGE_RULES: Dict[EdgeType, Tuple[type, type]] = {
    EdgeType.USED: (Activity, Entity),
    EdgeType.WAS_GENERATED_BY: (Entity, Activity),
    EdgeType.WAS_ASSOCIATED_WITH: (Activity, Agent),
    EdgeType.WAS_ATTRIBUTED_TO: (Entity, Agent),
    EdgeType.ACTED_ON_BEHALF_OF: (Agent, Agent),
    EdgeType.WAS_DERIVED_FROM: (Entity, Entity),
    EdgeType.WAS_INFORMED_BY: (Activity, Activity),
    EdgeType.HAD_PLAN: (Activity, Entity),
    EdgeType.WAS_REVISION_OF: (Entity, Entity),
}
