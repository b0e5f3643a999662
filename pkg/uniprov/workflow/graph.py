"""
Workflow provenance graph.

:class:`ProvGraph` keeps agents, activities and entities in a networkx
multigraph with typed edges and validates the PROV endpoint constraints on
every change. Three dimensions share the one graph:

- prospective provenance: plan entities linked with ``hadPlan``,
- retrospective provenance: executed activities with timestamps,
- evolution: ``wasRevisionOf`` chains between plans.

Activity nesting (``Activity.parent``) gives coarse and fine views of the
same execution.
"""

from dataclasses import dataclass
from typing import Any, Collection, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
from pydantic import TypeAdapter, ValidationError

from uniprov.common.errors import (
    GraphDocumentError,
    GraphValidationError,
    RevisionChainError,
    UnknownNodeError,
    first_validation_message,
)
from uniprov.common.logging import get_logger
from uniprov.workflow.model import (
    EDGE_RULES,
    Activity,
    Agent,
    Edge,
    EdgeType,
    Entity,
    EntityCategory,
    Node,
    Note,
)

logger = get_logger(__name__)

FINE = "fine"
COARSE = "coarse"
GRANULARITIES = (FINE, COARSE)

# entity categories that take part in derivation chains; devices and plans
# are reached through the "which" and "why" questions instead
_LINEAGE_CATEGORIES = frozenset(
    {EntityCategory.DATA, EntityCategory.SAMPLE, EntityCategory.DOCUMENT}
)


@dataclass(frozen=True)
class ChainStep:
    """One entity of a derivation chain with its generating activity and agents."""

    entity: str
    activity: Optional[str]
    agents: FrozenSet[str]

    def to_dict(self) -> Dict[str, Any]:
        return {"entity": self.entity, "activity": self.activity, "agents": sorted(self.agents)}

    def __str__(self) -> str:
        agents = ", ".join(sorted(self.agents)) or "-"
        return f"{self.entity} <- {self.activity or '-'} [{agents}]"


class ProvGraph:
    """Typed PROV multigraph.

    Mutating methods change the graph in place and return it, so calls chain.
    Concurrent readers are fine; mutation needs exclusive access.
    """

    def __init__(self) -> None:
        self._graph = nx.MultiDiGraph()
        self._notes: List[Note] = []

    # -- construction -----------------------------------------------------

    def add_node(self, node: Node) -> "ProvGraph":
        """Add an agent, activity or entity.

        Raises:
            GraphValidationError: If the id is taken.
            UnknownNodeError: If an activity's parent is not a known activity.
        """
        if node.id in self._graph:
            raise GraphValidationError(f"duplicate node id: {node.id}")
        if isinstance(node, Activity) and node.parent is not None:
            self._require(node.parent, Activity, "parent activity")
        self._graph.add_node(node.id, node=node)
        logger.debug("Added %s %s", node.kind, node.id)
        return self

    def add_edge(self, edge: Edge) -> "ProvGraph":
        """Add a typed edge after checking endpoints, kinds and duplicates.

        Raises:
            UnknownNodeError: If an endpoint is missing.
            GraphValidationError: On a kind violation or duplicate edge.
            RevisionChainError: If the edge closes a wasRevisionOf cycle.
        """
        self._check_edge(edge)
        if self._graph.has_edge(edge.source, edge.target, key=edge.type.value):
            raise GraphValidationError(f"duplicate edge: {edge}")
        if edge.type is EdgeType.WAS_REVISION_OF and self._closes_revision_cycle(edge):
            raise RevisionChainError(f"wasRevisionOf cycle through {edge.source}")
        self._graph.add_edge(edge.source, edge.target, key=edge.type.value, edge=edge)
        logger.debug("Added edge %s", edge)
        return self

    def attach_note(self, note: Note) -> "ProvGraph":
        """Attach a note, design comment or warning to a node.

        Raises:
            UnknownNodeError: If the target (or author) is missing.
        """
        self._check_note(note)
        self._notes.append(note)
        logger.debug("Attached %s to %s", note.kind.value, note.target)
        return self

    def _require(self, node_id: str, kind: type, what: str) -> Node:
        node = self._graph.nodes[node_id]["node"] if node_id in self._graph else None
        if node is None or not isinstance(node, kind):
            raise UnknownNodeError(node_id, what)
        return node

    def _check_edge(self, edge: Edge) -> None:
        for node_id in (edge.source, edge.target):
            if node_id not in self._graph:
                raise UnknownNodeError(node_id)
        source, target = self.node(edge.source), self.node(edge.target)
        source_kind, target_kind = EDGE_RULES[edge.type]
        if not isinstance(source, source_kind) or not isinstance(target, target_kind):
            raise GraphValidationError(
                f"{edge.type.value} expects {source_kind.__name__} -> {target_kind.__name__}, "
                f"got {source.kind} -> {target.kind}"
            )
        if edge.type is EdgeType.HAD_PLAN and target.category is not EntityCategory.PLAN:
            raise GraphValidationError(f"hadPlan target {target.id} is not a plan")
        if edge.type is EdgeType.WAS_REVISION_OF:
            for node in (source, target):
                if node.category is not EntityCategory.PLAN:
                    raise GraphValidationError(f"wasRevisionOf endpoint {node.id} is not a plan")

    def _check_note(self, note: Note) -> None:
        if note.target not in self._graph:
            raise UnknownNodeError(note.target, "note target")
        if note.author is not None:
            self._require(note.author, Agent, "note author")

    def _closes_revision_cycle(self, edge: Edge) -> bool:
        if edge.source == edge.target:
            return True
        view = self._revision_view()
        return edge.target in view and edge.source in view and nx.has_path(
            view, edge.target, edge.source
        )

    def _revision_view(self) -> nx.DiGraph:
        view = nx.DiGraph()
        view.add_edges_from(self._edge_pairs(EdgeType.WAS_REVISION_OF))
        return view

    def validate(self) -> "ProvGraph":
        """Re-check every invariant of the graph.

        Raises:
            GraphValidationError: (or a subclass) on the first violation found.
        """
        for activity in self.activities():
            if activity.parent is not None:
                self._require(activity.parent, Activity, "parent activity")
        nesting = nx.DiGraph([(a.id, a.parent) for a in self.activities() if a.parent is not None])
        if not nx.is_directed_acyclic_graph(nesting):
            raise GraphValidationError("activity nesting contains a cycle")
        for edge in self.edges():
            self._check_edge(edge)
        if not nx.is_directed_acyclic_graph(self._revision_view()):
            raise RevisionChainError("wasRevisionOf contains a cycle")
        for note in self._notes:
            self._check_note(note)
        return self

    # -- access -----------------------------------------------------------

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._graph

    @property
    def node_count(self) -> int:
        return self._graph.number_of_nodes()

    def node(self, node_id: str) -> Node:
        if node_id not in self._graph:
            raise UnknownNodeError(node_id)
        return self._graph.nodes[node_id]["node"]

    def entity(self, node_id: str) -> Entity:
        return self._require(node_id, Entity, "entity")  # type: ignore[return-value]

    def activity(self, node_id: str) -> Activity:
        return self._require(node_id, Activity, "activity")  # type: ignore[return-value]

    def _nodes_of(self, kind: type) -> List[Any]:
        nodes = [data["node"] for _, data in self._graph.nodes(data=True)]
        return sorted((n for n in nodes if isinstance(n, kind)), key=lambda n: n.id)

    def agents(self) -> List[Agent]:
        return self._nodes_of(Agent)

    def activities(self) -> List[Activity]:
        return self._nodes_of(Activity)

    def entities(self) -> List[Entity]:
        return self._nodes_of(Entity)

    def edges(self, edge_type: Optional[EdgeType] = None) -> List[Edge]:
        """Edges sorted by (type, from, to), optionally of one type."""
        edges = [data["edge"] for _, _, data in self._graph.edges(data=True)]
        if edge_type is not None:
            edges = [e for e in edges if e.type is edge_type]
        return sorted(edges, key=Edge.key)

    def notes(self) -> List[Note]:
        return sorted(self._notes, key=Note.sort_key)

    def notes_for(self, node_ids: Iterable[str]) -> List[Note]:
        wanted = set(node_ids)
        return [note for note in self.notes() if note.target in wanted]

    def _edge_pairs(self, edge_type: EdgeType) -> List[Tuple[str, str]]:
        return [
            (source, target)
            for source, target, key in self._graph.edges(keys=True)
            if key == edge_type.value
        ]

    def targets(self, node_id: str, edge_type: EdgeType) -> List[str]:
        """Ids reached from ``node_id`` over outgoing edges of one type, sorted."""
        return sorted(
            target
            for _, target, key in self._graph.out_edges(node_id, keys=True)
            if key == edge_type.value
        )

    def sources(self, node_id: str, edge_type: EdgeType) -> List[str]:
        """Ids with an edge of one type into ``node_id``, sorted."""
        return sorted(
            source
            for source, _, key in self._graph.in_edges(node_id, keys=True)
            if key == edge_type.value
        )

    # -- serialization ----------------------------------------------------

    def serialize(self) -> Dict[str, Any]:
        """Graph document with deterministic ordering."""

        def dump(model: Any) -> Dict[str, Any]:
            return model.model_dump(mode="json", by_alias=True, exclude_none=True)

        return {
            "agents": [dump(n) for n in self.agents()],
            "activities": [dump(n) for n in self.activities()],
            "entities": [dump(n) for n in self.entities()],
            "edges": [dump(e) for e in self.edges()],
            "notes": [dump(n) for n in self.notes()],
        }

    @classmethod
    def deserialize(cls, document: Mapping[str, Any]) -> "ProvGraph":
        """Rebuild and validate a graph from :meth:`serialize` output.

        Raises:
            GraphDocumentError: If the document is malformed.
            GraphValidationError: (or a subclass) if the content violates an invariant.
        """
        if not isinstance(document, Mapping):
            raise GraphDocumentError("graph document must be a JSON object")
        unknown = set(document) - {"agents", "activities", "entities", "edges", "notes"}
        if unknown:
            raise GraphDocumentError(f"unknown graph section: {sorted(unknown)[0]}")
        sections = (
            ("agents", Agent),
            ("activities", Activity),
            ("entities", Entity),
            ("edges", Edge),
            ("notes", Note),
        )
        parsed: Dict[str, List[Any]] = {}
        for name, model in sections:
            try:
                parsed[name] = TypeAdapter(List[model]).validate_python(  # type: ignore[valid-type]
                    document.get(name, [])
                )
            except ValidationError as exc:
                message = first_validation_message(exc)
                raise GraphDocumentError(f"invalid {name}: {message}") from exc

        graph = cls()
        for node in parsed["agents"] + parsed["activities"] + parsed["entities"]:
            if node.id in graph._graph:
                raise GraphValidationError(f"duplicate node id: {node.id}")
            # parents may be listed after their children; checked in validate()
            graph._graph.add_node(node.id, node=node)
        for edge in parsed["edges"]:
            graph.add_edge(edge)
        graph._notes.extend(parsed["notes"])
        graph.validate()
        logger.debug(
            "Loaded graph: %d nodes, %d edges, %d notes",
            graph.node_count,
            graph._graph.number_of_edges(),
            len(graph._notes),
        )
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProvGraph):
            return NotImplemented
        return self.serialize() == other.serialize()

    # -- traversals -------------------------------------------------------

    def _lineage_inputs(self, entity_id: str) -> Set[str]:
        """Entities an entity directly depends on."""
        inputs = set(self.targets(entity_id, EdgeType.WAS_DERIVED_FROM))
        for activity_id in self.targets(entity_id, EdgeType.WAS_GENERATED_BY):
            inputs.update(self.targets(activity_id, EdgeType.USED))
        return {i for i in inputs if self.entity(i).category in _LINEAGE_CATEGORIES}

    def _lineage(self, entity_id: str) -> nx.DiGraph:
        """Dependency graph (origin -> result) of everything ``entity_id`` derives from."""
        self.entity(entity_id)
        lineage = nx.DiGraph()
        lineage.add_node(entity_id)
        pending = [entity_id]
        while pending:
            current = pending.pop()
            for origin in self._lineage_inputs(current):
                if origin not in lineage:
                    pending.append(origin)
                lineage.add_edge(origin, current)
        return lineage

    def _ordered(self, lineage: nx.DiGraph) -> List[str]:
        try:
            return list(nx.lexicographical_topological_sort(lineage, key=str))
        except nx.NetworkXUnfeasible:
            raise GraphValidationError("derivation cycle between entities") from None

    def _agents_for(self, entity_id: str, activity_id: Optional[str]) -> FrozenSet[str]:
        agents = set(self.targets(entity_id, EdgeType.WAS_ATTRIBUTED_TO))
        if activity_id is not None:
            agents.update(self.targets(activity_id, EdgeType.WAS_ASSOCIATED_WITH))
        return frozenset(agents)

    def derivation_chain(self, entity_id: str) -> List[ChainStep]:
        """Entities ``entity_id`` derives from, origin first, ending with itself.

        Each step names the generating activity (the first by id when several)
        and the agents associated with it or the entity.

        Raises:
            UnknownNodeError: If the entity does not exist.
        """
        steps = []
        for current in self._ordered(self._lineage(entity_id)):
            generators = self.targets(current, EdgeType.WAS_GENERATED_BY)
            activity = generators[0] if generators else None
            steps.append(ChainStep(current, activity, self._agents_for(current, activity)))
        return steps

    def path_activities(self, entity_id: str) -> List[str]:
        """Activities that generated an entity of the derivation chain."""
        activities = set()
        for current in self._lineage(entity_id):
            activities.update(self.targets(current, EdgeType.WAS_GENERATED_BY))
        return sorted(activities)

    def children(self, activity_id: str) -> List[Activity]:
        return [a for a in self.activities() if a.parent == activity_id]

    def top_level(self, activity_id: str) -> Activity:
        activity = self.activity(activity_id)
        while activity.parent is not None:
            activity = self.activity(activity.parent)
        return activity

    def leaves(self, activity_id: str) -> List[Activity]:
        children = self.children(activity_id)
        if not children:
            return [self.activity(activity_id)]
        return [leaf for child in children for leaf in self.leaves(child.id)]

    def _touches(self, activity_id: str, lineage: Collection[str]) -> bool:
        """Whether an activity used or generated an entity of the lineage."""
        touched = set(self.targets(activity_id, EdgeType.USED))
        touched.update(self.sources(activity_id, EdgeType.WAS_GENERATED_BY))
        return not touched.isdisjoint(lineage)

    def activity_trace(self, entity_id: str, granularity: str = FINE) -> List[Activity]:
        """Activities on the derivation path of an entity.

        ``coarse`` reports top-level activities. ``fine`` replaces a composite
        activity by the leaves below it that used or generated an entity of
        the path; siblings that touched none are left out, and a composite
        whose leaves touched none is reported itself. Both are ordered by
        start time then id.

        Raises:
            UnknownNodeError: If the entity does not exist.
            GraphValidationError: For an unknown granularity.
        """
        if granularity not in GRANULARITIES:
            raise GraphValidationError(f"unknown granularity: {granularity}")
        lineage = set(self._lineage(entity_id))
        selected: Dict[str, Activity] = {}
        for activity_id in self.path_activities(entity_id):
            if granularity == COARSE:
                chosen = [self.top_level(activity_id)]
            else:
                chosen = [
                    leaf for leaf in self.leaves(activity_id) if self._touches(leaf.id, lineage)
                ]
                chosen = chosen or [self.activity(activity_id)]
            for activity in chosen:
                selected[activity.id] = activity
        return sorted(selected.values(), key=Activity.sort_key)

    def plan_revisions(self, plan_id: str) -> List[Entity]:
        """The linear wasRevisionOf chain containing a plan, oldest first.

        Raises:
            GraphValidationError: If the entity is not a plan.
            RevisionChainError: If the chain branches.
        """
        plan = self.entity(plan_id)
        if plan.category is not EntityCategory.PLAN:
            raise GraphValidationError(f"not a plan entity: {plan_id}")
        view = self._revision_view()
        if plan_id not in view:
            return [plan]
        component = nx.node_connected_component(view.to_undirected(), plan_id)
        for node_id in component:
            if view.out_degree(node_id) > 1 or view.in_degree(node_id) > 1:
                raise RevisionChainError(f"ambiguous revision chain at {node_id}")
        # edges point from the newer revision to the older one
        ordered = list(nx.topological_sort(view.subgraph(component)))
        return [self.entity(node_id) for node_id in reversed(ordered)]

    def affected_entities(self, entity_id: str) -> List[str]:
        """Entities downstream of ``entity_id``, origin first with id tie-break.

        Raises:
            UnknownNodeError: If the entity does not exist.
        """
        self.entity(entity_id)
        impact = nx.DiGraph()
        impact.add_node(entity_id)
        pending = [entity_id]
        while pending:
            current = pending.pop()
            downstream = set(self.sources(current, EdgeType.WAS_DERIVED_FROM))
            for activity_id in self.sources(current, EdgeType.USED):
                downstream.update(self.sources(activity_id, EdgeType.WAS_GENERATED_BY))
            for result in downstream:
                if result not in impact:
                    pending.append(result)
                impact.add_edge(current, result)
        return [node for node in self._ordered(impact) if node != entity_id]

    # -- question helpers -------------------------------------------------

    def plans_of(self, activity_ids: Iterable[str]) -> List[str]:
        return sorted({p for a in activity_ids for p in self.targets(a, EdgeType.HAD_PLAN)})

    def devices_used(self, activity_ids: Iterable[str]) -> List[Entity]:
        used = {e for a in activity_ids for e in self.targets(a, EdgeType.USED)}
        return [
            self.entity(e)
            for e in sorted(used)
            if self.entity(e).category is EntityCategory.DEVICE
        ]

    def responsible_agents(self, node_ids: Iterable[str]) -> List[Agent]:
        """Agents associated with or credited for the nodes, plus those they act for."""
        agents: Set[str] = set()
        for node_id in node_ids:
            agents.update(self.targets(node_id, EdgeType.WAS_ASSOCIATED_WITH))
            agents.update(self.targets(node_id, EdgeType.WAS_ATTRIBUTED_TO))
        pending = list(agents)
        while pending:
            for principal in self.targets(pending.pop(), EdgeType.ACTED_ON_BEHALF_OF):
                if principal not in agents:
                    agents.add(principal)
                    pending.append(principal)
        return [self.node(a) for a in sorted(agents)]  # type: ignore[misc]
