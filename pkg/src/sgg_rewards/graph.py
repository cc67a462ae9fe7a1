"""Scene graph data model: boxes, object nodes, relation triplets, validation.

All types are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence


def normalize_label(label: str) -> str:
    """Lowercase and collapse runs of whitespace to single spaces."""
    return " ".join(label.lower().split())


class NodeIdError(ValueError):
    """Raised when an object id does not follow the "name.number" scheme."""


class NoSeparatorError(NodeIdError):
    pass


class NonNumericIndexError(NodeIdError):
    pass


_INDEX_RE = re.compile(r"[0-9]+\Z")


def parse_node_id(raw: str) -> tuple[str, int]:
    """Split an object id like "traffic light.12" into ("traffic light", 12).

    The split happens at the LAST dot so class names may themselves contain
    dots or spaces. The suffix must be an unsigned base-10 integer.
    """
    if not raw:
        raise NoSeparatorError("empty object id")
    head, sep, tail = raw.rpartition(".")
    if not sep:
        raise NoSeparatorError(f"object id {raw!r} has no '.' separator")
    if not _INDEX_RE.fullmatch(tail.strip()):
        raise NonNumericIndexError(f"object id {raw!r} has non-numeric index {tail!r}")
    label = normalize_label(head)
    if not label:
        raise NoSeparatorError(f"object id {raw!r} has an empty class label")
    return label, int(tail)


def format_node_id(class_label: str, instance_index: int) -> str:
    return f"{class_label}.{instance_index}"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel rectangle [x1, y1, x2, y2], x1 < x2 and y1 < y2."""

    x1: float
    y1: float
    x2: float
    y2: float

    def is_valid(self) -> bool:
        coords = (self.x1, self.y1, self.x2, self.y2)
        return all(math.isfinite(c) for c in coords) and self.x1 < self.x2 and self.y1 < self.y2

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class ObjectNode:
    """One detected object: id text, normalized class label, index, box."""

    raw_id: str
    class_label: str
    instance_index: int
    box: BBox

    @property
    def canonical_id(self) -> str:
        return format_node_id(self.class_label, self.instance_index)


@dataclass(frozen=True)
class RelationTriplet:
    """Directed relation <subject, predicate, object>; endpoint ids are canonical."""

    subject_id: str
    predicate: str
    object_id: str


@dataclass(frozen=True)
class SceneGraph:
    """Validated scene graph: nodes plus relation triplets, optional image size."""

    nodes: tuple[ObjectNode, ...]
    edges: tuple[RelationTriplet, ...]
    image_width: Optional[float] = None
    image_height: Optional[float] = None

    @cached_property
    def _id_to_index(self) -> dict[str, int]:
        return {node.canonical_id: i for i, node in enumerate(self.nodes)}

    def node_index(self, canonical_id: str) -> int:
        return self._id_to_index[canonical_id]

    def node_by_id(self, canonical_id: str) -> ObjectNode:
        return self.nodes[self._id_to_index[canonical_id]]

    def edge_endpoints(self, edge: RelationTriplet) -> tuple[ObjectNode, ObjectNode]:
        return self.node_by_id(edge.subject_id), self.node_by_id(edge.object_id)

    @property
    def image_dims(self) -> Optional[tuple[float, float]]:
        if self.image_width is None or self.image_height is None:
            return None
        return self.image_width, self.image_height


class ViolationCode(str, Enum):
    DUPLICATE_ID = "duplicate_id"
    DANGLING_ENDPOINT = "dangling_endpoint"
    DEGENERATE_BOX = "degenerate_box"
    NONFINITE_COORD = "nonfinite_coord"
    BAD_NODE_ID = "bad_node_id"
    SELF_RELATION = "self_relation"
    OUT_OF_IMAGE = "out_of_image"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    message: str
    fatal: bool = True

    def __str__(self) -> str:
        return f"{self.code.value}: {self.message}"


@dataclass
class GraphValidation:
    """Outcome of validate_graph: either a graph or the full violation list.

    ``graph`` is None whenever any fatal violation was found; it is never a
    partially repaired value. Non-fatal violations (out-of-image clamps,
    ground-truth self-relations) may accompany a valid graph.
    """

    graph: Optional[SceneGraph]
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.graph is not None

    @property
    def fatal_violations(self) -> list[Violation]:
        return [v for v in self.violations if v.fatal]


def _clamp_box(box: BBox, width: float, height: float) -> Optional[BBox]:
    """Clamp a box into [0,width]x[0,height]; None if clamping would degenerate it."""
    x1 = min(max(box.x1, 0.0), width)
    y1 = min(max(box.y1, 0.0), height)
    x2 = min(max(box.x2, 0.0), width)
    y2 = min(max(box.y2, 0.0), height)
    clamped = BBox(x1, y1, x2, y2)
    if not clamped.is_valid():
        return None
    return clamped


def clamp_to_image(
    graph: SceneGraph, width: float, height: float
) -> tuple[SceneGraph, list[Violation]]:
    """Clamp node boxes into the image with a warning per adjusted box.

    Boxes that would collapse to zero area (entirely outside the image) are
    kept as-is with a warning; their overlap with any in-image box is ~0
    anyway, and dropping nodes would cascade into dangling edges.
    """
    violations: list[Violation] = []
    new_nodes: list[ObjectNode] = []
    changed = False
    for node in graph.nodes:
        box = node.box
        if 0.0 <= box.x1 and 0.0 <= box.y1 and box.x2 <= width and box.y2 <= height:
            new_nodes.append(node)
            continue
        clamped = _clamp_box(box, width, height)
        if clamped is None:
            violations.append(
                Violation(
                    ViolationCode.OUT_OF_IMAGE,
                    f"node {node.raw_id!r} box {box.as_list()} lies entirely outside "
                    f"{width}x{height}; kept unclamped",
                    fatal=False,
                )
            )
            new_nodes.append(node)
            continue
        violations.append(
            Violation(
                ViolationCode.OUT_OF_IMAGE,
                f"node {node.raw_id!r} box {box.as_list()} clamped to {width}x{height}",
                fatal=False,
            )
        )
        new_nodes.append(
            ObjectNode(node.raw_id, node.class_label, node.instance_index, clamped)
        )
        changed = True
    if not changed and not violations:
        return graph, violations
    return (
        SceneGraph(tuple(new_nodes), graph.edges, graph.image_width, graph.image_height),
        violations,
    )


def validate_graph(
    nodes: Sequence[ObjectNode],
    edges: Sequence[RelationTriplet],
    image_dims: Optional[tuple[float, float]] = None,
    *,
    self_relation_fatal: bool = True,
) -> GraphValidation:
    """Validate nodes and edges into a SceneGraph, preserving input order.

    Collects the complete list of violations rather than stopping at the
    first. Self-relations are fatal for model predictions; ground-truth
    loaders pass ``self_relation_fatal=False`` to downgrade them to data
    warnings (the offending edge is dropped, never kept).
    """
    violations: list[Violation] = []

    seen: dict[str, str] = {}
    for node in nodes:
        coords = node.box.as_list()
        if not all(math.isfinite(c) for c in coords):
            violations.append(
                Violation(
                    ViolationCode.NONFINITE_COORD,
                    f"node {node.raw_id!r} has non-finite bbox {coords}",
                )
            )
        elif not node.box.is_valid():
            violations.append(
                Violation(
                    ViolationCode.DEGENERATE_BOX,
                    f"node {node.raw_id!r} has degenerate bbox {coords}",
                )
            )
        cid = node.canonical_id
        if cid in seen:
            violations.append(
                Violation(
                    ViolationCode.DUPLICATE_ID,
                    f"duplicate object id {node.raw_id!r} (canonical {cid!r})",
                )
            )
        else:
            seen[cid] = node.raw_id

    kept_edges: list[RelationTriplet] = []
    for i, edge in enumerate(edges):
        dangling = False
        for endpoint, role in ((edge.subject_id, "subject"), (edge.object_id, "object")):
            if endpoint not in seen:
                violations.append(
                    Violation(
                        ViolationCode.DANGLING_ENDPOINT,
                        f"relationship #{i} {role} {endpoint!r} is not among the objects",
                    )
                )
                dangling = True
        if edge.subject_id == edge.object_id:
            violations.append(
                Violation(
                    ViolationCode.SELF_RELATION,
                    f"relationship #{i} relates {edge.subject_id!r} to itself",
                    fatal=self_relation_fatal,
                )
            )
            if not self_relation_fatal:
                continue
        if not dangling:
            kept_edges.append(edge)

    if any(v.fatal for v in violations):
        return GraphValidation(None, violations)

    graph = SceneGraph(
        tuple(nodes),
        tuple(kept_edges),
        image_dims[0] if image_dims else None,
        image_dims[1] if image_dims else None,
    )
    if image_dims is not None:
        graph, clamp_violations = clamp_to_image(graph, image_dims[0], image_dims[1])
        violations.extend(clamp_violations)
    return GraphValidation(graph, violations)


def graph_from_json_dict(
    data: dict,
    image_dims: Optional[tuple[float, float]] = None,
    *,
    self_relation_fatal: bool = True,
) -> GraphValidation:
    """Build a SceneGraph from the canonical JSON schema.

    Expected shape::

        {"objects": [{"id": "person.1", "bbox": [x1, y1, x2, y2]}, ...],
         "relationships": [{"subject": "...", "predicate": "...", "object": "..."}, ...]}
    """
    violations: list[Violation] = []

    objects = data.get("objects")
    relationships = data.get("relationships")
    if not isinstance(objects, list) or not isinstance(relationships, list):
        violations.append(
            Violation(
                ViolationCode.BAD_NODE_ID,
                "'objects' and 'relationships' must both be JSON arrays",
            )
        )
        return GraphValidation(None, violations)

    nodes: list[ObjectNode] = []
    for i, entry in enumerate(objects):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            violations.append(
                Violation(ViolationCode.BAD_NODE_ID, f"object #{i} lacks a string 'id'")
            )
            continue
        raw_id = entry["id"]
        bbox = entry.get("bbox")
        if not _is_coord_list(bbox):
            violations.append(
                Violation(
                    ViolationCode.DEGENERATE_BOX,
                    f"object {raw_id!r} 'bbox' must be 4 finite numbers, got {bbox!r}",
                )
            )
            continue
        try:
            label, index = parse_node_id(raw_id)
        except NodeIdError as exc:
            violations.append(Violation(ViolationCode.BAD_NODE_ID, str(exc)))
            continue
        nodes.append(ObjectNode(raw_id, label, index, BBox(*map(float, bbox))))

    edges: list[RelationTriplet] = []
    for i, entry in enumerate(relationships):
        if not isinstance(entry, dict):
            violations.append(
                Violation(ViolationCode.DANGLING_ENDPOINT, f"relationship #{i} is not an object")
            )
            continue
        parts = {}
        bad = False
        for key in ("subject", "predicate", "object"):
            value = entry.get(key)
            if not isinstance(value, str) or not value.strip():
                violations.append(
                    Violation(
                        ViolationCode.DANGLING_ENDPOINT,
                        f"relationship #{i} lacks a string {key!r}",
                    )
                )
                bad = True
            else:
                parts[key] = value
        if bad:
            continue
        edges.append(
            RelationTriplet(
                _canonicalize_ref(parts["subject"]),
                normalize_label(parts["predicate"]),
                _canonicalize_ref(parts["object"]),
            )
        )

    if any(v.fatal for v in violations):
        return GraphValidation(None, violations)

    result = validate_graph(
        nodes, edges, image_dims, self_relation_fatal=self_relation_fatal
    )
    result.violations = violations + result.violations
    if result.graph is not None and result.fatal_violations:
        result.graph = None
    return result


def graph_to_json_dict(graph: SceneGraph) -> dict:
    """Serialize back to the canonical JSON schema (canonical ids)."""
    return {
        "objects": [
            {"id": node.canonical_id, "bbox": node.box.as_list()} for node in graph.nodes
        ],
        "relationships": [
            {"subject": e.subject_id, "predicate": e.predicate, "object": e.object_id}
            for e in graph.edges
        ],
    }


def _canonicalize_ref(raw: str) -> str:
    """Map an edge endpoint reference onto the canonical node id form."""
    try:
        label, index = parse_node_id(raw)
    except NodeIdError:
        return raw.strip()
    return format_node_id(label, index)


def _is_coord_list(value) -> bool:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        return False
    return all(
        isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c)
        for c in value
    )


def iter_triplet_views(graph: SceneGraph) -> Iterable[tuple[RelationTriplet, ObjectNode, ObjectNode]]:
    """Yield (edge, subject node, object node) for every edge."""
    for edge in graph.edges:
        subj, obj = graph.edge_endpoints(edge)
        yield edge, subj, obj
