"""Deterministic synthetic corpora for tests, benchmarks, and demos."""

from __future__ import annotations

import json
import random
from typing import Optional, Sequence

from .dataset import DatasetRecord
from .graph import (
    BBox,
    ObjectNode,
    RelationTriplet,
    SceneGraph,
    format_node_id,
    graph_to_json_dict,
)

OBJECT_CLASSES = (
    "person", "dog", "cat", "car", "bike", "tree", "chair", "table",
    "hat", "horse", "building", "window", "street", "traffic light",
)
PREDICATE_CLASSES = (
    "on", "under", "holding", "riding", "wearing", "near",
    "behind", "above", "next to", "looking at",
)


def make_random_graph(
    rng: random.Random,
    n_nodes: int = 4,
    n_edges: int = 3,
    width: float = 640.0,
    height: float = 480.0,
    classes: Sequence[str] = OBJECT_CLASSES,
    predicates: Sequence[str] = PREDICATE_CLASSES,
) -> SceneGraph:
    """Random valid graph with pairwise-distinct (class, box) nodes."""
    nodes: list[ObjectNode] = []
    counters: dict[str, int] = {}
    seen: set[tuple[str, tuple[float, float, float, float]]] = set()
    while len(nodes) < n_nodes:
        label = rng.choice(classes)
        box = _random_box(rng, width, height)
        key = (label, (box.x1, box.y1, box.x2, box.y2))
        if key in seen:
            continue
        seen.add(key)
        counters[label] = counters.get(label, 0) + 1
        raw_id = format_node_id(label, counters[label])
        nodes.append(ObjectNode(raw_id, label, counters[label], box))

    pairs = [(i, j) for i in range(n_nodes) for j in range(n_nodes) if i != j]
    rng.shuffle(pairs)
    edges = tuple(
        RelationTriplet(
            nodes[i].canonical_id, rng.choice(predicates), nodes[j].canonical_id
        )
        for i, j in pairs[: min(n_edges, len(pairs))]
    )
    return SceneGraph(tuple(nodes), edges, width, height)


def make_corpus(
    rng: random.Random,
    n_images: int,
    min_nodes: int = 2,
    max_nodes: int = 6,
    min_edges: int = 1,
    max_edges: int = 5,
) -> list[DatasetRecord]:
    records = []
    for i in range(n_images):
        n_nodes = rng.randint(min_nodes, max_nodes)
        n_edges = rng.randint(min_edges, min(max_edges, n_nodes * (n_nodes - 1)))
        graph = make_random_graph(rng, n_nodes, n_edges)
        records.append(
            DatasetRecord(f"img_{i:05d}", graph.image_width, graph.image_height, graph)
        )
    return records


def graph_response(graph: SceneGraph, think: str = "Listing the visible objects and relations.") -> str:
    """Render a perfectly formatted response for a graph."""
    return f"<think>{think}</think><answer>{json.dumps(graph_to_json_dict(graph))}</answer>"


def degraded_response(
    rng: random.Random, graph: SceneGraph, kind: Optional[str] = None
) -> str:
    """Produce one of several characteristic failure modes (or a clean response)."""
    kinds = ("valid", "no_think", "bare_json", "garbage", "missing_key", "bad_json")
    if kind is None:
        kind = rng.choice(kinds)
    payload = graph_to_json_dict(graph)
    if kind == "valid":
        return graph_response(graph)
    if kind == "no_think":
        return f"<answer>{json.dumps(payload)}</answer>"
    if kind == "bare_json":
        return f"```json\n{json.dumps(payload)}\n```"
    if kind == "garbage":
        return "I cannot generate a scene graph for this image."
    if kind == "missing_key":
        del payload["relationships"]
        return f"<think>hm</think><answer>{json.dumps(payload)}</answer>"
    if kind == "bad_json":
        text = json.dumps(payload)
        return f"<think>hm</think><answer>{text[: len(text) // 2]}</answer>"
    raise ValueError(f"unknown degradation kind {kind!r}")


def _random_box(rng: random.Random, width: float, height: float) -> BBox:
    x1 = round(rng.uniform(0.0, width - 20.0), 1)
    y1 = round(rng.uniform(0.0, height - 20.0), 1)
    x2 = round(rng.uniform(x1 + 10.0, min(x1 + 200.0, width)), 1)
    y2 = round(rng.uniform(y1 + 10.0, min(y1 + 200.0, height)), 1)
    return BBox(x1, y1, x2, y2)
