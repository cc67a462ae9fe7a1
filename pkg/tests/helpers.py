"""Shared test helpers (kept out of conftest so both suites can coexist)."""

import json

from sgg_rewards import (
    BBox,
    DatasetRecord,
    ObjectNode,
    RelationTriplet,
    SceneGraph,
    graph_to_json_dict,
    parse_node_id,
)

# Planted vectors with known cosines:
#   dog/wolf 0.9, dog/cat 0.8, on/under 0.5, on/above -1, north/east 0.
VECTOR_FILE_TEXT = """\
dog 1 0 0 0
wolf 0.9 0.4358898943540673 0 0
cat 0.8 0.6 0 0
on 0 0 1 0
under 0 0 0.5 0.8660254037844386
above 0 0 -1 0
north 0 1 0 0
east 1 0 0 0
person 0.5 0.5 0.5 0.5
traffic 1 1 0 0
light 0 0 1 1
zero 0 0 0 0
"""


def build_graph(nodes, edges, dims=(100.0, 100.0)):
    """nodes: [(id, box4)], edges: [(subj, pred, obj)]."""
    object_nodes = []
    for raw_id, box in nodes:
        label, idx = parse_node_id(raw_id)
        object_nodes.append(ObjectNode(raw_id, label, idx, BBox(*box)))
    triplets = [RelationTriplet(s, p, o) for s, p, o in edges]
    width, height = dims if dims else (None, None)
    return SceneGraph(tuple(object_nodes), tuple(triplets), width, height)


def perfect_response(graph):
    return (
        "<think>looking at the image</think>"
        f"<answer>{json.dumps(graph_to_json_dict(graph))}</answer>"
    )


def write_jsonl(path, payloads):
    with open(path, "w", encoding="utf-8") as handle:
        for payload in payloads:
            handle.write(json.dumps(payload) + "\n")
    return path


def gt_record_payload(record: DatasetRecord) -> dict:
    return record.to_json_dict()
