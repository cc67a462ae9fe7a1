import json
import random

import pytest

from sgg_rewards.synthetic import degraded_response, graph_response, make_corpus

VECTOR_FILE_TEXT = """\
dog 1 0 0 0
wolf 0.9 0.4358898943540673 0 0
on 0 0 1 0
under 0 0 0.5 0.8660254037844386
person 0.5 0.5 0.5 0.5
"""


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    """Golden fixture set shared by the parity tests and the CLI."""
    root = tmp_path_factory.mktemp("golden")
    rng = random.Random(77)
    records = make_corpus(rng, 25, min_nodes=2, max_nodes=4, max_edges=3)

    gt_path = root / "gt.jsonl"
    with open(gt_path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_dict()) + "\n")

    candidates = []
    for i in range(120):
        record = records[i % len(records)]
        candidates.append(
            {
                "image_id": record.image_id,
                "response_text": (
                    graph_response(record.gt)
                    if i % 3 == 0
                    else degraded_response(rng, record.gt)
                ),
            }
        )
    cand_path = root / "candidates.jsonl"
    with open(cand_path, "w", encoding="utf-8") as handle:
        for payload in candidates:
            handle.write(json.dumps(payload) + "\n")

    groups = [
        {"group_id": "uniform", "rewards": [1.5] * 8},
        {"group_id": "steps", "rewards": [1.0, 2.0, 3.0]},
        {"group_id": "pair", "rewards": [0.0, 1.0]},
        {"group_id": "tiny", "rewards": [2.0]},
        {"group_id": "mixed", "rewards": [0.0, 0.25, 1.75, 2.0, 0.5]},
    ]
    groups_path = root / "groups.jsonl"
    with open(groups_path, "w", encoding="utf-8") as handle:
        for payload in groups:
            handle.write(json.dumps(payload) + "\n")

    vectors_path = root / "vectors.txt"
    vectors_path.write_text(VECTOR_FILE_TEXT, encoding="utf-8")

    return {
        "root": root,
        "records": records,
        "gt": gt_path,
        "candidates": candidates,
        "candidates_path": cand_path,
        "groups": groups,
        "groups_path": groups_path,
        "vectors": vectors_path,
    }
