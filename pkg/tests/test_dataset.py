import json

import pytest

from sgg_rewards import (
    GroundTruthStore,
    MissingCategoriesError,
    PromptSpec,
    iter_dataset,
    load_class_list,
    load_dataset,
    render_prompt,
)

VALID_LINE = {
    "image_id": "img_1",
    "width": 640,
    "height": 480,
    "objects": [
        {"id": "person.1", "bbox": [10, 10, 100, 200]},
        {"id": "bike.1", "bbox": [5, 150, 120, 300]},
    ],
    "relationships": [
        {"subject": "person.1", "predicate": "riding", "object": "bike.1"}
    ],
}


def write_lines(path, payloads):
    with open(path, "w", encoding="utf-8") as handle:
        for payload in payloads:
            handle.write(json.dumps(payload) + "\n")
    return path


class TestLoadDataset:
    def test_three_valid_lines(self, tmp_path):
        lines = []
        for i in range(3):
            payload = dict(VALID_LINE)
            payload["image_id"] = f"img_{i}"
            lines.append(payload)
        load = load_dataset(write_lines(tmp_path / "gt.jsonl", lines))
        assert len(load.records) == 3
        assert load.skipped == 0

    def test_duplicate_node_id_skips_record(self, tmp_path):
        bad = dict(VALID_LINE)
        bad["objects"] = [
            {"id": "person.1", "bbox": [0, 0, 10, 10]},
            {"id": "person.1", "bbox": [20, 20, 30, 30]},
        ]
        load = load_dataset(write_lines(tmp_path / "gt.jsonl", [VALID_LINE, bad]))
        assert len(load.records) == 1
        assert load.skipped == 1
        assert any("line 2" in d for d in load.diagnostics)

    def test_empty_file_gives_empty_stream(self, tmp_path):
        path = tmp_path / "gt.jsonl"
        path.write_text("")
        assert list(iter_dataset(path)) == []

    def test_missing_dimensions_skipped(self, tmp_path):
        bad = {k: v for k, v in VALID_LINE.items() if k != "width"}
        load = load_dataset(write_lines(tmp_path / "gt.jsonl", [bad]))
        assert load.records == []
        assert load.skipped == 1

    def test_self_relation_dropped_with_warning(self, tmp_path):
        payload = dict(VALID_LINE)
        payload["relationships"] = [
            {"subject": "person.1", "predicate": "touching", "object": "person.1"},
            {"subject": "person.1", "predicate": "riding", "object": "bike.1"},
        ]
        load = load_dataset(write_lines(tmp_path / "gt.jsonl", [payload]))
        assert len(load.records) == 1
        assert len(load.records[0].gt.edges) == 1
        assert any("self" in d for d in load.diagnostics)

    def test_out_of_image_gt_clamped_not_fatal(self, tmp_path):
        payload = dict(VALID_LINE)
        payload["objects"] = [
            {"id": "person.1", "bbox": [10, 10, 700, 200]},
            {"id": "bike.1", "bbox": [5, 150, 120, 300]},
        ]
        load = load_dataset(write_lines(tmp_path / "gt.jsonl", [payload]))
        assert len(load.records) == 1
        assert load.records[0].gt.nodes[0].box.x2 == 640.0
        assert any("clamped" in d for d in load.diagnostics)

    def test_round_trip(self, tmp_path):
        path = write_lines(tmp_path / "gt.jsonl", [VALID_LINE])
        load = load_dataset(path)
        dumped = load.records[0].to_json_dict()
        again = write_lines(tmp_path / "gt2.jsonl", [dumped])
        reload = load_dataset(again)
        assert reload.records[0].to_json_dict() == dumped

    def test_store_lookup(self, tmp_path):
        path = write_lines(tmp_path / "gt.jsonl", [VALID_LINE])
        store = GroundTruthStore.from_file(path)
        assert "img_1" in store
        assert store.get("img_1").image_width == 640.0
        assert store.get("missing") is None


class TestRenderPrompt:
    def test_open_vocabulary_has_no_predefined_clause(self):
        text = render_prompt(PromptSpec(with_categories=False))
        assert "predefined object set" not in text
        assert "predefined relationship set" not in text
        assert '"objects"' in text
        assert "person.1" in text

    def test_closed_vocabulary_substitutes_classes(self):
        spec = PromptSpec(
            with_categories=True,
            object_classes=("person", "bike"),
            relation_classes=("riding", "on"),
        )
        text = render_prompt(spec)
        assert 'predefined object set: `"person", "bike"\'' in text
        assert 'predefined relationship set: `"riding", "on"\'' in text
        assert "{OBJ_CLS}" not in text
        assert "{REL_CLS}" not in text

    def test_missing_categories(self):
        with pytest.raises(MissingCategoriesError):
            render_prompt(PromptSpec(with_categories=True, object_classes=()))

    def test_deterministic(self):
        spec = PromptSpec(
            with_categories=True,
            object_classes=("person",),
            relation_classes=("on",),
        )
        assert render_prompt(spec) == render_prompt(spec)

    def test_class_list_loader(self, tmp_path):
        path = tmp_path / "classes.txt"
        path.write_text("person\n\nbike\n")
        assert load_class_list(path) == ("person", "bike")
