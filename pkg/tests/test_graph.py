import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgg_rewards import (
    BBox,
    NonNumericIndexError,
    NoSeparatorError,
    ObjectNode,
    RelationTriplet,
    ViolationCode,
    clamp_to_image,
    format_node_id,
    graph_from_json_dict,
    graph_to_json_dict,
    normalize_label,
    parse_node_id,
    validate_graph,
)

from helpers import build_graph


class TestParseNodeId:
    def test_plain(self):
        assert parse_node_id("person.1") == ("person", 1)

    def test_multiword_label_splits_at_last_dot(self):
        assert parse_node_id("traffic light.12") == ("traffic light", 12)

    def test_label_containing_dots(self):
        assert parse_node_id("mr. fox.3") == ("mr. fox", 3)

    def test_no_separator(self):
        with pytest.raises(NoSeparatorError):
            parse_node_id("desk")

    def test_non_numeric_index(self):
        with pytest.raises(NonNumericIndexError):
            parse_node_id("desk.one")

    def test_negative_index_rejected(self):
        with pytest.raises(NonNumericIndexError):
            parse_node_id("desk.-1")

    def test_empty(self):
        with pytest.raises(NoSeparatorError):
            parse_node_id("")

    @given(
        label=st.text(
            alphabet=st.characters(whitelist_categories=["Ll"], max_codepoint=0x2FF),
            min_size=1,
            max_size=12,
        ),
        idx=st.integers(min_value=0, max_value=10**6),
    )
    def test_round_trip(self, label, idx):
        parsed_label, parsed_idx = parse_node_id(format_node_id(label, idx))
        assert parsed_label == normalize_label(label)
        assert parsed_idx == idx


class TestValidateGraph:
    def make_nodes(self):
        return [
            ObjectNode("person.1", "person", 1, BBox(0, 0, 10, 10)),
            ObjectNode("bike.1", "bike", 1, BBox(5, 5, 30, 30)),
        ]

    def test_valid(self):
        edges = [RelationTriplet("person.1", "riding", "bike.1")]
        result = validate_graph(self.make_nodes(), edges)
        assert result.ok
        assert len(result.graph.nodes) == 2
        assert len(result.graph.edges) == 1

    def test_dangling_endpoint(self):
        edges = [RelationTriplet("person.1", "chasing", "cat.9")]
        result = validate_graph(self.make_nodes(), edges)
        assert not result.ok
        assert any(v.code is ViolationCode.DANGLING_ENDPOINT for v in result.violations)

    def test_degenerate_box(self):
        nodes = self.make_nodes() + [ObjectNode("line.1", "line", 1, BBox(10, 10, 10, 40))]
        result = validate_graph(nodes, [])
        assert not result.ok
        assert any(v.code is ViolationCode.DEGENERATE_BOX for v in result.violations)

    def test_duplicate_id(self):
        nodes = self.make_nodes() + [ObjectNode("person.1", "person", 1, BBox(1, 1, 2, 2))]
        result = validate_graph(nodes, [])
        assert not result.ok
        assert any(v.code is ViolationCode.DUPLICATE_ID for v in result.violations)

    def test_self_relation_fatal_by_default(self):
        edges = [RelationTriplet("person.1", "touching", "person.1")]
        result = validate_graph(self.make_nodes(), edges)
        assert not result.ok

    def test_self_relation_dropped_for_ground_truth(self):
        edges = [
            RelationTriplet("person.1", "touching", "person.1"),
            RelationTriplet("person.1", "riding", "bike.1"),
        ]
        result = validate_graph(self.make_nodes(), edges, self_relation_fatal=False)
        assert result.ok
        assert len(result.graph.edges) == 1
        assert any(v.code is ViolationCode.SELF_RELATION for v in result.violations)

    def test_order_preserved(self):
        nodes = self.make_nodes()[::-1]
        result = validate_graph(nodes, [])
        assert [n.raw_id for n in result.graph.nodes] == ["bike.1", "person.1"]

    def test_violations_are_complete(self):
        nodes = self.make_nodes() + [
            ObjectNode("person.1", "person", 1, BBox(1, 1, 2, 2)),
            ObjectNode("dot.1", "dot", 1, BBox(3, 3, 3, 3)),
        ]
        edges = [RelationTriplet("ghost.1", "haunting", "phantom.2")]
        result = validate_graph(nodes, edges)
        codes = {v.code for v in result.violations}
        assert {
            ViolationCode.DUPLICATE_ID,
            ViolationCode.DEGENERATE_BOX,
            ViolationCode.DANGLING_ENDPOINT,
        } <= codes


class TestClamping:
    def test_overshoot_clamped_with_warning(self):
        graph = build_graph([("person.1", (-5, 10, 50, 120))], [], dims=None)
        clamped, violations = clamp_to_image(graph, 100, 100)
        assert clamped.nodes[0].box == BBox(0, 10, 50, 100)
        assert len(violations) == 1
        assert not violations[0].fatal

    def test_fully_outside_box_kept_with_warning(self):
        graph = build_graph([("bird.1", (200, 200, 250, 250))], [], dims=None)
        clamped, violations = clamp_to_image(graph, 100, 100)
        assert clamped.nodes[0].box == BBox(200, 200, 250, 250)
        assert len(violations) == 1

    def test_in_image_untouched(self):
        graph = build_graph([("person.1", (0, 0, 100, 100))], [], dims=None)
        clamped, violations = clamp_to_image(graph, 100, 100)
        assert clamped is graph
        assert violations == []


class TestJsonRoundTrip:
    PAYLOAD = {
        "objects": [
            {"id": "person.1", "bbox": [0, 0, 10, 10]},
            {"id": "traffic light.2", "bbox": [20, 20, 30, 40]},
        ],
        "relationships": [
            {"subject": "person.1", "predicate": "looking at", "object": "traffic light.2"}
        ],
    }

    def test_round_trip(self):
        result = graph_from_json_dict(self.PAYLOAD)
        assert result.ok
        dumped = graph_to_json_dict(result.graph)
        again = graph_from_json_dict(dumped)
        assert again.ok
        assert graph_to_json_dict(again.graph) == dumped

    def test_mixed_case_ids_resolve(self):
        payload = {
            "objects": [
                {"id": "Person.1", "bbox": [0, 0, 10, 10]},
                {"id": "Bike.1", "bbox": [0, 0, 5, 5]},
            ],
            "relationships": [
                {"subject": "person.1", "predicate": "Riding", "object": "bike.1"}
            ],
        }
        result = graph_from_json_dict(payload)
        assert result.ok
        assert result.graph.edges[0].predicate == "riding"

    def test_bad_bbox_rejected(self):
        payload = {
            "objects": [{"id": "a.1", "bbox": [0, 0, 10]}],
            "relationships": [],
        }
        result = graph_from_json_dict(payload)
        assert not result.ok

    def test_nonfinite_bbox_rejected(self):
        payload = {
            "objects": [{"id": "a.1", "bbox": [0, 0, math.inf, 10]}],
            "relationships": [],
        }
        assert not graph_from_json_dict(payload).ok

    def test_repeated_identical_objects_are_duplicate_ids_only_if_same_id(self):
        # the "desk.9/desk.10/desk.11 same box" pathology must parse fine
        payload = {
            "objects": [
                {"id": f"desk.{i}", "bbox": [214, 326, 499, 389]} for i in (9, 10, 11)
            ],
            "relationships": [],
        }
        result = graph_from_json_dict(payload)
        assert result.ok
        assert len(result.graph.nodes) == 3
