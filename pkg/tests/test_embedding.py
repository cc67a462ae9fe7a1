import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgg_rewards import (
    DimensionMismatchError,
    EmbeddingTable,
    EmptyTableError,
    embed_label,
    label_similarity,
    load_table,
)


class TestLoadTable:
    def test_basic(self, table):
        assert table.dimension == 4
        assert len(table) == 12

    def test_header_line(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("2 3\nfoo 1 2 3\nbar 4 5 6\n")
        loaded = load_table(path)
        assert loaded.dimension == 3
        assert len(loaded) == 2

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("foo 1 2 3 4\nbar 1 2 3\n")
        with pytest.raises(DimensionMismatchError):
            load_table(path)

    def test_header_only_is_empty(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("10 4\n")
        with pytest.raises(EmptyTableError):
            load_table(path)

    def test_duplicates_keep_first(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("foo 1 0\nfoo 0 1\n")
        loaded = load_table(path)
        assert np.allclose(loaded.get("foo"), [1.0, 0.0])

    def test_case_insensitive_lookup(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("Foo 1 0\n")
        loaded = load_table(path)
        assert loaded.get("FOO") is not None


class TestEmbedLabel:
    def test_single_token(self, table):
        assert np.allclose(embed_label(table, "dog"), [1, 0, 0, 0])

    def test_multi_token_mean_pooling(self, table):
        vec = embed_label(table, "traffic light")
        assert np.allclose(vec, [0.5, 0.5, 0.5, 0.5])

    def test_partial_tokens_use_present_ones(self, table):
        vec = embed_label(table, "traffic zzzqx")
        assert np.allclose(vec, [1, 1, 0, 0])

    def test_absent(self, table):
        assert embed_label(table, "zzzqx") is None


class TestLabelSimilarity:
    def test_same_label_is_exactly_one(self, table):
        assert label_similarity(table, "dog", "dog") == 1.0

    def test_oov_equal_labels_fall_back_to_one(self, table):
        assert label_similarity(table, "qwv", "qwv") == 1.0

    def test_oov_unequal_labels_fall_back_to_zero(self, table):
        assert label_similarity(table, "qwv", "xerb") == 0.0

    def test_orthogonal_vectors(self, table):
        assert label_similarity(table, "north", "east") == pytest.approx(0.0, abs=1e-12)

    def test_planted_cosines(self, table):
        assert label_similarity(table, "dog", "wolf") == pytest.approx(0.9, abs=1e-9)
        assert label_similarity(table, "dog", "cat") == pytest.approx(0.8, abs=1e-9)
        assert label_similarity(table, "on", "under") == pytest.approx(0.5, abs=1e-9)

    def test_negative_cosine_passed_through(self, table):
        assert label_similarity(table, "on", "above") == pytest.approx(-1.0, abs=1e-9)

    def test_zero_norm_falls_back(self, table):
        assert label_similarity(table, "zero", "dog") == 0.0

    def test_none_table_uses_exact_match(self):
        assert label_similarity(None, "Dog", "dog ") == 1.0
        assert label_similarity(None, "dog", "cat") == 0.0

    def test_symmetry(self, table):
        for a, b in [("dog", "cat"), ("on", "under"), ("dog", "qwv")]:
            assert label_similarity(table, a, b) == label_similarity(table, b, a)

    @given(scale=st.floats(min_value=0.01, max_value=1000.0))
    def test_invariant_to_positive_rescaling(self, scale):
        base = EmbeddingTable(
            2, {"a": np.array([3.0, 4.0]), "b": np.array([1.0, -2.0])}
        )
        scaled = EmbeddingTable(
            2, {"a": np.array([3.0, 4.0]) * scale, "b": np.array([1.0, -2.0]) * scale}
        )
        assert label_similarity(base, "a", "b") == pytest.approx(
            label_similarity(scaled, "a", "b"), abs=1e-9
        )
