"""File-backed label embeddings with cosine similarity.

Replaces the original pipeline's NLP-toolkit vectors with a plain
word-vector text file (word2vec/GloVe text format) so any embedding source
can be exported and results stay deterministic. Multi-word labels are
mean-pooled over their token vectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .graph import normalize_label

logger = logging.getLogger(__name__)


class EmbeddingTableError(ValueError):
    pass


class DimensionMismatchError(EmbeddingTableError):
    pass


class EmptyTableError(EmbeddingTableError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable token -> vector map; keys are stored lowercase."""

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dimension <= 0:
            raise EmbeddingTableError(f"dimension must be positive, got {self.dimension}")
        for token, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise DimensionMismatchError(
                    f"vector for {token!r} has shape {vec.shape}, expected ({self.dimension},)"
                )
            if not np.all(np.isfinite(vec)):
                raise EmbeddingTableError(f"vector for {token!r} has non-finite entries")

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, token: str) -> Optional[np.ndarray]:
        return self.vectors.get(token.lower())


def load_table(path: Union[str, Path]) -> EmbeddingTable:
    """Load a word-vector text file.

    Format: an optional header line ``<count> <dim>`` followed by one line
    per token: the token then ``dim`` whitespace-separated floats. Duplicate
    tokens keep the first occurrence (logged as a warning).
    """
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dimension: Optional[int] = None
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and _all_ints(parts):
                dimension = int(parts[1])
                continue
            token = parts[0].lower()
            values = parts[1:]
            if dimension is None:
                dimension = len(values)
            if len(values) != dimension:
                raise DimensionMismatchError(
                    f"{path}:{lineno}: row has {len(values)} values, expected {dimension}"
                )
            if token in vectors:
                logger.warning("%s:%d: duplicate token %r ignored", path, lineno, token)
                continue
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingTableError(f"{path}:{lineno}: {exc}") from exc
            vectors[token] = vec
    if not vectors:
        raise EmptyTableError(f"{path} contains no vectors")
    assert dimension is not None
    return EmbeddingTable(dimension, vectors)


def embed_label(table: EmbeddingTable, label: str) -> Optional[np.ndarray]:
    """Embed a (possibly multi-word) label; None when no token is known.

    Multi-word labels average the vectors of the tokens that are present, so
    "traffic light" degrades gracefully when only "light" is in the table.
    """
    tokens = normalize_label(label).split()
    found = [table.get(t) for t in tokens]
    found = [v for v in found if v is not None]
    if not found:
        return None
    if len(found) == 1:
        return found[0]
    return np.mean(found, axis=0)


def label_similarity(table: Optional[EmbeddingTable], a: str, b: str) -> float:
    """Cosine similarity between two labels, in [-1, 1].

    Equal normalized labels score exactly 1.0 without touching the table
    (both for out-of-vocabulary labels and to avoid float noise on the
    cos(v, v) path). When either side is missing or zero-norm, falls back to
    exact-match semantics: 1.0 if equal, else 0.0.
    """
    na, nb = normalize_label(a), normalize_label(b)
    if na == nb:
        return 1.0
    if table is None:
        return 0.0
    va = embed_label(table, na)
    vb = embed_label(table, nb)
    if va is None or vb is None:
        return 0.0
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (norm_a * norm_b))


def _all_ints(parts: list[str]) -> bool:
    try:
        [int(p) for p in parts]
    except ValueError:
        return False
    return True
