import random

import pytest

from sgg_rewards import load_table

from helpers import VECTOR_FILE_TEXT, build_graph


@pytest.fixture(scope="session")
def vector_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("vectors") / "vectors.txt"
    path.write_text(VECTOR_FILE_TEXT, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def table(vector_path):
    return load_table(vector_path)


@pytest.fixture
def rider_graph():
    return build_graph(
        [("person.1", (10, 10, 40, 90)), ("bike.1", (5, 50, 45, 95)), ("hat.1", (15, 5, 30, 15))],
        [("person.1", "riding", "bike.1"), ("person.1", "wearing", "hat.1")],
    )


@pytest.fixture
def rng():
    return random.Random(20250810)
