import json
from pathlib import Path

import pytest

from pacs.harness import bundled_path, load_dataset


@pytest.fixture(scope="session")
def synthetic():
    return load_dataset("bundled:synthetic")


@pytest.fixture(scope="session")
def populations():
    return {r.id: r.reasoner_population() for r in load_dataset("bundled:populations")}


@pytest.fixture(scope="session")
def pop_records():
    return {r.id: r for r in load_dataset("bundled:populations")}
