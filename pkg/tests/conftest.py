from pathlib import Path

import pytest

from rgbdsal.config import load_config
from rgbdsal.fixtures import make_fixtures


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory) -> Path:
    """One shared synthetic dataset; tests must not mutate it in place."""
    root = tmp_path_factory.mktemp("dataset")
    return make_fixtures(root / "ds", frames=10)


@pytest.fixture(scope="session")
def synthetic_config(synthetic_dataset):
    return load_config(synthetic_dataset / "config.txt")
