import pathlib

import pytest

SAMPLE_DIR = pathlib.Path(__file__).parent / "sample_artifacts"


@pytest.fixture(scope="session")
def sample_artifacts():
    return SAMPLE_DIR
