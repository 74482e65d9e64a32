import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pachinqo.machine import PhysParams, build_layout, generate_grid


@pytest.fixture(scope="session")
def params():
    return PhysParams()


@pytest.fixture(scope="session")
def default_layout(params):
    return build_layout(10, "default", params)


@pytest.fixture(scope="session")
def default_grid(default_layout, params):
    return generate_grid("large-square", default_layout, params)
