import json
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"
REPO_ROOT = TESTS_DIR.parent.parent
WIRE_VECTORS = REPO_ROOT / "shared" / "wire_test_vectors.json"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def wire_vectors() -> dict:
    return json.loads(WIRE_VECTORS.read_text())


@pytest.fixture(scope="session")
def app():
    from scorer_service.service import ServiceConfig, create_app

    return create_app(ServiceConfig(max_batch=64))


@pytest.fixture(scope="session")
def client(app):
    from fastapi.testclient import TestClient

    with TestClient(app) as c:
        yield c
