"""
테스트용 공통 fixture
"""
import json
import random

import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

from app.api.v1 import api_router
from app.core.config import get_settings
from app.core.deps import get_records
from app.services.seifert import KnotRecord, find_knot, load_knots


@pytest.fixture(scope="session")
def records() -> list[KnotRecord]:
    """번들된 매듭 테이블"""
    return load_knots(get_settings().knots_file)


@pytest.fixture(scope="session")
def knot(records):
    """이름으로 매듭 레코드를 찾는 헬퍼"""
    def _knot(name: str) -> KnotRecord:
        return find_knot(records, name)
    return _knot


@pytest.fixture(scope="session")
def reference() -> dict:
    """기준 행렬과 대각형"""
    return json.loads(get_settings().reference_file.read_text(encoding="utf-8"))


@pytest.fixture
def rng() -> random.Random:
    """고정 시드 난수 생성기"""
    return random.Random(20240917)


@pytest.fixture(scope="function")
def test_client(records):
    """각 테스트마다 새로운 앱 생성"""
    settings = get_settings()
    app = FastAPI(
        title=settings.app_name,
        debug=settings.debug,
    )

    # Include routers
    app.include_router(api_router)

    # Serve the session's knot table
    app.dependency_overrides[get_records] = lambda: list(records)

    with TestClient(app) as client:
        yield client
