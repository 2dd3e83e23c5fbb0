# tests/conftest.py
import os
import sys
import importlib
import pytest
from pathlib import Path
from hypothesis import HealthCheck, settings

# Ensure repo root is on sys.path so `import src...` works
REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

settings.register_profile("fast", max_examples=15, deadline=None)
settings.register_profile(
    "ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session", autouse=True)
def _set_test_env():
    """
    Force the run ledger into an in-memory SQLite DB for tests.
    """
    os.environ["DATABASE_URL"] = "sqlite:///:memory:"
    os.environ.pop("USE_SQLITE", None)  # don't let this override DATABASE_URL
    os.environ["EIS_WORKERS"] = "1"

    # Reload config so the engine reads the new env
    import src.config as cfg
    importlib.reload(cfg)

    yield  # session-scoped setup only


@pytest.fixture()
def ledger(_set_test_env):
    from src.db import drop_db, init_db

    # Fresh schema per test
    drop_db()
    init_db()
    yield
    drop_db()


@pytest.fixture()
def db_session(ledger):
    from src.db import SessionLocal

    session = SessionLocal()
    yield session
    session.rollback()
    session.close()
