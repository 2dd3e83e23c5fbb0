import logging

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker
from sqlalchemy.pool import StaticPool

from . import config

logger = logging.getLogger(__name__)


class Base(DeclarativeBase):
    pass


_engine: Engine | None = None
_engine_url: str | None = None


def get_engine() -> Engine:
    """Engine for config.DATABASE_URL, rebuilt when the URL changes (tests reload config)."""
    global _engine, _engine_url
    url = config.DATABASE_URL
    if _engine is None or _engine_url != url:
        kwargs = {}
        if url.startswith("sqlite") and ":memory:" in url:
            # one shared connection, otherwise every session sees an empty database
            kwargs = {"connect_args": {"check_same_thread": False}, "poolclass": StaticPool}
        _engine = create_engine(url, future=True, **kwargs)
        _engine_url = url
        logger.info("Using DB: %s", url)
    return _engine


def SessionLocal() -> Session:
    return sessionmaker(bind=get_engine(), expire_on_commit=False)()


def init_db() -> None:
    from . import models  # noqa: F401  (registers tables on Base.metadata)

    Base.metadata.create_all(get_engine())


def drop_db() -> None:
    Base.metadata.drop_all(get_engine())
