"""
Named exploration priors persisted via SQLAlchemy.
SQLite by default; any SQLAlchemy URL works (KGTRAIL_DATABASE_URL).
"""

import json
import logging
import os
from datetime import datetime, timezone
from typing import List, Optional

from sqlalchemy import Column, Integer, MetaData, String, Table, Text, create_engine, select
from sqlalchemy.exc import SQLAlchemyError

from ..errors import PriorsError
from .priors import ExplorationPriors


# --------------- SQLAlchemy table definition ---------------

_metadata = MetaData()

priors_table = Table(
    "priors",
    _metadata,
    Column("name", String(200), primary_key=True),
    Column("version", Integer, nullable=False, server_default="0"),
    Column("text", Text, nullable=False, server_default=""),
    Column("summaries_json", Text, nullable=False, server_default="[]"),
    Column("updated_at", String(50), nullable=True),
)

DEFAULT_DB_URL = "sqlite:///kgtrail.db"


class PriorsStore:
    """Exploration priors keyed by name."""

    def __init__(self, db_url: Optional[str] = None):
        self._logger = logging.getLogger("kgtrail.priors_store")
        url = db_url or os.environ.get("KGTRAIL_DATABASE_URL", DEFAULT_DB_URL)
        self._logger.info("Connecting to priors store: %s", url.split("@")[-1])  # log host only
        self._engine = create_engine(url, pool_pre_ping=True)
        _metadata.create_all(self._engine)

    def _row_to_priors(self, row) -> ExplorationPriors:
        d = dict(row._mapping)
        try:
            summaries = json.loads(d["summaries_json"])
        except ValueError as e:
            raise PriorsError(f"corrupt summaries for priors {d['name']!r}: {e}") from e
        return ExplorationPriors.from_dict({"version": d["version"], "text": d["text"], "summaries": summaries})

    def names(self) -> List[str]:
        with self._engine.connect() as conn:
            rows = conn.execute(select(priors_table.c.name).order_by(priors_table.c.name)).fetchall()
            return [r.name for r in rows]

    def get(self, name: str) -> Optional[ExplorationPriors]:
        with self._engine.connect() as conn:
            row = conn.execute(select(priors_table).where(priors_table.c.name == name)).first()
            return self._row_to_priors(row) if row else None

    def put(self, name: str, priors: ExplorationPriors) -> None:
        """Insert or replace the priors stored under `name`."""
        values = {
            "version": priors.version,
            "text": priors.text,
            "summaries_json": json.dumps([s.to_dict() for s in priors.summaries], ensure_ascii=False),
            "updated_at": datetime.now(timezone.utc).isoformat(),
        }
        try:
            with self._engine.begin() as conn:
                result = conn.execute(
                    priors_table.update().where(priors_table.c.name == name).values(**values)
                )
                if result.rowcount == 0:
                    conn.execute(priors_table.insert().values(name=name, **values))
        except SQLAlchemyError as e:
            self._logger.error("Failed to store priors %s: %s", name, e)
            raise PriorsError(f"cannot store priors {name!r}: {e}") from e
        self._logger.info("Stored priors %s at version %d", name, priors.version)

    def remove(self, name: str) -> bool:
        try:
            with self._engine.begin() as conn:
                result = conn.execute(priors_table.delete().where(priors_table.c.name == name))
                return result.rowcount > 0
        except SQLAlchemyError as e:
            self._logger.error("Failed to remove priors %s: %s", name, e)
            return False
