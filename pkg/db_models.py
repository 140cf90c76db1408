# db_models.py
import logging
from functools import lru_cache

import numpy as np
import pandas as pd
from sqlalchemy import BigInteger, Column, Float, Integer, String, UniqueConstraint, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from campaign import RUN_COLUMNS, records_frame
from config import DATABASE_URL

logger = logging.getLogger("swarmx.db")

# ---------- SQLAlchemy setup ----------
Base = declarative_base()


@lru_cache(maxsize=8)
def get_engine(url: str = None):
    return create_engine(url or DATABASE_URL, echo=False, future=True)


def get_session(url: str = None):
    return sessionmaker(bind=get_engine(url), autoflush=False, autocommit=False)()


# ---------- Models ----------
class RunRow(Base):
    __tablename__ = "run_records"
    __table_args__ = (
        UniqueConstraint("topology", "config_index", "fid", "iid", "run", name="uq_run_coordinate"),
    )

    id = Column(Integer, primary_key=True, index=True)
    topology = Column(String(16), index=True, nullable=False)
    config_index = Column(Integer, nullable=False)
    c1 = Column(Float, nullable=False)
    c2 = Column(Float, nullable=False)
    w = Column(Float, nullable=False)
    n = Column(Integer, nullable=False)
    k = Column(Integer, nullable=False)
    p = Column(Integer, nullable=False)
    r = Column(Integer, nullable=False)
    fid = Column(Integer, index=True, nullable=False)
    iid = Column(Integer, nullable=False)
    run = Column(Integer, nullable=False)
    # stored as the signed two's-complement of the unsigned seed (SQLite has no uint64)
    seed = Column(BigInteger, nullable=False)
    aocc = Column(Float, nullable=False)
    final_best = Column(Float, nullable=False)


def _to_signed(seed: int) -> int:
    return seed - (1 << 64) if seed >= (1 << 63) else seed


def _to_unsigned(seed: int) -> int:
    return seed + (1 << 64) if seed < 0 else seed


def init_db(url: str = None):
    """Create tables if they do not exist."""
    Base.metadata.create_all(bind=get_engine(url))


def save_runs(records, url: str = None) -> int:
    """
    Replace the stored rows of every (topology, fid) present in `records`.
    Returns the number of rows written.
    """
    df = records_frame(records)
    init_db(url)
    db = get_session(url)
    try:
        for (topology, fid), _ in df.groupby(["topology", "fid"]):
            db.query(RunRow).filter(RunRow.topology == topology, RunRow.fid == int(fid)).delete(
                synchronize_session=False
            )
        rows = []
        for rec in df.to_dict(orient="records"):
            rec["seed"] = _to_signed(int(rec["seed"]))
            rows.append(RunRow(**{k: (v.item() if hasattr(v, "item") else v) for k, v in rec.items()}))
        db.add_all(rows)
        db.commit()
        logger.info("stored %d run records", len(rows))
        return len(rows)
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()


def load_runs(url: str = None, topology: str = None, fid: int = None) -> pd.DataFrame:
    """Stored runs in runs.csv schema, optionally filtered by topology and/or fid."""
    db = get_session(url)
    try:
        q = db.query(RunRow)
        if topology is not None:
            q = q.filter(RunRow.topology == topology)
        if fid is not None:
            q = q.filter(RunRow.fid == int(fid))
        rows = [{c: getattr(row, c) for c in RUN_COLUMNS} for row in q.all()]
    finally:
        db.close()
    df = pd.DataFrame(rows, columns=RUN_COLUMNS)
    df["seed"] = np.array([_to_unsigned(row["seed"]) for row in rows], dtype=np.uint64)
    return records_frame(df)
