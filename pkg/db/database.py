"""SQLite connection manager for the run history, WAL mode with a shared lock."""
import os
import sqlite3
import threading
from typing import Optional

from utils.config import DB_PATH

_conn: Optional[sqlite3.Connection] = None
_path: Optional[str] = None
_lock = threading.Lock()

SCHEMA = """
PRAGMA journal_mode=WAL;
PRAGMA foreign_keys=ON;

-- One row per CLI invocation
CREATE TABLE IF NOT EXISTS runs (
    id            INTEGER PRIMARY KEY AUTOINCREMENT,
    subcommand    TEXT    NOT NULL,
    input_path    TEXT    NOT NULL DEFAULT '',
    input_sha256  TEXT    NOT NULL DEFAULT '',
    n             INTEGER NOT NULL DEFAULT 0,
    m             INTEGER NOT NULL DEFAULT 0,
    bandwidth     INTEGER NOT NULL DEFAULT 0,
    route         TEXT    NOT NULL DEFAULT '',
    status        TEXT    NOT NULL DEFAULT 'running',
    started_at    TEXT    NOT NULL,
    finished_at   TEXT,
    error_message TEXT    NOT NULL DEFAULT ''
);

-- Scalar results of a run (kappa, zeta, table sizes, deviations)
CREATE TABLE IF NOT EXISTS run_metrics (
    id      INTEGER PRIMARY KEY AUTOINCREMENT,
    run_id  INTEGER NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
    key     TEXT    NOT NULL,
    value   REAL,
    UNIQUE(run_id, key)
);
CREATE INDEX IF NOT EXISTS idx_run_metrics_run
    ON run_metrics(run_id);
"""


def initialize(db_path: Optional[str] = None) -> None:
    """Open (creating if needed) the history database. Reopens if the path changes."""
    global _conn, _path
    path = db_path or DB_PATH
    with _lock:
        if _conn is not None and _path != path:
            _conn.close()
            _conn = None
        if _conn is None:
            if path != ":memory:":
                os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            _conn = sqlite3.connect(path, check_same_thread=False)
            _conn.row_factory = sqlite3.Row
            _path = path
        _conn.executescript(SCHEMA)
        _conn.commit()


def get_conn() -> tuple:
    """Return the shared connection and its lock.

    Callers must acquire the lock before every execute:
        conn, lock = get_conn()
        with lock:
            conn.execute(...)
    """
    if _conn is None:
        initialize()
    return _conn, _lock


def close() -> None:
    global _conn, _path
    with _lock:
        if _conn:
            _conn.close()
            _conn = None
            _path = None
