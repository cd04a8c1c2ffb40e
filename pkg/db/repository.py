"""CRUD operations for the run history."""
import math
from typing import Optional

from db.database import get_conn
from db.models import RunRecord


class RunRepository:
    def create(self, record: RunRecord) -> RunRecord:
        conn, lock = get_conn()
        with lock:
            cur = conn.execute(
                """INSERT INTO runs
                   (subcommand, input_path, input_sha256, started_at, status)
                   VALUES (?, ?, ?, ?, 'running')""",
                (record.subcommand, record.input_path, record.input_sha256, record.started_at),
            )
            conn.commit()
            record.id = cur.lastrowid
        return record

    def update(self, record: RunRecord) -> None:
        conn, lock = get_conn()
        with lock:
            conn.execute(
                """UPDATE runs
                   SET finished_at=?, status=?, n=?, m=?, bandwidth=?, route=?, error_message=?
                   WHERE id=?""",
                (record.finished_at, record.status, record.n, record.m,
                 record.bandwidth, record.route, record.error_message, record.id),
            )
            conn.commit()

    def add_metrics(self, run_id: int, metrics: dict) -> None:
        """Store scalar metrics; None and non-finite values are stored as NULL."""
        if not metrics:
            return
        rows = []
        for key, value in metrics.items():
            value = None if value is None else float(value)
            if value is not None and not math.isfinite(value):
                value = None
            rows.append((run_id, key, value))
        conn, lock = get_conn()
        with lock:
            conn.executemany(
                """INSERT INTO run_metrics (run_id, key, value) VALUES (?, ?, ?)
                   ON CONFLICT(run_id, key) DO UPDATE SET value=excluded.value""",
                rows,
            )
            conn.commit()

    def get_metrics(self, run_id: int) -> dict:
        conn, lock = get_conn()
        with lock:
            rows = conn.execute(
                "SELECT key, value FROM run_metrics WHERE run_id=? ORDER BY key", (run_id,)
            ).fetchall()
        return {r["key"]: r["value"] for r in rows}

    def get(self, run_id: int) -> Optional[RunRecord]:
        conn, lock = get_conn()
        with lock:
            row = conn.execute("SELECT * FROM runs WHERE id=?", (run_id,)).fetchone()
        return self._row_to_model(row) if row else None

    def list_recent(self, limit: int = 20) -> list:
        conn, lock = get_conn()
        with lock:
            rows = conn.execute(
                "SELECT * FROM runs ORDER BY started_at DESC, id DESC LIMIT ?", (limit,)
            ).fetchall()
        return [self._row_to_model(r) for r in rows]

    def _row_to_model(self, r) -> RunRecord:
        return RunRecord(
            id=r["id"],
            subcommand=r["subcommand"],
            input_path=r["input_path"],
            input_sha256=r["input_sha256"],
            started_at=r["started_at"],
            finished_at=r["finished_at"],
            status=r["status"],
            n=r["n"],
            m=r["m"],
            bandwidth=r["bandwidth"],
            route=r["route"],
            error_message=r["error_message"],
        )

    def clear_all(self) -> None:
        conn, lock = get_conn()
        with lock:
            conn.execute("DELETE FROM run_metrics")
            conn.execute("DELETE FROM runs")
            conn.commit()
