import sqlite3
from dataclasses import fields
from pathlib import Path
from typing import List, Optional

from .models import RunRecord

_RUN_COLUMNS = [f.name for f in fields(RunRecord) if f.name != 'run_id']


class ResultsDatabase:
    """Index of finished runs for one sweep output directory"""

    def __init__(self, db_path: str):
        self.db_path = Path(db_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.connection = None
        self._initialize_database()

    def _initialize_database(self):
        """Initialize database connection and create tables"""
        self.connection = sqlite3.connect(str(self.db_path))
        self.connection.row_factory = sqlite3.Row
        self._create_tables()

    def _create_tables(self):
        cursor = self.connection.cursor()
        cursor.execute('''
            CREATE TABLE IF NOT EXISTS runs (
                run_id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_name TEXT NOT NULL UNIQUE,
                policy TEXT NOT NULL,
                num_racks INTEGER NOT NULL,
                seed INTEGER NOT NULL,
                num_jobs INTEGER,
                makespan REAL,
                mean_jct REAL,
                p99_jct REAL,
                mean_queueing_delay REAL,
                mean_comm_latency REAL,
                mean_utilization REAL,
                output_dir TEXT,
                created_at REAL
            )
        ''')
        cursor.execute('CREATE INDEX IF NOT EXISTS idx_runs_policy ON runs (policy, num_racks)')
        self.connection.commit()

    def close(self):
        """Close database connection"""
        if self.connection:
            self.connection.close()
            self.connection = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def record_run(self, record: RunRecord) -> int:
        """Insert a run, replacing an earlier run with the same name"""
        values = [getattr(record, column) for column in _RUN_COLUMNS]
        placeholders = ', '.join('?' for _ in _RUN_COLUMNS)
        cursor = self.connection.cursor()
        cursor.execute(
            f'INSERT OR REPLACE INTO runs ({", ".join(_RUN_COLUMNS)}) VALUES ({placeholders})',
            values,
        )
        self.connection.commit()
        return cursor.lastrowid

    def _row_to_record(self, row) -> RunRecord:
        return RunRecord(run_id=row['run_id'], **{column: row[column] for column in _RUN_COLUMNS})

    def list_runs(self, policy: Optional[str] = None, num_racks: Optional[int] = None) -> List[RunRecord]:
        query = 'SELECT * FROM runs'
        clauses, params = [], []
        if policy is not None:
            clauses.append('policy = ?')
            params.append(policy)
        if num_racks is not None:
            clauses.append('num_racks = ?')
            params.append(num_racks)
        if clauses:
            query += ' WHERE ' + ' AND '.join(clauses)
        query += ' ORDER BY num_racks, policy, seed'
        cursor = self.connection.cursor()
        cursor.execute(query, params)
        return [self._row_to_record(row) for row in cursor.fetchall()]
