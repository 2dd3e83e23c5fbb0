# scripts/peek.py
import os, sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from sqlalchemy import select, func
from src.db import SessionLocal, init_db
from src.models import Run, VerificationRecord

def main():
    init_db()
    limit = int(os.getenv("PEEK_LIMIT", "20"))
    with SessionLocal() as session:
        total = session.execute(select(func.count(Run.id))).scalar_one()
        print(f"Runs: {total}")

        print("\nRecent runs:")
        q_runs = select(Run).order_by(Run.id.desc()).limit(limit)
        for run in session.execute(q_runs).scalars():
            failed = sum(1 for r in run.records if not r.passed)
            print(f"  #{run.id} | {run.command} | exit={run.exit_status} | seed={run.seed} "
                  f"| records={len(run.records)} | failed={failed} | {run.started_at}")

        print("\nRecords by kind:")
        for row in session.execute(select(VerificationRecord.kind, func.count(VerificationRecord.id))
                                   .group_by(VerificationRecord.kind).order_by(VerificationRecord.kind)):
            print(f"  {row[0]} | {row[1]}")

        print("\nFailed records:")
        q_failed = (
            select(Run.id, Run.command, VerificationRecord.kind, VerificationRecord.key)
            .join(VerificationRecord, VerificationRecord.run_id == Run.id)
            .where(VerificationRecord.passed.is_(False))
            .order_by(Run.id, VerificationRecord.kind, VerificationRecord.key)
        )
        for row in session.execute(q_failed):
            print(f"  run #{row[0]} | {row[1]} | {row[2]} | {row[3]}")

if __name__ == "__main__":
    main()
