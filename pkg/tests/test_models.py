import pytest
from sqlalchemy import select
from sqlalchemy.exc import IntegrityError

from src.models import Run, VerificationRecord


def test_run_keeps_its_records(db_session):
    run = Run(command="verify-siegel", parameters={"k": 6, "primes": [3]}, seed=7, exit_status=0)
    run.records.append(VerificationRecord(kind="siegel", key="h@3", passed=True, payload={"equal": True}))
    db_session.add(run)
    db_session.commit()

    stored = db_session.scalars(select(Run)).one()
    assert stored.parameters["primes"] == [3]
    assert stored.started_at is not None
    (record,) = stored.records
    assert record.payload == {"equal": True}
    assert record.run is stored


def test_record_key_is_unique_per_run(db_session):
    run = Run(command="raise", seed=0)
    run.records.append(VerificationRecord(kind="integrality", key="p=17", passed=True))
    run.records.append(VerificationRecord(kind="integrality", key="p=17", passed=False))
    db_session.add(run)
    with pytest.raises(IntegrityError):
        db_session.commit()


def test_exit_status_is_checked(db_session):
    db_session.add(Run(command="build", seed=0, exit_status=5))
    with pytest.raises(IntegrityError):
        db_session.commit()


def test_deleting_a_run_drops_its_records(db_session):
    run = Run(command="pullback", seed=0)
    run.records.append(VerificationRecord(kind="cusp", key="N=4,k=6,m0=0", passed=True))
    db_session.add(run)
    db_session.commit()

    db_session.delete(run)
    db_session.commit()
    assert db_session.scalars(select(VerificationRecord)).all() == []
