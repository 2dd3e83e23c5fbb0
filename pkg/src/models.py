from datetime import datetime

from sqlalchemy import JSON, CheckConstraint, ForeignKey, UniqueConstraint, func
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .db import Base

# ---------- Run ledger ----------


class Run(Base):
    __tablename__ = "runs"
    id: Mapped[int] = mapped_column(primary_key=True)
    command: Mapped[str] = mapped_column(index=True)
    parameters: Mapped[dict] = mapped_column(JSON, default=dict)
    seed: Mapped[int]
    exit_status: Mapped[int] = mapped_column(default=0)
    started_at: Mapped[datetime] = mapped_column(server_default=func.now())

    records: Mapped[list["VerificationRecord"]] = relationship(
        back_populates="run", cascade="all, delete-orphan"
    )

    __table_args__ = (
        CheckConstraint("exit_status IN (0, 1, 2)", name="chk_run_exit_status"),
    )


class VerificationRecord(Base):
    __tablename__ = "verification_records"
    id: Mapped[int] = mapped_column(primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id", ondelete="CASCADE"), index=True)
    kind: Mapped[str]  # 'siegel', 'integrality', 'cusp', 'archimedean', 'cross-check', ...
    key: Mapped[str]
    passed: Mapped[bool]
    payload: Mapped[dict] = mapped_column(JSON, default=dict)

    run: Mapped[Run] = relationship(back_populates="records")

    __table_args__ = (
        UniqueConstraint("run_id", "kind", "key", name="uq_record_run_kind_key"),
    )
