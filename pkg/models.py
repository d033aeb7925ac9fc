from sqlalchemy import (Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text, false,
                        func)
from sqlalchemy.orm import relationship

from database import Base


class RunRecord(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(50), nullable=False, index=True)
    config_json = Column(Text, nullable=False)
    exit_status = Column(Integer, nullable=False)
    summary = Column(String(500))
    # JSON of the command's main product (verify report, construction state, ...)
    artifact_json = Column(Text, nullable=True)
    output_path = Column(String(500), nullable=True)
    seed = Column(Integer, nullable=True)
    created_at = Column(DateTime, server_default=func.now())

    checks = relationship("CheckRecord", back_populates="run", cascade="all, delete-orphan")


class CheckRecord(Base):
    __tablename__ = "checks"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False, index=True)
    name = Column(String(100), nullable=False)
    identity = Column(String(500))
    passed = Column(Boolean, nullable=False, default=False, server_default=false())
    residual = Column(Float, nullable=True)
    tolerance = Column(Float, nullable=True)
    detail = Column(Text)
    created_at = Column(DateTime, server_default=func.now())

    run = relationship("RunRecord", back_populates="checks")
