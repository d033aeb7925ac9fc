"""Run archive: every CLI run given --record is stored with its configuration,
exit status and main artifact; verify runs also store one row per check."""
import logging
from typing import Optional

from pydantic import BaseModel
from sqlalchemy import exc as sqlalchemy_exc

from database import Base, SessionLocal, ensure_archive_schema
from models import CheckRecord, RunRecord

from cointoss.config import RunConfig
from cointoss.errors import CointossError


logger = logging.getLogger(__name__)

_schema_ready = False


class ArchiveError(CointossError):
    pass


def _ensure_schema() -> None:
    global _schema_ready
    if not _schema_ready:
        ensure_archive_schema(Base)
        _schema_ready = True


def record_run(command: str, config: RunConfig, exit_status: int, summary: str,
               artifact: Optional[BaseModel] = None, report=None) -> int:
    """Store a run and return its id. ``report`` is a VerifyReport or None."""
    _ensure_schema()
    db = SessionLocal()
    try:
        run = RunRecord(
            command=command,
            config_json=config.model_dump_json(),
            exit_status=exit_status,
            summary=summary,
            artifact_json=artifact.model_dump_json() if artifact is not None else None,
            output_path=str(config.output) if config.output else None,
            seed=config.seed,
        )
        for check in getattr(report, "checks", ()):
            run.checks.append(CheckRecord(
                name=check.name, identity=check.identity, passed=check.passed,
                residual=check.residual, tolerance=check.tolerance, detail=check.detail))
        db.add(run)
        try:
            db.commit()
        except sqlalchemy_exc.SQLAlchemyError as exc:
            db.rollback()
            raise ArchiveError(f"Could not archive the {command} run: {exc}") from exc
        logger.info("Archived %s run %d (%d checks)", command, run.id, len(run.checks))
        return run.id
    finally:
        db.close()


def list_runs(limit: int = 20, command: Optional[str] = None) -> list[dict]:
    _ensure_schema()
    db = SessionLocal()
    try:
        query = db.query(RunRecord)
        if command:
            query = query.filter(RunRecord.command == command)
        runs = query.order_by(RunRecord.id.desc()).limit(limit).all()
        return [{
            "id": run.id,
            "command": run.command,
            "exit_status": run.exit_status,
            "summary": run.summary,
            "checks": len(run.checks),
            "failed_checks": sum(not c.passed for c in run.checks),
            "created_at": run.created_at.isoformat() if run.created_at else None,
        } for run in runs]
    finally:
        db.close()


def load_artifact(run_id: int) -> Optional[str]:
    _ensure_schema()
    db = SessionLocal()
    try:
        run = db.get(RunRecord, run_id)
        if run is None:
            raise ArchiveError(f"No archived run with id {run_id}")
        return run.artifact_json
    finally:
        db.close()
