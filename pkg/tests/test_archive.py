import json

import pytest
from sqlalchemy import create_engine, inspect

from cointoss.archive import ArchiveError, list_runs, load_artifact, record_run
from cointoss.config import RunConfig
from cointoss.verify import run_verify_suite
from database import Base, ensure_archive_schema
from main import cli_dispatch


def test_record_and_list(config):
    run_id = record_run("archive-test", config, 0, "stored by a test")
    runs = list_runs(command="archive-test")
    assert runs[0]["id"] == run_id
    assert runs[0]["exit_status"] == 0
    assert runs[0]["checks"] == 0
    assert load_artifact(run_id) is None


def test_verify_report_rows(config):
    report = run_verify_suite(config, ["legendre_transform", "single_crossing"])
    run_id = record_run("archive-verify", config, 0, report.summary(), report, report)
    stored = list_runs(command="archive-verify")[0]
    assert stored["id"] == run_id
    assert stored["checks"] == 2
    assert stored["failed_checks"] == 0
    assert json.loads(load_artifact(run_id))["passed"] is True


def test_missing_run():
    with pytest.raises(ArchiveError):
        load_artifact(10 ** 9)


def test_list_limit():
    config = RunConfig()
    for status in (0, 1, 2):
        record_run("archive-limit", config, status, f"status {status}")
    runs = list_runs(limit=2, command="archive-limit")
    assert [r["exit_status"] for r in runs] == [2, 1]


def test_cli_record_flag(tmp_path, capsys):
    out = tmp_path / "schema.json"
    assert cli_dispatch(["schema", "--output", str(out), "--record"]) == 0
    assert "archived as run" in capsys.readouterr().err
    assert list_runs(command="schema")[0]["summary"].startswith("schema:")


def test_failed_runs_are_recorded_too():
    assert cli_dispatch(["coarse-spectrum", "--depth", "40", "--record"]) == 3
    run = list_runs(command="coarse-spectrum")[0]
    assert run["exit_status"] == 3


def test_older_archive_file_is_upgraded(tmp_path):
    old = create_engine(f"sqlite:///{tmp_path / 'old.db'}")
    with old.begin() as conn:
        conn.exec_driver_sql(
            "CREATE TABLE runs (id INTEGER PRIMARY KEY, command VARCHAR(50) NOT NULL, "
            "config_json TEXT NOT NULL, exit_status INTEGER NOT NULL)")
        conn.exec_driver_sql(
            "INSERT INTO runs (command, config_json, exit_status) VALUES ('tau', '{}', 0)")

    ensure_archive_schema(Base, bind=old)

    inspector = inspect(old)
    columns = {c["name"] for c in inspector.get_columns("runs")}
    assert {"summary", "artifact_json", "output_path", "seed"} <= columns
    assert "checks" in inspector.get_table_names()
    with old.connect() as conn:
        assert conn.exec_driver_sql("SELECT command, seed FROM runs").all() == [("tau", None)]
    old.dispose()
