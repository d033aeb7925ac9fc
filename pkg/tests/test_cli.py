import io
import json
import logging
import sys
from pathlib import Path

import pandas as pd
import pytest

from main import cli_dispatch


CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_tau_writes_csv(tmp_path):
    out = tmp_path / "tau.csv"
    status = cli_dispatch(["tau", "--sequence", "constant:0.5", "--q-grid", "0:2:0.5",
                           "--depths", "1,5,10", "--output", str(out)])
    assert status == 0
    df = pd.read_csv(out)
    assert list(df.columns) == ["q", "depth", "value"]
    assert len(df) == 15
    assert df["value"].to_numpy() == pytest.approx(1.0 - df["q"].to_numpy(), abs=1e-12)


def test_tau_goes_to_stdout_without_output(capsys):
    status = cli_dispatch(["tau", "--sequence", "constant:0.3", "--q-grid", "2:2:1",
                           "--depths", "10"])
    captured = capsys.readouterr()
    assert status == 0
    assert captured.out.splitlines()[0] == "q,depth,value"
    assert captured.out.splitlines()[1].startswith("2,10,-0.78587")
    assert "tau:" in captured.err


def test_output_is_byte_identical(tmp_path):
    args = ["legendre", "--config", str(CONFIGS / "constant.json"), "--q-grid=-5:5:0.05"]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli_dispatch(args + ["--output", str(first)]) == 0
    assert cli_dispatch(args + ["--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_limits_on_alternating_blocks(tmp_path):
    out = tmp_path / "limits.csv"
    status = cli_dispatch(["limits", "--config", str(CONFIGS / "alternating_blocks.json"),
                           "--q-grid", "1:2:1", "--output", str(out)])
    assert status == 0
    df = pd.read_csv(out)
    assert df["limsup"].tolist()[0] == pytest.approx(0.0)
    assert df["limsup"].tolist()[1] == pytest.approx(-0.790631, abs=1e-4)
    assert df["liminf"].tolist()[1] == pytest.approx(-0.942191, abs=1e-4)


def test_entropy(tmp_path):
    out = tmp_path / "entropy.csv"
    assert cli_dispatch(["entropy", "--sequence", "constant:0.3", "--depths", "10,100",
                         "--output", str(out)]) == 0
    assert pd.read_csv(out)["entropy"].tolist() == pytest.approx([0.881291, 0.881291], abs=1e-6)


def test_gibbs_writes_the_reweighted_sequence(tmp_path):
    out = tmp_path / "nu.json"
    status = cli_dispatch(["gibbs", "--config", str(CONFIGS / "gibbs.json"),
                           "--output", str(out)])
    assert status == 0
    payload = json.loads(out.read_text())
    assert payload["kind"] == "gibbs"
    assert payload["q"] == 2.0
    assert payload["source"]["kind"] == "periodic"


def test_construct_then_kinks(tmp_path):
    state = tmp_path / "state.json"
    kinks = tmp_path / "kinks.csv"
    assert cli_dispatch(["construct", "--targets", "1.5,5", "--stages", "2",
                         "--output", str(state)]) == 0
    assert json.loads(state.read_text())["kind"] == "construction"
    assert cli_dispatch(["kinks", "--state", str(state), "--output", str(kinks)]) == 0
    df = pd.read_csv(kinks)
    assert list(df.columns) == ["q_loc", "left_slope", "right_slope", "gap"]
    assert df["q_loc"].tolist() == pytest.approx([1.5, 5.0], abs=1e-4)
    assert (df["gap"] > 0).all()


def test_construct_with_dense_nesting(tmp_path):
    state = tmp_path / "state.json"
    assert cli_dispatch(["construct", "--targets", "1.5,5,6,7", "--stages", "2",
                         "--nesting", "dense", "--output", str(state)]) == 0
    payload = json.loads(state.read_text())
    assert payload["nesting"] == "dense"
    assert payload["targets"] == [1.5, 5.0, 6.0, 7.0]


def test_kinks_of_single_curves(tmp_path):
    out = tmp_path / "kinks.csv"
    assert cli_dispatch(["kinks", "--p", "0.3,0.4", "--q-grid=-2:4:0.01",
                         "--output", str(out)]) == 0
    df = pd.read_csv(out)
    assert df["q_loc"].tolist() == pytest.approx([0.0, 1.0], abs=1e-9)
    assert df["gap"].tolist()[1] == pytest.approx(0.089660, abs=1e-6)


def test_kinks_needs_a_source():
    assert cli_dispatch(["kinks"]) == 2


def test_sample(tmp_path):
    out = tmp_path / "sample.csv"
    assert cli_dispatch(["sample", "--sequence", "constant:0.3", "--depth", "100",
                         "--samples", "50", "--output", str(out)]) == 0
    df = pd.read_csv(out, dtype={"path": str})
    assert len(df) == 50
    assert df["path"].str.len().eq(100).all()


def test_coarse_spectrum(tmp_path):
    out = tmp_path / "coarse.csv"
    assert cli_dispatch(["coarse-spectrum", "--sequence", "constant:0.5", "--depth", "10",
                         "--output", str(out)]) == 0
    df = pd.read_csv(out)
    assert df["count"].tolist() == [1024]
    assert df["normalized"].tolist() == pytest.approx([1.0])


def test_verify_single_check(tmp_path):
    out = tmp_path / "verify.json"
    assert cli_dispatch(["verify", "--check", "legendre_transform", "--output", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert [c["name"] for c in report["checks"]] == ["legendre_transform"]


def test_schema(tmp_path):
    out = tmp_path / "schema.json"
    assert cli_dispatch(["schema", "--output", str(out)]) == 0
    assert "sequence" in json.loads(out.read_text())["properties"]


def test_unknown_command():
    assert cli_dispatch(["spiral"]) == 2


def test_help_exits_cleanly():
    assert cli_dispatch(["--help"]) == 0


def test_invalid_config_file(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert cli_dispatch(["tau", "--config", str(broken)]) == 2


def test_config_with_bad_values(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sequence": {"kind": "constant", "p": 1.5}}))
    assert cli_dispatch(["tau", "--config", str(bad)]) == 2


def test_missing_config_file(tmp_path):
    assert cli_dispatch(["tau", "--config", str(tmp_path / "absent.json")]) == 4


def test_enumeration_budget():
    assert cli_dispatch(["coarse-spectrum", "--sequence", "constant:0.3", "--depth", "40"]) == 3


def test_precondition_failure_is_exit_one(capsys):
    # an explicit sequence shorter than the requested depth
    status = cli_dispatch(["tau", "--sequence", "explicit:0.3,0.4", "--depths", "1,5"])
    assert status == 1
    assert "DepthError" in capsys.readouterr().err


def test_logging_follows_the_current_stderr(tmp_path, monkeypatch):
    assert cli_dispatch(["-v", "schema", "--output", str(tmp_path / "schema.json")]) == 0
    swapped = io.StringIO()
    monkeypatch.setattr(sys, "stderr", swapped)
    logging.getLogger("cointoss.cli").warning("after the swap")
    assert "WARNING cointoss.cli: after the swap" in swapped.getvalue()
