import argparse
import json

import pytest

from cointoss.commands import depth_list, floats, grid, overrides_from, sequence
from cointoss.config import DepthSchedule, GridSpec, RunConfig, load_config
from cointoss.errors import BudgetError, ConfigError, PreconditionError
from cointoss.measure import BlockSchedule, Constant


def test_defaults_are_valid(config):
    assert config.sequence == Constant(p=0.3)
    assert config.q_grid.values()[0] == -5.0
    assert len(config.q_grid.values()) == 41
    assert config.construction.stages == 3


def test_grid_values_are_rounded():
    values = GridSpec(start=1.01, stop=8.0, step=0.01).values()
    assert len(values) == 700
    assert values[-1] == 8.0
    assert 1.5 in values.tolist()


def test_grid_must_be_ordered():
    with pytest.raises(ValueError):
        GridSpec(start=2.0, stop=1.0, step=0.1)


def test_depth_schedules():
    assert DepthSchedule(kind="explicit", depths=[1, 5, 10]).resolve() == [1, 5, 10]
    assert DepthSchedule(kind="linear", start=10, stop=50, step=20).resolve() == [10, 30, 50]
    geometric = DepthSchedule().resolve()
    assert geometric[0] == 10 and geometric[-1] == 10_000

    blocks = DepthSchedule(kind="block_ends", start=1, stop=100_000)
    w = BlockSchedule(sequences=(Constant(p=0.3), Constant(p=0.4)))
    assert blocks.resolve(w) == [2, 18, 530, 66066, 100_000]
    assert blocks.max_depth == 100_000
    with pytest.raises(ConfigError):
        blocks.resolve()
    with pytest.raises(PreconditionError):
        blocks.resolve(Constant(p=0.3))


def test_explicit_depths_must_increase():
    with pytest.raises(ValueError):
        DepthSchedule(kind="explicit", depths=[5, 5])


def test_load_config_merges_sections(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"construction": {"targets": [1.5, 5.0]}, "q": 3.0}))
    config = load_config(path, {"construction": {"stages": 2}, "seed": None})
    assert config.construction.targets == [1.5, 5.0]
    assert config.construction.stages == 2
    assert config.q == 3.0
    assert config.seed == RunConfig().seed


def test_sequence_override_replaces_the_whole_sequence():
    config = load_config(None, {"sequence": {"kind": "periodic", "weights": [0.2, 0.4]}})
    assert config.sequence.kind == "periodic"


def test_unknown_keys_are_rejected(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"qgrid": {"start": 0, "stop": 1, "step": 0.5}}))
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_must_be_an_object(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)


def test_budget():
    RunConfig(enumeration_depth=22).check_budget()
    with pytest.raises(BudgetError) as info:
        RunConfig(enumeration_depth=23).check_budget()
    assert info.value.exit_code == 3


def test_argument_types():
    assert grid("0:2:0.5") == {"start": 0.0, "stop": 2.0, "step": 0.5}
    assert depth_list("10,20") == {"kind": "explicit", "depths": [10, 20]}
    assert depth_list("geometric:10:1000:5")["count"] == 5
    assert depth_list("block_ends:1:5000") == {"kind": "block_ends", "start": 1, "stop": 5000}
    assert sequence("constant:0.3") == {"kind": "constant", "p": 0.3}
    assert sequence("periodic:0.2,0.4")["weights"] == [0.2, 0.4]
    assert floats("1.5,5") == [1.5, 5.0]
    for parse, text in [(grid, "0:2"), (depth_list, "spiral:1"), (sequence, "wobbly:1"),
                        (floats, "a,b")]:
        with pytest.raises(argparse.ArgumentTypeError):
            parse(text)


def test_sequence_from_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"kind": "constant", "p": 0.25}))
    assert sequence(f"@{path}") == {"kind": "constant", "p": 0.25}


def test_overrides_nest_by_path():
    args = argparse.Namespace(stages=2, sample_depth=50, q=None, output=None)
    assert overrides_from(args) == {"construction": {"stages": 2}, "sampling": {"depth": 50}}
