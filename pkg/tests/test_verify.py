import importlib

import pytest

from cointoss import gibbs
from cointoss.config import RunConfig
from cointoss.errors import BudgetError
from cointoss.verify import (ANCHORED_OPERATIONS, REGISTRY, covered_operations,
                             register_check, run_verify_suite)


def test_anchored_operations_are_covered():
    assert set(ANCHORED_OPERATIONS) <= covered_operations()


def test_covered_operations_exist():
    for op in covered_operations():
        module, name = op.split(".")
        assert callable(getattr(importlib.import_module(f"cointoss.{module}"), name)), op


def test_registration_is_unique():
    with pytest.raises(ValueError):
        register_check("tau_oracle", "again", [])(lambda config: None)


@pytest.mark.parametrize("name", ["tau_oracle", "cylinder_conservation", "derivative_bounds",
                                  "gibbs_consistency", "tau_composition", "legendre_transform",
                                  "single_crossing", "alternating_kinks"])
def test_fast_checks_pass(config, name):
    report = run_verify_suite(config, [name])
    assert report.passed, report.checks[0].detail


def test_wrong_reweighting_fails_the_composition_check(config, monkeypatch):
    monkeypatch.setattr(gibbs, "gibbs_reweight", lambda w, q: w)
    report = run_verify_suite(config, ["tau_composition"])
    assert not report.passed
    assert report.failures == ["tau_composition"]
    assert "failed: tau_composition" in report.summary()


def test_budget_is_checked_before_running():
    config = RunConfig(enumeration_depth=40)
    with pytest.raises(BudgetError):
        run_verify_suite(config, ["tau_oracle"])


def test_report_records_seed(config):
    report = run_verify_suite(config, ["legendre_transform"])
    assert report.seed == config.seed
    assert report.summary() == "verify: 1/1 checks passed"


@pytest.mark.slow
def test_full_suite_passes(config):
    report = run_verify_suite(config)
    assert [c.name for c in report.checks] == list(REGISTRY)
    assert report.passed, report.failures
