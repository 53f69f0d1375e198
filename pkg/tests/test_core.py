import json
import sys

import pytest

import core
from ffcubic.lib.characters import KUMMER, NONKUMMER


def _run_main(monkeypatch, *argv):
    monkeypatch.setattr(sys, "argv", ["core.py", *argv])
    with pytest.raises(SystemExit) as info:
        core.main()
    return info.value.code


def test_run_config_checks_setting():
    with pytest.raises(ValueError):
        core.RunConfig("moment", 7, NONKUMMER, 2).validate()
    with pytest.raises(ValueError):
        core.RunConfig("moment", 5, KUMMER, 2).validate()
    with pytest.raises(ValueError):
        core.RunConfig("moment", 5, NONKUMMER, 1).validate()
    with pytest.raises(ValueError):
        core.RunConfig("verify", 9).validate()


def test_run_config_defaults():
    run_config = core.RunConfig("query", 7, threads=2)
    field = run_config.validate()
    assert field.q == 7
    assert run_config.setting == KUMMER
    assert run_config.threads == 2


def test_query_rho(capsys):
    record = json.loads(core.run_query_script("rho", ["1", "0"], 7))
    assert record["f"] == core.Poly.one(core.field_from_q(7)).to_text()
    assert record["i"] == 0


def test_query_character_count():
    record = json.loads(core.run_query_script("character-count", ["2"], 7))
    assert record["exact"] == 126


def test_query_needs_arguments():
    with pytest.raises(ValueError):
        core.run_query_script("gauss-sum", ["1"], 7)
    with pytest.raises(ValueError):
        core.run_query_script("lpoly", ["T"], 7)


def test_no_arguments_exit(monkeypatch):
    monkeypatch.setattr(sys, "argv", ["core.py"])
    with pytest.raises(SystemExit) as info:
        core.main()
    assert info.value.code == 1


def test_invalid_field_exits_with_config_code(monkeypatch, tmp_path):
    assert _run_main(monkeypatch, "verify", "counts", "--q", "9", "--output-dir", str(tmp_path)) == 2


def test_budget_exit_code(monkeypatch, tmp_path):
    code = _run_main(
        monkeypatch,
        "moment",
        "--q", "7",
        "--g", "2",
        "--setting", KUMMER,
        "--threads", "1",
        "--budget-ops", "1",
        "--output-dir", str(tmp_path),
    )
    assert code == 3


def test_verify_writes_ledger(monkeypatch, tmp_path):
    monkeypatch.setattr(sys, "argv", ["core.py", "verify", "knk", "--q", "5", "--output-dir", str(tmp_path)])
    core.main()
    ledger = json.loads((tmp_path / "verify_knk_q5.json").read_text())
    assert ledger["passed"]
