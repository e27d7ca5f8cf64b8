import io
import json

import pytest

from hyperaccel.catalog import ENV_VAR, builtin_catalog, dump_catalog
from hyperaccel.cli import RunConfig, UsageError, decimal, main, run


def out_of(cfg):
    buf = io.StringIO()
    code = run(cfg, buf)
    return code, buf.getvalue()


def test_verify_all():
    code, text = out_of(RunConfig("verify", all=True))
    assert code == 0
    assert text.count("PASS family") == len(builtin_catalog().families)


def test_evaluate_entry():
    code, text = out_of(RunConfig("evaluate", entries=["768-over-pi"]))
    assert code == 0
    assert "244.4619925891512357410054605401" in text


def test_unknown_entry_is_usage_error(capsys):
    assert main(["evaluate", "--entry", "bogus"]) == 2
    assert "unknown entry" in capsys.readouterr().err


def test_bad_digits_is_usage_error(capsys):
    assert main(["evaluate", "--entry", "768-over-pi", "--digits", "0"]) == 2


def test_failing_check_exits_one():
    code, text = out_of(RunConfig("evaluate", entries=["768-over-pi"], terms=3))
    assert code == 1 and text.startswith("FAIL")


def test_jsonl_is_stable():
    cfg = RunConfig("evaluate", entries=["lupas-18catalan", "3ln2"], format="jsonl", digits=20)
    a = out_of(cfg)[1]
    b = out_of(cfg)[1]
    assert a == b
    recs = [json.loads(x) for x in a.splitlines()]
    assert [r["id"] for r in recs] == ["lupas-18catalan", "3ln2"]
    assert list(recs[0]) == ["kind", "id", "passed", "target", "digits", "required", "terms", "value", "reference"]


def test_emit_and_compare():
    code, text = out_of(RunConfig("emit", entries=["guillera-pi2-over-4"]))
    assert code == 0 and "(1/4)^j" in text
    code, text = out_of(RunConfig("compare", entries=["ramanujan-4-over-pi"], terms=20))
    assert code == 0 and "J=20" in text


def test_list_and_bench():
    code, text = out_of(RunConfig("list"))
    assert code == 0 and "family nn" in text
    code, text = out_of(RunConfig("bench", families=["cube"]))
    assert code == 0 and "digits/term" in text


def test_env_catalog(tmp_path, monkeypatch):
    cat = builtin_catalog()
    trimmed = type(cat)({"nn": cat.families["nn"]}, [cat.entry("ramanujan-4-over-pi")])
    p = tmp_path / "mini.catalog"
    p.write_text(dump_catalog(trimmed))
    monkeypatch.setenv(ENV_VAR, str(p))
    code, text = out_of(RunConfig("verify", all=True))
    assert code == 0 and text.count("PASS family") == 1


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("dance")


def test_decimal_truncates():
    from fractions import Fraction

    assert decimal(Fraction(-22, 7), 4) == "-3.1428"
