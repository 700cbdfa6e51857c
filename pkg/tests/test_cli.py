import csv
import io
import json

import pytest
from click.testing import CliRunner

from babyverma.cli import build_config, main, parse_box, parse_levi
from babyverma.lattice import RootDatum


def run(*args):
    return CliRunner().invoke(main, list(args))


def test_decompose_A1_zero():
    r = run("decompose", "--type", "A1", "--p", "3", "--levi", "none", "--pi", "zero")
    assert r.exit_code == 0, r.output
    data = json.loads(r.output)
    assert len(data["rows"]) == 3 and len(data["columns"]) == 5
    assert all(row["dims"] == 3 for row in data["rows"])
    # Z(-1) is simple, the other two have two factors
    counts = {tuple(row["lambda"]): sum(row["factors"].values()) for row in data["rows"]}
    assert counts == {(-1,): 1, (0,): 2, (1,): 2}


def test_decompose_levi_and_generic_are_simple():
    for args in (["--levi", "1"], ["--pi", "generic"]):
        r = run("decompose", "--type", "A1", "--p", "3", *args)
        data = json.loads(r.output)
        assert all(list(row["factors"].values()) == [1] for row in data["rows"])
        assert all(row["label"] in row["factors"] for row in data["rows"])


def test_decompose_csv():
    r = run("decompose", "--type", "A1", "--p", "3", "--format", "csv")
    rows = list(csv.reader(io.StringIO(r.output)))
    assert rows[0][0] == "lambda" and len(rows) == 4 and len(rows[0]) == 6


def test_verify_classification_passes():
    r = run("verify", "--type", "A2", "--p", "3", "--levi", "1", "--suite", "classification")
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["ok"]


@pytest.mark.parametrize("suite,p", [("rank1-ext", 5), ("ajs-theorem", 3), ("reciprocity", 3)])
def test_rank1_suites(suite, p):
    r = run("verify", "--type", "A1", "--p", str(p), "--suite", suite)
    assert r.exit_code == 0, r.output


def test_rank1_suite_needs_rank_one():
    r = run("verify", "--type", "A2", "--p", "3", "--suite", "rank1-ext")
    assert r.exit_code == 2


def test_blocks_exit_codes():
    r = run("blocks", "--type", "A1", "--p", "5")
    assert r.exit_code == 0 and json.loads(r.output)["ok"]
    # sl3 at p = 3 with I = all has a non-simple top Levi Verma; the prediction fails there
    r = run("blocks", "--type", "A2", "--p", "3", "--levi", "all")
    assert r.exit_code == 1 and json.loads(r.output)["violations"]


def test_dump_module(tmp_path):
    out = tmp_path / "z.json"
    r = run("dump-module", "--type", "A2", "--p", "3", "--levi", "1", "--lam", "1,0", "--out", str(out))
    assert r.exit_code == 0, r.output
    data = json.loads(out.read_text())
    assert data["type"] == "A2" and data["levi"] == [1]
    assert sum(b["dim"] for b in data["blocks"]) == 27
    r = run("dump-module", "--type", "A1", "--p", "3", "--lam", "1", "--simple")
    assert sum(b["dim"] for b in json.loads(r.output)["blocks"]) == 2
    r = run("dump-module", "--type", "A1", "--p", "3", "--lam", "1", "--twist", "1")
    assert r.exit_code == 0 and json.loads(r.output)["name"].startswith("Z^")


def test_output_is_deterministic():
    args = ["decompose", "--type", "A2", "--p", "3", "--levi", "1"]
    assert run(*args).output == run(*args).output


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"type": "A1", "p": 5, "levi": [1], "pi": "zero"}))
    r = run("decompose", "--config", str(cfg), "--p", "3")
    data = json.loads(r.output)
    assert data["p"] == 3 and data["levi"] == [1]


@pytest.mark.parametrize("args", [
    ["decompose", "--type", "C3"],
    ["decompose", "--p", "4"],
    ["decompose", "--type", "A2", "--box", "0..1,0..1,0..1"],
    ["decompose", "--levi", "0"],
    ["dump-module", "--type", "A2", "--lam", "1"],
    ["verify", "--type", "A1", "--suite", "blocks", "--format", "xml"],
])
def test_bad_configuration_is_a_usage_error(args):
    assert run(*args).exit_code == 2


def test_parsers():
    d = RootDatum("A2", 3)
    assert parse_levi("all", 2) == (0, 1) and parse_levi("2") == (1,) and parse_levi(None) == ()
    assert parse_box("-1..0", d).bounds == ((-1, 0), (-1, 0))
    cfg = build_config(None, type="b2", p=5)
    assert cfg.type_label == "B2" and cfg.levi == ()
