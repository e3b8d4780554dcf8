from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import pytest

from idrmetrics.cli import EXIT_INVALID, EXIT_OK, EXIT_PARTIAL, load_manifest, main, parse_param
from idrmetrics.schemas import validate_csv, validate_json
from idrmetrics.synthetic import write_fixture

from conftest import DATA

GOLDEN = DATA / "golden" / "cli"


def fixture(tmp_path: Path, **changes) -> Path:
    path = write_fixture(tmp_path)
    if changes:
        data = json.loads(path.read_text())
        for k, v in changes.items():
            if v is None:
                data.pop(k, None)
            else:
                data[k] = v
        path.write_text(json.dumps(data, indent=2))
    return path


def run(*args) -> int:
    return main([str(a) for a in args])


def tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_validate_clean_fixture(tmp_path, capsys):
    assert run("validate", "--manifest", fixture(tmp_path)) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_validate_missing_thesaurus(tmp_path, capsys):
    m = fixture(tmp_path, thesaurus="data/nope.csv")
    assert run("validate", "--manifest", m) == EXIT_INVALID
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert "manifest.json:" in lines[0] and "thesaurus" in lines[0] and "error" in lines[0]


def test_validate_label_absent_from_thesaurus(tmp_path, capsys):
    m = fixture(tmp_path)
    gm = tmp_path / "data" / "global_matrix.csv"
    rows = list(csv.reader(io.StringIO(gm.read_text())))
    rows[0].append("Astronomy")
    for r in rows[1:]:
        r.append("0")
    rows.append(["Astronomy"] + ["1"] * (len(rows[0]) - 1))
    gm.write_text("".join(",".join(r) + "\n" for r in rows))
    assert run("validate", "--manifest", m) == EXIT_OK
    out = capsys.readouterr().out
    assert "warning" in out and "'Astronomy' absent from thesaurus" in out
    assert run("validate", "--manifest", m, "--strict") == EXIT_INVALID


def test_validate_reports_bad_header_with_line(tmp_path, capsys):
    m = fixture(tmp_path)
    (tmp_path / "data" / "rating.csv").write_text("journal,rank\nA J,7\n")
    assert run("validate", "--manifest", m) == EXIT_INVALID
    assert "rating.csv:2" in capsys.readouterr().out


def test_invalid_manifest_exit_code(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text("{ not json")
    assert run("indicators", "--manifest", bad) == EXIT_INVALID
    bad.write_text(json.dumps({"units": []}))
    assert run("validate", "--manifest", bad) == EXIT_INVALID
    assert run("indicators", "--manifest", tmp_path / "absent.json") == EXIT_INVALID
    m = fixture(tmp_path)
    assert run("indicators", "--manifest", m, "--param", "min_share=2") == EXIT_INVALID
    assert run("indicators", "--manifest", m, "--param", "bogus=1") == EXIT_INVALID


def test_param_parsing_and_echo(tmp_path):
    assert parse_param("neighborhood=one") == ("neighborhood", "one")
    assert parse_param("multipliers.4*=9") == ("multipliers.4*", 9)
    m = fixture(tmp_path)
    assert run("fund", "--manifest", m, "--param", "multipliers.4*=9", "--param", "neighborhood=\"one\"") == EXIT_OK
    params = json.loads((tmp_path / "out" / "parameters.json").read_text())
    assert params["multipliers"]["4*"] == 9 and params["neighborhood"] == "one"
    fund = json.loads((tmp_path / "out" / "funding" / "funding.json").read_text())
    assert fund["parameters"]["multipliers"]["4*"] == 9
    assert load_manifest(m).parameters["min_share"] == 0.0001


@pytest.mark.parametrize("unit", ["DISC", "IDR"])
def test_indicator_reports_match_golden(tmp_path, unit):
    m = fixture(tmp_path)
    assert run("indicators", "--manifest", m) == EXIT_OK
    out = tmp_path / "out" / "indicators"
    for ext in ("json", "csv"):
        text = (out / f"{unit}.{ext}").read_text()
        gold = GOLDEN / f"{unit}.{ext}"
        if os.environ.get("IDRMETRICS_REGEN_GOLDEN"):
            gold.parent.mkdir(parents=True, exist_ok=True)
            gold.write_text(text)
        assert text == gold.read_text()


def test_zero_citing_records_fails_one_unit_only(tmp_path):
    m = fixture(tmp_path)
    data = json.loads(m.read_text())
    data["units"][0]["citing"] = []
    m.write_text(json.dumps(data))
    assert run("indicators", "--manifest", m, "--facet", "citations") == EXIT_PARTIAL
    disc = json.loads((tmp_path / "out" / "indicators" / "DISC.json").read_text())
    idr = json.loads((tmp_path / "out" / "indicators" / "IDR.json").read_text())
    assert "citations" in disc["errors"] and disc["facets"] == {}
    assert idr["errors"] == {} and "citations" in idr["facets"]


def test_overlay_without_mappable_references(tmp_path):
    m = fixture(tmp_path)
    (tmp_path / "data" / "thesaurus.csv").write_text("journal,category\nNOT A JOURNAL,Management\n")
    assert run("overlay", "--manifest", m, "--unit", "DISC", "--facet", "references") == EXIT_PARTIAL
    assert not (tmp_path / "out" / "overlay" / "DISC_references.json").exists()


def test_single_unit_fund(tmp_path, capsys):
    m = fixture(tmp_path)
    data = json.loads(m.read_text())
    data["units"] = data["units"][:1]
    m.write_text(json.dumps(data))
    assert run("fund", "--manifest", m) == EXIT_OK
    fund = json.loads((tmp_path / "out" / "funding" / "funding.json").read_text())
    assert fund["allocations"]["DISC"]["share"] == 1.0
    assert "share ratio" in capsys.readouterr().out


def test_fund_prints_ratio_matrix(tmp_path, capsys):
    assert run("fund", "--manifest", fixture(tmp_path)) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("share ratio")
    assert out[2].split()[0] == "DISC" and out[2].split()[1] == "1.000"


def test_unknown_unit(tmp_path):
    assert run("indicators", "--manifest", fixture(tmp_path), "--unit", "NOPE") == EXIT_INVALID


def test_out_flag_and_all_outputs_validate(tmp_path):
    m = fixture(tmp_path)
    out = tmp_path / "elsewhere"
    assert run("all", "--manifest", m, "--out", out) == EXIT_OK
    files = tree(out)
    schema_of = {"indicators/": "indicator_report", "performance/": "performance_report", "funding/": "funding"}
    checked = 0
    for name, blob in files.items():
        text = blob.decode()
        if name.endswith(".json") and name != "parameters.json" and "rating_ranks" not in name:
            if name.startswith("overlay/"):
                schema = "journal_map" if name.endswith("_journal_map.json") else None if name.endswith("_unplaced.json") else "overlay"
            else:
                schema = next(s for p, s in schema_of.items() if name.startswith(p))
            if schema:
                validate_json(json.loads(text), schema)
                checked += 1
        elif name.endswith(".csv"):
            table = name.split("/")[0]
            assert validate_csv(text, table) == [], name
            checked += 1
    assert checked >= 15
    assert not (tmp_path / "out").exists()


def test_rerun_is_byte_identical(tmp_path):
    m = fixture(tmp_path)
    assert run("all", "--manifest", m, "--out", tmp_path / "a") == EXIT_OK
    assert run("all", "--manifest", m, "--out", tmp_path / "b", "--jobs", "4") == EXIT_OK
    a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert a == b and len(a) > 20
    assert not any(n.endswith(".tmp") for n in a)
