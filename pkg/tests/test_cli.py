import csv
import io
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from susydos import cli
from susydos.oracle import gaussian_scalar_dos


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_dos_gue_centre(capsys):
    code, out, _ = run(["dos", "--family", "gue", "--n", "10", "--e", "0", "0", "1"], capsys)
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["rho_expansion"]) == pytest.approx(0.3103521, abs=1e-7)
    assert list(row) == cli.COLUMNS["dos"]


def test_dos_goe_centre(capsys):
    code, out, _ = run(["dos", "--family", "goe", "--n", "10", "--e", "0", "0", "1"], capsys)
    assert code == 0
    assert float(rows_of(out)[0]["rho_expansion"]) == pytest.approx(0.3103521, abs=1e-7)


def test_dos_interp_full_coupling_equals_gue(capsys):
    _, a, _ = run(["dos", "--family", "interp", "--r", "1", "--n", "6", "--e", "0.5", "0.5", "1"], capsys)
    _, b, _ = run(["dos", "--family", "gue", "--n", "6", "--e", "0.5", "0.5", "1"], capsys)
    assert abs(float(rows_of(a)[0]["rho_exact"]) - float(rows_of(b)[0]["rho_exact"])) < 1e-8


def test_csv_format(capsys, tmp_path):
    path = tmp_path / "out.csv"
    code, _, _ = run(["dos", "--n", "4", "--e", "-1", "1", "3", "--out", str(path)], capsys)
    assert code == 0
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode().splitlines()
    assert lines[0] == "E,rho_exact,rho_expansion,rho_sc,quad_error"
    assert len(lines) == 4
    value = lines[2].split(",")[1]
    digits = value.replace(".", "").replace("-", "").lstrip("0").split("e")[0]
    assert len(digits) <= 17 and float(value) == float(format(float(value), ".17g"))


def test_format_value():
    assert cli.format_value(0.1) == "0.10000000000000001"
    assert cli.format_value(True) == "true"
    assert cli.format_value(3) == "3"


def test_json_format(capsys):
    code, out, _ = run(["dos", "--n", "3", "--e", "0", "0.5", "2", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["metadata"]["command"] == "dos"
    assert doc["metadata"]["config"]["n"] == 3
    assert [set(r) for r in doc["rows"]] == [set(cli.COLUMNS["dos"])] * 2


def test_deterministic_output(capsys):
    argv = ["compare", "--family", "gue", "--n", "3", "--e", "-0.5", "0.5", "3",
            "--samples", "5000", "--seed", "4", "--format", "json"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


def test_workers_do_not_change_output(capsys):
    base = ["dos", "--family", "goe", "--n", "3", "--e", "-0.5", "0.5", "3"]
    _, a, _ = run(base, capsys)
    _, b, _ = run(base + ["--workers", "2"], capsys)
    assert a == b


def test_compare_single_entry_uses_closed_oracle(capsys):
    code, out, _ = run(["compare", "--family", "gue", "--n", "1", "--epsilon", "0.5",
                        "--e", "0", "0", "1", "--samples", "100000", "--seed", "3"], capsys)
    (row,) = rows_of(out)
    assert float(row["exact"]) == pytest.approx(gaussian_scalar_dos(0.0, 0.5), abs=1e-8)
    assert abs(float(row["z_score"])) <= 3 and code == 0


def test_compare_goe_statistical_contract(capsys):
    code, out, err = run(["compare", "--family", "goe", "--n", "8", "--epsilon", "0.05",
                          "--e", "-1.5", "1.5", "21", "--samples", "200000", "--seed", "11"], capsys)
    rows = rows_of(out)
    within = sum(abs(float(r["z_score"])) <= 3 for r in rows) / len(rows)
    assert len(rows) == 21 and within >= 0.95 and code == 0
    assert "fraction_within_3sigma" in err


@pytest.mark.parametrize("family, E", [("gue", "0.5"), ("goe", "0")])
def test_residuals_bounded(capsys, family, E):
    code, out, _ = run(["residuals", "--family", family, "--e", E, E, "1"], capsys)
    assert code == 0
    scaled = [float(r["scaled_residual"]) for r in rows_of(out)]
    assert len(scaled) == 4 and max(scaled) <= 2 * scaled[0]


def test_residuals_raw_shrink(capsys):
    _, out, _ = run(["residuals", "--family", "gue", "--e", "0", "0", "1", "--ns", "16", "64"], capsys)
    rows = rows_of(out)
    assert float(rows[0]["residual"]) / float(rows[1]["residual"]) >= 5


def _svg_is_self_contained(path):
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    for el in root.iter():
        for key, value in el.attrib.items():
            if key.endswith("href"):
                assert value.startswith("#")
        assert not el.tag.endswith("image")


def test_plot_gue(capsys, tmp_path):
    path = tmp_path / "gue.svg"
    code, out, _ = run(["plot", "--family", "gue", "--n", "20", "--out", str(path),
                        "--format", "csv"], capsys)
    assert code == 0
    _svg_is_self_contained(path)
    first = path.read_bytes()
    run(["plot", "--family", "gue", "--n", "20", "--out", str(path)], capsys)
    assert path.read_bytes() == first

    rows = rows_of(out)
    assert len(rows) == 101
    sc = np.array([float(r["rho_sc"]) for r in rows])
    envelope = 1 / (4 * math.pi ** 3 * sc ** 2)
    inset_exp = np.abs([float(r["inset_expansion"]) for r in rows])
    inset_exact = np.abs([float(r["inset_exact"]) for r in rows])
    assert np.all(inset_exp <= envelope * (1 + 1e-12))
    # the exact curve carries the next order as well: O(N^-1/2) relative slack
    assert np.all(inset_exact <= envelope * (1 + 1 / math.sqrt(20)))


def test_plot_goe_below_semicircle(capsys, tmp_path):
    path = tmp_path / "goe.svg"
    code, out, _ = run(["plot", "--family", "goe", "--n", "20", "--out", str(path),
                        "--format", "json"], capsys)
    assert code == 0
    _svg_is_self_contained(path)
    rows = json.loads(out)["rows"]
    assert all(r["rho_exact"] < r["rho_sc"] for r in rows)
    assert all(r["rho_expansion"] < r["rho_sc"] for r in rows)


def test_figure_alongside_table(capsys, tmp_path):
    fig = tmp_path / "fig.svg"
    code, out, _ = run(["residuals", "--family", "gue", "--ns", "8", "16", "--figure", str(fig)], capsys)
    assert code == 0 and out.startswith("E,N,")
    _svg_is_self_contained(fig)
    svg = tmp_path / "cmp.svg"
    code, _, _ = run(["compare", "--family", "gue", "--n", "2", "--e", "0", "1", "3",
                      "--samples", "2000", "--format", "svg", "--out", str(svg)], capsys)
    _svg_is_self_contained(svg)


def test_verify_default_panel(capsys):
    code, out, err = run(["verify"], capsys)
    rows = rows_of(out)
    assert code == 0
    norm = [float(r["deviation"]) for r in rows if r["check"] == "normalization"]
    assert max(norm) < 1e-7
    checks = {r["check"] for r in rows}
    assert {"claim_f", "claim_g", "claim_alpha", "grassmann_phipolar",
            "grassmann_goe_two_pair", "grassmann_gue_one_pair"} <= checks
    assert all(r["passed"] == "true" for r in rows)
    assert "max_normalization_deviation" in err


def test_verify_fails_on_impossible_tolerance(capsys):
    code, _, _ = run(["verify", "--family", "gue", "--n", "3", "--tol", "1e-30"], capsys)
    assert code == 1


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 5, "e": [0.2, 0.2, 1], "format": "json"}))
    _, out, _ = run(["dos", "--config", str(cfg)], capsys)
    doc = json.loads(out)
    assert doc["metadata"]["config"]["n"] == 5 and doc["rows"][0]["E"] == 0.2
    _, out, _ = run(["dos", "--config", str(cfg), "--n", "6"], capsys)
    assert json.loads(out)["metadata"]["config"]["n"] == 6
    # defaults fill whatever neither source sets
    assert json.loads(out)["metadata"]["config"]["family"] == "gue"


def test_config_ignores_environment(capsys, monkeypatch):
    monkeypatch.setenv("SUSYDOS_N", "9")
    monkeypatch.setenv("N", "9")
    config = cli.parse_config(["dos"])
    assert config.n == cli.COMMAND_DEFAULTS["dos"]["n"]


@pytest.mark.parametrize("argv", [
    ["dos", "--e", "-2", "0", "3"],
    ["dos", "--e", "0", "1", "0"],
    ["dos", "--family", "interp"],
    ["dos", "--family", "goe", "--r", "0.5"],
    ["compare", "--epsilon", "0.001"],
    ["verify", "--format", "svg", "--out", "x.svg"],
    ["dos", "--format", "svg"],
])
def test_invalid_config_exit_code(capsys, argv):
    code, _, err = run(argv, capsys)
    assert code == cli.EXIT_CONFIG and "error" in err


def test_bad_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(["dos", "--config", str(cfg)], capsys)[0] == cli.EXIT_CONFIG
    cfg.write_text("{not json")
    assert run(["dos", "--config", str(cfg)], capsys)[0] == cli.EXIT_CONFIG


def test_unknown_choice_rejected(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["dos", "--format", "xml"])
    assert info.value.code == 2


def test_unwritable_path(capsys, tmp_path):
    code, _, err = run(["dos", "--n", "2", "--e", "0", "0", "1",
                        "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == cli.EXIT_IO and "cannot write" in err


def test_four_fold_single_entry_falls_back_to_gaussian(capsys):
    code, out, err = run(["dos", "--family", "goe", "--n", "1", "--e", "0", "0", "1"], capsys)
    assert code == 0 and "gaussian" in err
    assert float(rows_of(out)[0]["rho_exact"]) == pytest.approx(1 / math.sqrt(4 * math.pi))
