import csv
import json

import numpy as np
import pytest

from kspace_ent import __version__
from kspace_ent.cli import parse_range, run
from kspace_ent.quadratic import finite_entropy_per_site


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_range():
    assert parse_range("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("0:2:0.05")[-1] == 2.0 and len(parse_range("0:2:0.05")) == 41
    assert parse_range("1,3.5") == [1.0, 3.5]
    assert parse_range("7") == [7.0]


@pytest.mark.parametrize("bad", ["1:0:0.1", "0:1:0", "0:1", "a:b:c", ""])
def test_bad_range_exits_2(bad, capsys):
    with pytest.raises(SystemExit) as e:
        run(["itf-scan", "--J", bad])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as e:
        run(["itf-scan", "--bogus"])
    assert e.value.code == 2


def test_degenerate_size_exits_3(capsys):
    assert run(["xxz-gs", "--N", "10", "--delta", "0.5"]) == 3
    assert "multiple of 4" in capsys.readouterr().err


def test_odd_size_exits_3(capsys):
    assert run(["itf-scan", "--N", "7", "--J", "1"]) == 3
    assert "even" in capsys.readouterr().err


def test_itf_scan_csv_matches_library(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["itf-scan", "--J", "0:2:0.05", "--N", "200", "--out", str(out)]) == 0
    rows = _csv(out)
    assert list(rows[0]) == ["N", "J", "S_P_half", "s_per_site", "s_singlemode", "n_f"]
    row = next(r for r in rows if float(r["J"]) == 1.0)
    assert row["s_per_site"] == format(finite_entropy_per_site(1.0, 200), ".15g")


def test_itf_scan_json_is_exact(tmp_path):
    out = tmp_path / "s.json"
    assert run(["itf-scan", "--J", "1", "--N", "200", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["version"] == __version__
    assert doc["config"]["argv"][0] == "itf-scan"
    assert doc["results"][0]["s_per_site"] == finite_entropy_per_site(1.0, 200)


def test_itf_collapse_table(tmp_path, capsys):
    assert run(["itf-scan", "--collapse", "--N", "100,400", "--Jt=-2:2:1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "N,J,Jt,s_N,s_tilde"
    assert len(lines) == 11


def test_output_is_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["entropy-scan", "--N", "8", "--delta", "0.3,0.6", "--family", "E", "--alpha", "2"]
    assert run(args + ["--out", str(a), "--threads", "1"]) == 0
    assert run(args + ["--out", str(b), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_echo_round_trip(tmp_path):
    first = tmp_path / "first.json"
    assert run(["xy-scan", "--N", "12", "--gamma", "0:1:0.5", "--out", str(first)]) == 0
    doc = json.loads(first.read_text())
    argv = doc["config"]["argv"]
    second = tmp_path / "second.json"
    argv = argv[: argv.index("--out")] + ["--out", str(second)]
    assert run(argv) == 0
    assert json.loads(second.read_text())["results"] == doc["results"]


def test_emit_plot_references_data(tmp_path):
    out = tmp_path / "itf.csv"
    assert run(["itf-scan", "--J", "0:2:0.5", "--N", "20", "--out", str(out), "--emit-plot"]) == 0
    script = (tmp_path / "itf.gp").read_text()
    assert "'itf.csv'" in script and "plot" in script


def test_xxz_gs_and_checkpoint(tmp_path):
    ck = tmp_path / "gs_{N}.bin"
    out = tmp_path / "gs.csv"
    assert run(["xxz-gs", "--N", "8", "--delta", "0", "--checkpoint", str(ck), "--out", str(out)]) == 0
    row = _csv(out)[0]
    assert float(row["energy"]) == pytest.approx(float(row["free_fermion_energy"]), abs=1e-10)
    m = tmp_path / "m.csv"
    assert run(["mbft", "--load", str(tmp_path / "gs_8.bin"), "--out", str(m)]) == 0
    occ = [float(r["n_k"]) for r in _csv(m)]
    assert np.allclose(sorted(occ), [0] * 4 + [1] * 4, atol=1e-8)


def test_neel_check_json(tmp_path):
    out = tmp_path / "neel.json"
    assert run(["neel-check", "--N", "8", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["extra"]["mismatch_derived"] <= 1e-10
    assert doc["extra"]["nonzero_amplitudes"] == 8
    for r in doc["results"]:
        assert r["S_transformed"] == pytest.approx(r["S_closed_form"], abs=1e-10)
    assert run(["neel-check", "--N", "6"]) == 3


def test_occupations_and_minimax(capsys):
    assert run(["occupations", "--N", "12", "--delta", "0.5"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "N,delta,k,n_k,alpha_fit,alpha_theory"
    assert len(rows) == 13
    assert run(["minimax", "--neel", "--N", "8", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["extra"]["S_M"] == pytest.approx(2 * np.log(2))


def test_fit_subcommand(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("x,y,g\n" + "".join(f"{x},{3 * x ** 1.5},{x % 2}\n" for x in range(1, 9)))
    assert run(["fit", "--input", str(data), "--x", "x", "--y", "y", "--model", "power"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[2].startswith("power,b,1.5")
    assert run(["fit", "--input", str(data), "--x", "x", "--y", "y", "--model", "linear", "--where", "g=1"]) == 0


def test_size_scan_with_fits(tmp_path):
    out = tmp_path / "size.json"
    assert run(["xxz-size-scan", "--N", "4:16:4", "--delta", "0.5", "--fit", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [r["N"] for r in doc["results"]] == [4, 8, 12, 16]
    assert "log_correction_S_max" in doc["extra"]["0.5"]
