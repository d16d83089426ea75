import argparse
import json

import pytest

from imfsic.cli import (
    CSV_COLUMNS,
    FIGURE_PRESETS,
    curves_to_csv,
    main,
    parse_args,
    parse_snr_range,
    read_csv,
)
from imfsic.montecarlo import BerCurve, BerPoint

QUICK = ["--nt", "2", "--detectors", "ml,sic,imf-sic", "--snr", "0:5:10", "--trials", "20"]


def test_fig2_preset():
    cfg = parse_args(["--figure", "fig2", "--out", "x.csv"])
    assert (cfg.dims.nt, cfg.dims.nr, cfg.m, cfg.trials) == (4, 4, 4, 10_000)
    imf = {d.kind: d for d in cfg.detectors}["imf-sic"]
    assert (imf.d_th, imf.l, imf.s) == (0.2, 2, 4)
    assert cfg.snr_grid_db == tuple(float(v) for v in range(0, 15, 2))


def test_fig4_preset_overrides_oimf():
    cfg = parse_args(["--figure", "fig4", "--out", "x.csv"])
    dets = {d.kind: d for d in cfg.detectors}
    assert cfg.dims.nt == 16
    assert (dets["oimf-sic"].l, dets["oimf-sic"].d_th) == (3, 0.5)
    assert (dets["imf-sic"].l, dets["imf-sic"].d_th) == (2, 0.2)


def test_every_preset_builds():
    for name in FIGURE_PRESETS:
        parse_args(["--figure", name, "--out", "x.csv"])


def test_figure_allows_run_size_overrides():
    cfg = parse_args(["--figure", "fig5", "--trials", "7", "--snr", "10:4:18", "--detectors", "ml,oimf-sic",
                      "--out", "x.csv"])
    assert cfg.trials == 7
    assert cfg.snr_grid_db == (10.0, 14.0, 18.0)
    assert [d.kind for d in cfg.detectors] == ["ml", "oimf-sic"]
    assert cfg.detectors[1].s == 8


@pytest.mark.parametrize("argv", [
    ["--mod", "8"],
    ["--figure", "fig2", "--nt", "8"],
    ["--figure", "fig2", "--dth", "0.3"],
    ["--snr", "0:2"],
    ["--snr", "a:b:c"],
    ["--snr", "10:2:0"],
    ["--detectors", "ml,foo"],
    ["--nt", "4", "--nr", "2"],
    ["--mod", "4", "--S", "5"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv + ["--out", str(tmp_path / "r.csv")])
    assert info.value.code == 2


def test_snr_range_parsing():
    assert parse_snr_range("0:2:14") == tuple(float(v) for v in range(0, 15, 2))
    assert parse_snr_range("5") == (5.0,)
    assert parse_snr_range("0:0.5:1") == (0.0, 0.5, 1.0)
    with pytest.raises(argparse.ArgumentTypeError):
        parse_snr_range("0:0:4")


def test_csv_run_and_round_trip(tmp_path):
    out = tmp_path / "r.csv"
    assert main(QUICK + ["--out", str(out)]) == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert text.count(lines[0]) == 1
    assert len(lines) == 1 + 3 * 3
    assert curves_to_csv(read_csv(text)) == text


def test_fig2_row_count(tmp_path):
    out = tmp_path / "fig2.csv"
    assert main(["--figure", "fig2", "--trials", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines.count(",".join(CSV_COLUMNS)) == 1
    assert len(lines) - 1 == 7 * 8


def test_zero_error_row_prints_zero():
    c = BerCurve("sic", (BerPoint(30.0, 10, 40, 0),))
    row = curves_to_csv([c]).splitlines()[1].split(",")
    assert row[4:7] == ["0", "0", "0"]


def test_json_and_svg_outputs(tmp_path):
    out = tmp_path / "r.json"
    assert main(QUICK + ["--format", "json", "--plot", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["manifest"]["config"]["nt"] == 2
    assert len(payload["results"]) == 9
    assert set(payload["results"][0]) == set(CSV_COLUMNS)
    svg = (tmp_path / "r.svg").read_text()
    assert svg.startswith("<svg") and "IMF-SIC" in svg


def test_manifest_rerun_reproduces_output(tmp_path):
    first = tmp_path / "a.csv"
    assert main(QUICK + ["--seed", "5", "--out", str(first)]) == 0
    manifest = tmp_path / "a.csv.manifest.json"
    assert json.loads(manifest.read_text())["config"]["base_seed"] == 5
    second = tmp_path / "b.csv"
    assert main(["--from-manifest", str(manifest), "--out", str(second)]) == 0
    assert second.read_bytes() == first.read_bytes()


def test_seed_changes_results(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["--nt", "2", "--detectors", "mmse", "--snr", "0", "--trials", "200"]
    main(argv + ["--seed", "1", "--out", str(a)])
    main(argv + ["--seed", "2", "--out", str(b)])
    assert a.read_text() != b.read_text()


def test_excluded_ml_is_recorded(tmp_path):
    out = tmp_path / "r.csv"
    with pytest.warns(RuntimeWarning):
        rc = main(["--nt", "8", "--mod", "16", "--detectors", "ml,sic", "--snr", "30", "--trials", "2",
                   "--out", str(out)])
    assert rc == 0
    assert json.loads((tmp_path / "r.csv.manifest.json").read_text())["excluded"] == ["ml"]
    assert "ml," not in out.read_text()


def test_unwritable_output_returns_1(tmp_path, capsys):
    out = tmp_path / "missing" / "r.csv"
    assert main(QUICK + ["--out", str(out)]) == 1
    assert "cannot write" in capsys.readouterr().err
