import json

import numpy as np
import pandas as pd
import pytest

from lobres.artifacts import read_surface, read_ted
from lobres.cli import build_parser, main
from lobres.config import DAY_OPEN_MS, WINDOW_START_MS, settings
from lobres.fit import FittedModel, fit_ml
from lobres.lob_core import write_events
from lobres.synth import FlowConfig, gen_day

WINDOW = (DAY_OPEN_MS + 60_000, DAY_OPEN_MS + 4 * 60_000)


def _output(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def events_file(tmp_path):
    path = tmp_path / "day.csv"
    write_events(gen_day(FlowConfig(seed=11, day_start_ms=DAY_OPEN_MS, day_end_ms=DAY_OPEN_MS + 5 * 60_000), 0), path)
    return path


@pytest.fixture
def ted_file(tmp_path, events_file, capsys):
    path = tmp_path / "ted.csv"
    code = main([
        "extract-ted", "--events", str(events_file), "--out", str(path),
        "--window-start-ms", str(WINDOW[0]), "--window-end-ms", str(WINDOW[1]),
    ])
    assert code == 0
    result = _output(capsys)
    assert result["records"] > 0
    assert len(result["covariates"]) == 24
    return path


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_covariate_list_argument():
    args = build_parser().parse_args(["fit", "ted.csv", "--covariates", "spreads, mobuy"])
    assert args.covariates == ["spreads", "mobuy"]
    assert build_parser().parse_args(["fit", "ted.csv"]).covariates == "fixed_subset"


def test_fit_matches_library(tmp_path, ted_file, capsys):
    model_path = tmp_path / "model.json"
    code = main(["fit", str(ted_file), "--family", "lognormal", "--covariates", "prevTEDavg,timelast,spreads",
                 "--out", str(model_path)])
    assert code == 0
    result = _output(capsys)
    assert result["family"] == "lognormal"

    names = ["prevTEDavg", "timelast", "spreads"]
    X, tau = read_ted(ted_file).design(names)
    direct = fit_ml("lognormal", X, tau, names=names)
    assert FittedModel.load(model_path).to_dict() == direct.to_dict()
    assert result["loglik"] == direct.loglik


def test_quantile_surface_command(tmp_path, ted_file, capsys):
    model_path = tmp_path / "model.json"
    main(["fit", str(ted_file), "--family", "lognormal", "--covariates", "prevTEDavg,timelast",
          "--out", str(model_path)])
    capsys.readouterr()
    surface = tmp_path / "surface.csv"
    code = main(["quantile-surface", str(model_path), str(ted_file), "--vary", "prevTEDavg",
                 "--u", "0.5", "--u", "0.9", "--points", "5", "--out", str(surface)])
    assert code == 0
    assert _output(capsys)["rows"] == 10
    frame = read_surface(surface)
    assert list(frame.columns) == ["cov1", "cov2", "u", "quantile_ms"]
    assert frame["cov2"].isna().all()
    medians = frame[frame["u"] == 0.5]["quantile_ms"].to_numpy()
    model = FittedModel.load(model_path)
    X, _ = read_ted(ted_file).design(["prevTEDavg", "timelast"])
    rows = np.column_stack([frame[frame["u"] == 0.5]["cov1"], np.full(5, np.median(X[:, 1]))])
    np.testing.assert_allclose(medians, np.exp(model.params(rows)[0]), rtol=1e-12)


def test_select_command(tmp_path, ted_file, capsys):
    out = tmp_path / "selection"
    code = main(["select", str(ted_file), str(ted_file), "--out", str(out),
                 "--covariates", "prevTEDavg,spreads,timelast,lask"])
    assert code == 0
    result = _output(capsys)
    assert result["days"] == 2
    inclusion = pd.read_csv(out / "heatmap_inclusion.csv", comment="#")
    assert inclusion["subset_size"].tolist() == ["M1", "M2", "M3", "M4"]


def test_simulate_and_replay(tmp_path, capsys):
    out = tmp_path / "flow"
    code = main(["simulate", "--out", str(out), "--days", "2", "--seed", "4",
                 "--day-start-ms", str(DAY_OPEN_MS), "--day-end-ms", str(DAY_OPEN_MS + 60_000)])
    assert code == 0
    result = _output(capsys)
    assert [f["day"] for f in result["files"]] == [0, 1]
    assert main(["replay", result["files"][0]["events"], "--out", str(tmp_path / "s.csv")]) == 0
    replayed = _output(capsys)
    assert replayed["points"] > 0
    assert replayed["measure"] == "spread"


def test_report_on_missing_directory(tmp_path, capsys):
    assert main(["report", str(tmp_path / "absent")]) == 1
    assert "error" in _output(capsys)


def test_fit_on_missing_file(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "absent.csv")]) == 1
    assert "not found" in _output(capsys)["error"]


@pytest.mark.slow
def test_run_preset(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--preset", "default", "--out", str(out), "--seed", "2"])
    result = _output(capsys)
    assert code == 0, result
    assert result["out"] == str(out)
    assert result["errors"] == 0
    assert (out / "run_report.json").exists()
    report = json.loads((out / "run_report.json").read_text())
    assert report["config"]["seed"] == 2


@pytest.fixture
def step_series(tmp_path):
    path = tmp_path / "series.csv"
    rows = [f"{WINDOW_START_MS + 1000 * i},{v}" for i, v in enumerate([3, 6, 6, 3, 7, 3])]
    path.write_text("timestamp_ms,value\n" + "\n".join(rows) + "\n")
    return path


def test_extract_ted_from_series(tmp_path, step_series, capsys):
    out = tmp_path / "ted.csv"
    code = main(["extract-ted", "--series", str(step_series), "--threshold", "5", "--out", str(out),
                 "--window-start-ms", str(WINDOW_START_MS), "--window-end-ms", str(WINDOW_START_MS + 10_000)])
    assert code == 0
    result = _output(capsys)
    assert (result["records"], result["censored"], result["covariates"]) == (2, 0, [])
    table = read_ted(out)
    assert table.starts.tolist() == [WINDOW_START_MS + 1000, WINDOW_START_MS + 4000]
    assert table.taus.tolist() == [2000.0, 1000.0]
    assert table.censored.tolist() == [False, False]
    assert table.triggers == ("cancel_or_other", "cancel_or_other")


def test_extract_ted_window_defaults_from_settings(tmp_path, step_series, capsys, monkeypatch):
    monkeypatch.setattr(settings, "window_start_ms", WINDOW_START_MS)
    monkeypatch.setattr(settings, "window_end_ms", WINDOW_START_MS + 4500)
    out = tmp_path / "ted.csv"
    assert main(["extract-ted", "--series", str(step_series), "--threshold", "5", "--out", str(out)]) == 0
    assert _output(capsys)["censored"] == 1
    table = read_ted(out)
    assert table.starts.tolist() == [WINDOW_START_MS + 1000, WINDOW_START_MS + 4000]
    assert table.taus.tolist() == [2000.0, 500.0]
    assert table.censored.tolist() == [False, True]
