import json

import numpy as np
import pytest

import bumpwalk.harness as harness
from bumpwalk.cli import EXIT_CONFIG, EXIT_FAULT, EXIT_OK, main
from bumpwalk.config import load_config
from bumpwalk.harness import COLUMNS, SCHEMA, apply_overrides, run_scenario, simulate
from bumpwalk.metrics import TelemetryError, compare_runs, compute_metrics, read_telemetry
from bumpwalk.plant import PlantFault
from bumpwalk.plots import emit_overlay, emit_plots

SHORT = """scenario = "flat_1kmh"
seed = 3
[gait]
n_steps = 3
initial_hold = 0.2
final_hold = 0.2
[control]
gain_set = "calibrated"
[plant]
deflection = 0.005
"""


@pytest.fixture(scope="module")
def short_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "short.toml"
    path.write_text(SHORT)
    return path


@pytest.fixture(scope="module")
def short_runs(short_config, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    sc = load_config(short_config)
    on, m_on = run_scenario(sc, out, name="on", plots=False)
    off, m_off = run_scenario(apply_overrides(sc, disable=["bump"]), out, name="off", plots=False)
    return out, on, off, m_on, m_off


def test_csv_header_and_shape(short_runs):
    _, on, _, _, _ = short_runs
    tel = read_telemetry(on.csv_path)
    assert tel.schema == SCHEMA
    assert tel.columns == COLUMNS
    assert tel.header["scenario"] == "flat_1kmh" and tel.header["seed"] == 3
    assert tel.header["layer_bump"] is True
    assert tel.n_rows == on.n_ticks
    assert np.all(np.diff(tel["t"]) > 0)


def test_same_seed_same_bytes(short_config, short_runs, tmp_path):
    _, on, _, _, _ = short_runs
    again = simulate(load_config(short_config), tmp_path / "again.csv")
    assert again.csv_path.read_bytes() == on.csv_path.read_bytes()


def test_metrics_recompute_from_csv(short_runs):
    out, on, _, m_on, _ = short_runs
    stored = json.loads((out / "on_metrics.json").read_text())
    assert compute_metrics(on.csv_path).to_dict() == stored
    assert stored == m_on.to_dict()
    assert len(stored["peak_fz"]) == 3


def test_bump_layer_softens_landings(short_runs):
    *_, m_on, m_off = short_runs
    for k in range(1, 3):
        assert m_on.peak_fz[k] < m_off.peak_fz[k]


def test_compare_identical_is_zero(short_runs):
    _, on, _, _, _ = short_runs
    diff = compare_runs(on.csv_path, on.csv_path)
    assert all(v == 0.0 for vals in diff.per_step.values() for v in vals)
    assert all(v == 0.0 for v in diff.aggregate.values())
    assert "diff = b - a" in diff.format_table()


def test_compare_on_off(short_runs):
    _, on, off, _, _ = short_runs
    diff = compare_runs(off.csv_path, on.csv_path)
    assert all(d < 0 for d in diff.per_step["peak_fz"][1:])
    json.dumps(diff.to_dict())


def test_compare_rejects_other_scenario(short_runs, tmp_path):
    _, on, _, _, _ = short_runs
    text = on.csv_path.read_text().replace('# scenario: "flat_1kmh"', '# scenario: "step_in_place"')
    other = tmp_path / "other.csv"
    other.write_text(text)
    with pytest.raises(TelemetryError, match="scenario"):
        compare_runs(on.csv_path, other)


def test_compare_names_first_differing_column(short_runs, tmp_path):
    _, on, _, _, _ = short_runs
    lines = on.csv_path.read_text().splitlines(keepends=True)
    i = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    lines[i] = lines[i].replace("com_d_x", "com_des_x")
    other = tmp_path / "renamed.csv"
    other.write_text("".join(lines))
    with pytest.raises(TelemetryError, match="column 4"):
        compare_runs(on.csv_path, other)


def test_plots_written(short_runs, tmp_path):
    _, on, off, _, _ = short_runs
    paths = emit_plots(on.csv_path, tmp_path)
    assert sorted(p.name for p in paths) == sorted(
        f"on_{k}.png" for k in ("forces", "bump", "pitch", "roll")
    )
    assert all(p.stat().st_size > 0 for p in paths)
    overlay = emit_overlay(on.csv_path, off.csv_path, tmp_path / "overlay.png")
    assert overlay.exists()


def test_overlay_legend_labels(short_runs):
    from bumpwalk.plots import _run_label

    _, on, off, _, _ = short_runs
    assert _run_label(read_telemetry(on.csv_path), "a") == "on"
    assert _run_label(read_telemetry(off.csv_path), "b") == "off"


def test_plot_errors(short_runs, tmp_path):
    _, on, _, _, _ = short_runs
    header = [line for line in on.csv_path.read_text().splitlines(keepends=True)
              if line.startswith("#")]
    empty = tmp_path / "empty.csv"
    empty.write_text("".join(header) + ",".join(COLUMNS) + "\n")
    with pytest.raises(TelemetryError, match="no samples"):
        emit_plots(empty)
    with pytest.raises(TelemetryError, match="no samples"):
        compute_metrics(empty)
    partial = tmp_path / "partial.csv"
    partial.write_text("t,step\n0.0,0\n0.005,0\n")
    with pytest.raises(TelemetryError, match="missing columns"):
        emit_plots(partial, tmp_path)


def test_fault_keeps_rows_and_reports_tick(short_config, tmp_path, monkeypatch):
    real = harness.step_plant
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] > 50:
            raise PlantFault("contact blew up")
        return real(*args, **kwargs)

    monkeypatch.setattr(harness, "step_plant", flaky)
    result = simulate(load_config(short_config), tmp_path / "fault.csv")
    assert result.fault is not None and result.fault.tick == 10
    assert read_telemetry(result.csv_path).n_rows == 10


# -- command line -------------------------------------------------------------------

def test_cli_run_compare_plot(short_config, tmp_path, capsys):
    out = tmp_path / "cli"
    assert main(["run", str(short_config), "--out", str(out), "--name", "a", "--no-plots"]) == EXIT_OK
    assert main(["run", str(short_config), "--out", str(out), "--name", "b",
                 "--disable", "bump", "--seed", "4"]) == EXIT_OK
    assert (out / "b_forces.png").exists() and (out / "a_metrics.json").exists()
    assert read_telemetry(out / "b.csv").header["seed"] == 4
    capsys.readouterr()
    assert main(["compare", str(out / "a.csv"), str(out / "b.csv"), "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert set(data["per_step"]) >= {"peak_fz", "impulse"}
    assert main(["plot", str(out / "a.csv"), "--overlay", str(out / "b.csv"),
                 "--out", str(tmp_path / "figs")]) == EXIT_OK
    assert main(["plot", str(out / "a.csv"), "--out", str(tmp_path / "figs")]) == EXIT_OK
    assert len(list((tmp_path / "figs").glob("*.png"))) == 5


def test_cli_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('scenario = "flat_1kmh"\n[gait]\ndouble_support_fraction = 1.2\n')
    assert main(["run", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "double_support_fraction" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert main(["compare", str(tmp_path / "x.csv"), str(tmp_path / "y.csv")]) == EXIT_CONFIG


def test_cli_fault_exit_code(short_config, tmp_path, monkeypatch, capsys):
    def broken(*args, **kwargs):
        raise PlantFault("plant state diverged")

    monkeypatch.setattr(harness, "step_plant", broken)
    code = main(["run", str(short_config), "--out", str(tmp_path), "--no-plots"])
    assert code == EXIT_FAULT
    assert "plant fault at tick 0" in capsys.readouterr().err


def test_unknown_layer_rejected(short_config):
    with pytest.raises(SystemExit):
        main(["run", str(short_config), "--disable", "gravity"])


def test_orientation_layer_is_what_aligns_the_sole(configs_dir, tmp_path):
    sc = apply_overrides(load_config(configs_dir / "inclined_obstacles.toml"), disable=["orientation"])
    result = simulate(sc, tmp_path / "no_orientation.csv")
    steep = [e for e in compute_metrics(result.csv_path).settle if e["patch"] == 1]
    assert steep and all(e["settle_time"] is None for e in steep)
    assert max(e["peak_error_deg"] for e in steep) > 10.0
