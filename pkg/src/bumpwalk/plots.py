"""Static PNG figures from telemetry CSVs (forces, bump distances, ankle pitch and roll)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import Telemetry, TelemetryError, read_telemetry  # noqa: E402

# figure kind -> (per-foot column drawn solid, column drawn dashed, y label);
# the angle figures show the commanded ankle angle against the sole-ground
# angle estimated from the bump sensors
FIGURES = {
    "forces": ("fz", "fzd", "F_z [N]"),
    "bump": ("d_avg", None, "bump distance [m]"),
    "pitch": ("pitch_cmd", "alpha_pitch", "pitch [rad]"),
    "roll": ("roll_cmd", "alpha_roll", "roll [rad]"),
}
_SIDES = (("l", "left"), ("r", "right"))
_SAVE = {"dpi": 100, "metadata": {"Software": None}}


def _load(csv) -> Telemetry:
    tel = read_telemetry(csv)
    if tel.n_rows == 0:
        raise TelemetryError("no samples")
    return tel


def _require(tel: Telemetry, names) -> None:
    missing = [n for n in names if n not in tel.data]
    if missing:
        raise TelemetryError(f"missing columns: {', '.join(missing)}")


def _shade_patches(ax, tel: Telemetry) -> None:
    for tag, _ in _SIDES:
        over = tel[f"{tag}_patch_over"] >= 0
        if over.any():
            ax.fill_between(tel["t"], 0, 1, where=over, transform=ax.get_xaxis_transform(),
                            color="0.85", linewidth=0, step="mid")


def _figure(tel: Telemetry, kind: str, title: str):
    solid, dashed, ylabel = FIGURES[kind]
    needed = [f"{tag}_{c}" for tag, _ in _SIDES for c in (solid, dashed) if c]
    _require(tel, ["t"] + needed)
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, (tag, side) in zip(axes, _SIDES):
        if kind in ("pitch", "roll"):
            _shade_patches(ax, tel)
        ax.plot(tel["t"], tel[f"{tag}_{solid}"], lw=1.0, label=f"{side} {solid}")
        if dashed:
            ax.plot(tel["t"], tel[f"{tag}_{dashed}"], "--", lw=1.0, label=f"{side} {dashed}")
        ax.set_ylabel(ylabel)
        ax.legend(loc="upper right", fontsize=8)
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("t [s]")
    axes[0].set_title(title)
    fig.tight_layout()
    return fig


def emit_plots(csv, out_dir=None) -> list[Path]:
    """Write the four figures next to the CSV (or into ``out_dir``); returns their paths."""
    tel = _load(csv)
    csv = Path(csv)
    stem = csv.stem
    out_dir = Path(out_dir) if out_dir is not None else csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    title = str(tel.header.get("scenario", stem))
    paths = []
    for kind in FIGURES:
        fig = _figure(tel, kind, f"{title}: {kind}")
        path = out_dir / f"{stem}_{kind}.png"
        fig.savefig(path, **_SAVE)
        plt.close(fig)
        paths.append(path)
    return paths


def _run_label(tel: Telemetry, fallback: str) -> str:
    flag = tel.header.get("layer_bump")
    return fallback if flag is None else ("on" if flag else "off")


def emit_overlay(csv_a, csv_b, out_path=None, kind: str = "forces") -> Path:
    """One figure with both runs' traces, labelled by their bump-layer flag."""
    if kind not in FIGURES:
        raise ValueError(f"unknown figure kind {kind!r}")
    ta, tb = _load(csv_a), _load(csv_b)
    la, lb = _run_label(ta, Path(csv_a).stem), _run_label(tb, Path(csv_b).stem)
    if la == lb:
        la, lb = Path(csv_a).stem, Path(csv_b).stem
    column = FIGURES[kind][0]
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, (tag, side) in zip(axes, _SIDES):
        for tel, label in ((ta, la), (tb, lb)):
            _require(tel, ["t", f"{tag}_{column}"])
            ax.plot(tel["t"], tel[f"{tag}_{column}"], lw=1.0, label=label)
        ax.set_ylabel(f"{side} {column}")
        ax.legend(loc="upper right", fontsize=8)
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("t [s]")
    axes[0].set_title(f"{ta.header.get('scenario', '')}: {kind} overlay")
    fig.tight_layout()
    if out_path is None:
        out_path = Path(csv_a).with_name(f"{Path(csv_a).stem}_vs_{Path(csv_b).stem}_{kind}.png")
    out_path = Path(out_path)
    fig.savefig(out_path, **_SAVE)
    plt.close(fig)
    return out_path
