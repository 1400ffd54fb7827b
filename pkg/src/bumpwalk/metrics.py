"""Run metrics recomputed from a telemetry CSV alone, and run-to-run comparison."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

TOUCHDOWN_FORCE = 5.0  # N
IMPACT_WINDOW = 0.05  # s
SETTLE_ANGLE = math.radians(2.0)


class TelemetryError(ValueError):
    pass


@dataclass
class Telemetry:
    header: dict
    columns: tuple[str, ...]
    data: dict[str, np.ndarray]

    @property
    def n_rows(self) -> int:
        return len(self.data["t"]) if self.columns else 0

    @property
    def schema(self) -> str:
        return self.header.get("schema", "")

    @property
    def dt(self) -> float:
        return 1.0 / float(self.header.get("rate_hz", 200.0))

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[name]
        except KeyError:
            raise TelemetryError(f"missing column {name!r}") from None


def read_telemetry(path) -> Telemetry:
    """Parse the ``# key: value`` header lines and the numeric body."""
    header: dict = {}
    columns: tuple[str, ...] = ()
    rows: list[list[str]] = []
    with Path(path).open(newline="") as fh:
        for line in fh:
            if not line.startswith("#"):
                columns = tuple(line.strip().split(","))
                break
            key, _, value = line[1:].strip().partition(": ")
            if key == "schema":
                header[key] = value
            else:
                try:
                    header[key] = json.loads(value)
                except json.JSONDecodeError as exc:
                    raise TelemetryError(f"bad header line {line.strip()!r}") from exc
        rows = list(csv.reader(fh))
    if not columns or columns == ("",):
        raise TelemetryError(f"{path}: no column row")
    data: dict[str, np.ndarray] = {}
    for j, name in enumerate(columns):
        values = [r[j] for r in rows]
        data[name] = np.array(values) if name == "mode" else np.array(values, dtype=float)
    return Telemetry(header, columns, data)


@dataclass
class SettleEpisode:
    side: str
    patch: int
    t_start: float
    duration: float
    settle_time: float | None  # None: never stayed below the threshold
    peak_error_deg: float


@dataclass
class RunMetrics:
    scenario: str
    n_steps: int
    touchdown_time: list = field(default_factory=list)
    peak_fz: list = field(default_factory=list)
    impulse: list = field(default_factory=list)
    max_dz: list = field(default_factory=list)
    max_du: list = field(default_factory=list)
    max_dtheta: list = field(default_factory=list)
    settle: list = field(default_factory=list)
    mean_speed: float = math.nan
    zmp_rms: float = math.nan

    def to_dict(self) -> dict:
        return _json_safe(asdict(self))


def _json_safe(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _swing_tag(mode: str) -> str | None:
    return {"SSL": "r", "SSR": "l"}.get(mode)


def _touchdowns(tel: Telemetry, n_steps: int):
    """Per step: (time, peak F_z over the first 50 ms, impulse) of the swing foot's landing.

    The search window runs from mid-swing through the following double
    support; the touchdown tick is the first one whose per-substep peak
    force crosses ``TOUCHDOWN_FORCE`` from below.
    """
    step, mode, s, t = tel["step"], tel["mode"], tel["s"], tel["t"]
    dt = tel.dt
    n_win = max(1, int(round(IMPACT_WINDOW / dt)))
    out = []
    for k in range(n_steps):
        swing_rows = np.flatnonzero((step == k) & (mode != "DS"))
        if swing_rows.size == 0:
            out.append((math.nan, math.nan, math.nan))
            continue
        tag = _swing_tag(mode[swing_rows[0]])
        start = swing_rows[np.searchsorted(s[swing_rows], 0.5)] if s[swing_rows[-1]] >= 0.5 else swing_rows[-1]
        after = np.flatnonzero((step == k + 1) & (mode == "DS"))
        stop = (after[-1] if after.size else swing_rows[-1]) + 1
        peak_f = tel[f"{tag}_fz_peak"]
        hit = None
        for i in range(max(start, 1), stop):
            if peak_f[i] >= TOUCHDOWN_FORCE and peak_f[i - 1] < TOUCHDOWN_FORCE:
                hit = i
                break
        if hit is None:
            out.append((math.nan, math.nan, math.nan))
            continue
        seg = slice(hit, min(hit + n_win, tel.n_rows))
        out.append((
            float(t[hit]),
            float(np.max(peak_f[seg])),
            float(np.sum(tel[f"{tag}_fz"][seg]) * dt),
        ))
    return out


def _per_step_max(tel: Telemetry, n_steps: int, columns) -> list:
    step = tel["step"]
    stacked = np.abs(np.vstack([tel[c] for c in columns]))
    out = []
    for k in range(n_steps):
        rows = step == k
        out.append(float(stacked[:, rows].max()) if rows.any() else math.nan)
    return out


def _settle_episodes(tel: Telemetry) -> list[SettleEpisode]:
    """Episodes of a loaded foot fully on one patch, and when its pitch estimate settled."""
    t, dt = tel["t"], tel.dt
    episodes = []
    for tag in ("l", "r"):
        patch = tel[f"{tag}_patch_full"].astype(int)
        loaded = tel[f"{tag}_fz_peak"] >= TOUCHDOWN_FORCE
        err = np.abs(tel[f"{tag}_alpha_pitch"])
        on = (patch >= 0) & loaded
        i, n = 0, tel.n_rows
        while i < n:
            if not on[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and on[j + 1] and patch[j + 1] == patch[i]:
                j += 1
            seg = err[i:j + 1]
            above = np.flatnonzero(seg >= SETTLE_ANGLE)
            if above.size == 0:
                settle = 0.0
            elif above[-1] == seg.size - 1:
                settle = None
            else:
                settle = float(t[i + above[-1] + 1] - t[i])
            episodes.append(SettleEpisode(
                side=tag, patch=int(patch[i]), t_start=float(t[i]),
                duration=float(t[j] - t[i] + dt), settle_time=settle,
                peak_error_deg=float(np.degrees(seg.max())),
            ))
            i = j + 1
    episodes.sort(key=lambda e: (e.t_start, e.side))
    return episodes


def _mean_speed(tel: Telemetry, n_steps: int) -> float:
    """Forward CoM speed between the start of step 1 and the start of step n-1."""
    step, t, x = tel["step"], tel["t"], tel["com_x"]
    first = np.flatnonzero(step == 1)
    last = np.flatnonzero(step == n_steps - 1)
    if n_steps < 3 or first.size == 0 or last.size == 0:
        return math.nan
    i, j = first[0], last[0]
    return float((x[j] - x[i]) / (t[j] - t[i]))


def compute_metrics(source) -> RunMetrics:
    tel = source if isinstance(source, Telemetry) else read_telemetry(source)
    if tel.n_rows == 0:
        raise TelemetryError("no samples")
    n_steps = int(tel.header.get("n_steps", int(tel["step"].max())))
    tds = _touchdowns(tel, n_steps)
    valid = tel["zmp_valid"] > 0
    dzmp = np.hypot(tel["zmp_d_x"] - tel["zmp_m_x"], tel["zmp_d_y"] - tel["zmp_m_y"])[valid]
    return RunMetrics(
        scenario=str(tel.header.get("scenario", "")),
        n_steps=n_steps,
        touchdown_time=[td[0] for td in tds],
        peak_fz=[td[1] for td in tds],
        impulse=[td[2] for td in tds],
        max_dz=_per_step_max(tel, n_steps, ["dz"]),
        max_du=_per_step_max(tel, n_steps, ["l_du", "r_du"]),
        max_dtheta=_per_step_max(
            tel, n_steps, ["l_dth_pitch", "l_dth_roll", "r_dth_pitch", "r_dth_roll"]
        ),
        settle=[asdict(e) for e in _settle_episodes(tel)],
        mean_speed=_mean_speed(tel, n_steps),
        zmp_rms=float(np.sqrt(np.mean(dzmp ** 2))) if dzmp.size else math.nan,
    )


def write_metrics(metrics: RunMetrics, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


# -- comparison -----------------------------------------------------------------

PER_STEP = ("peak_fz", "impulse", "max_dz", "max_du", "max_dtheta")
AGGREGATE = ("mean_speed", "zmp_rms")


def _diff(a: float, b: float) -> float:
    if math.isnan(a) and math.isnan(b):
        return 0.0
    return b - a


@dataclass
class MetricsDiff:
    """``b - a`` for every metric."""

    scenario: str
    a: RunMetrics
    b: RunMetrics
    per_step: dict
    aggregate: dict

    def to_dict(self) -> dict:
        return _json_safe({
            "scenario": self.scenario,
            "per_step": self.per_step,
            "aggregate": self.aggregate,
        })

    def format_table(self) -> str:
        lines = [f"scenario {self.scenario}: diff = b - a"]
        head = f"{'step':>4}" + "".join(f"{name:>14}" for name in PER_STEP)
        lines.append(head)
        n = len(self.per_step[PER_STEP[0]])
        for k in range(n):
            lines.append(f"{k:>4}" + "".join(f"{self.per_step[m][k]:>+14.4g}" for m in PER_STEP))
        for name in AGGREGATE:
            lines.append(f"{name}: {getattr(self.a, name):.6g} -> {getattr(self.b, name):.6g} "
                         f"({self.aggregate[name]:+.4g})")
        return "\n".join(lines)


def check_compatible(a: Telemetry, b: Telemetry) -> None:
    if a.schema != b.schema:
        raise TelemetryError(f"schema mismatch: {a.schema!r} vs {b.schema!r}")
    for i, (ca, cb) in enumerate(zip(a.columns, b.columns)):
        if ca != cb:
            raise TelemetryError(f"schema mismatch at column {i}: {ca!r} vs {cb!r}")
    if len(a.columns) != len(b.columns):
        longer = a.columns if len(a.columns) > len(b.columns) else b.columns
        raise TelemetryError(f"schema mismatch at column {min(len(a.columns), len(b.columns))}: "
                             f"{longer[min(len(a.columns), len(b.columns))]!r} missing on one side")
    sa, sb = a.header.get("scenario"), b.header.get("scenario")
    if sa != sb:
        raise TelemetryError(f"schema mismatch: scenario {sa!r} vs {sb!r}")
    if a.header.get("patches") != b.header.get("patches"):
        raise TelemetryError("schema mismatch: terrain patches differ")


def compare_runs(csv_a, csv_b) -> MetricsDiff:
    ta, tb = read_telemetry(csv_a), read_telemetry(csv_b)
    check_compatible(ta, tb)
    ma, mb = compute_metrics(ta), compute_metrics(tb)
    n = min(ma.n_steps, mb.n_steps)
    per_step = {
        name: [_diff(getattr(ma, name)[k], getattr(mb, name)[k]) for k in range(n)]
        for name in PER_STEP
    }
    aggregate = {name: _diff(getattr(ma, name), getattr(mb, name)) for name in AGGREGATE}
    return MetricsDiff(ma.scenario, ma, mb, per_step, aggregate)
