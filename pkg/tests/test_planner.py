import math

import numpy as np
import pytest

from bumpwalk.gait import LEFT, RIGHT, GaitParams, Mode
from bumpwalk.planner import (
    PLAN_COLUMNS,
    Segment,
    ZmpReference,
    compute_com_trajectory,
    compute_dcm_trajectory,
    plan_footsteps,
    plan_walk,
    swing_profile,
    write_plan_csv,
)

DT = 0.005


def near_switch(plan, width=2):
    mask = np.zeros(plan.n_samples, dtype=bool)
    for k in plan.mode_switch_ticks():
        mask[max(0, k - width):k + width + 1] = True
    return mask


# -- footholds ------------------------------------------------------------------

def test_single_step_foothold():
    plan = plan_footsteps(GaitParams(n_steps=1, step_length=0.25))
    (hold,) = plan.footholds
    assert hold.x - plan.start[hold.side].x == pytest.approx(0.25)


def test_four_steps_end_at_one_metre():
    plan = plan_footsteps(GaitParams(n_steps=4, step_length=0.25))
    assert plan.footholds[-1].x == pytest.approx(1.0)
    assert [h.side for h in plan.footholds] == [RIGHT, LEFT, RIGHT, LEFT]
    assert np.allclose(np.diff([h.x for h in plan.footholds]), 0.25)
    assert all(h.yaw == 0.0 for h in plan.footholds)


def test_stepping_in_place_stacks_footholds():
    plan = plan_footsteps(GaitParams(n_steps=4, step_length=0.0))
    for h in plan.footholds:
        assert (h.x, h.y) == (plan.start[h.side].x, plan.start[h.side].y)


def test_lateral_offset_is_half_hip_width():
    p = GaitParams(hip_width=0.3)
    plan = plan_footsteps(p)
    for h in plan.footholds:
        assert h.y == pytest.approx(0.15 if h.side == LEFT else -0.15)


# -- ZMP reference ------------------------------------------------------------------

def test_zmp_at_stance_centre_in_single_support(four_step_plan):
    plan = four_step_plan
    for seg in plan.zmp.segments:
        if seg.mode is Mode.DS:
            continue
        stance = plan.footsteps.stance_during(seg.step_index)
        rows = plan.zmp_ref[seg.k0:seg.k0 + seg.n]
        assert np.array_equal(rows, np.tile(stance.xy, (seg.n, 1)))
        assert np.array_equal(plan.ankle_pos[seg.k0:seg.k0 + seg.n, stance.side, :2],
                              np.tile(stance.xy, (seg.n, 1)))


def test_zmp_midway_through_double_support(four_step_plan):
    plan = four_step_plan
    seg = next(s for s in plan.zmp.segments if s.mode is Mode.DS and s.step_index == 2)
    mid = plan.zmp(seg.k0 * DT + 0.5 * seg.n * DT)
    assert np.allclose(mid, 0.5 * (seg.p0 + seg.p1), atol=1e-12)


def test_zmp_continuity_bound(four_step_plan):
    p = four_step_plan.params
    jumps = np.abs(np.diff(four_step_plan.zmp_ref, axis=0))
    assert jumps[:, 0].max() < p.step_length * DT / p.ds_duration + 1e-12
    assert jumps[:, 1].max() < p.hip_width * DT / p.ds_duration + 1e-12


def test_zmp_on_support_segment(four_step_plan):
    plan = four_step_plan
    for k in range(plan.n_samples):
        ph = plan.phase(k)
        left, right = plan.ankle_pos[k, LEFT, :2], plan.ankle_pos[k, RIGHT, :2]
        z = plan.zmp_ref[k]
        if ph.mode is Mode.DS:
            seg = right - left
            lam = (z - left) @ seg / (seg @ seg)
            assert -1e-9 <= lam <= 1 + 1e-9
            assert np.linalg.norm(left + lam * seg - z) < 1e-9


# -- DCM ----------------------------------------------------------------------------

def test_terminal_dcm_is_final_zmp(four_step_plan):
    plan = four_step_plan
    assert np.max(np.abs(plan.dcm[-1] - plan.zmp.segments[-1].p1)) <= 1e-12


def test_dcm_is_continuous_and_decays(four_step_plan):
    plan = four_step_plan
    d = plan.dcm_traj
    for i in range(1, len(plan.zmp.segments)):
        assert np.allclose(d.xi_start(i), d.xi_end[i - 1], atol=1e-12)
    gap = np.linalg.norm(plan.dcm - plan.zmp_ref, axis=1)
    assert np.isfinite(gap).all() and gap[-1] < 1e-12


def test_single_segment_exponential():
    p = GaitParams(com_height=9.81 / 3.8 ** 2)
    n = int(round(0.9 / DT))
    seg = Segment(0, n, np.zeros(2), np.zeros(2), Mode.SSL, 0)
    ref = ZmpReference((seg,), DT)
    dcm = compute_dcm_trajectory(ref, p, xi_final=np.array([0.1, 0.0]))
    assert dcm.xi_start(0)[0] == pytest.approx(0.1 * math.exp(-3.42), abs=1e-12)
    assert dcm.xi_start(0)[0] == pytest.approx(3.27e-3, abs=5e-6)
    t = np.arange(n + 1) * DT
    analytic = 0.1 * np.exp(3.8 * (t - 0.9))
    assert np.max(np.abs(dcm.sample()[:, 0] - analytic)) < 1e-9


def test_dcm_fixed_point():
    p = GaitParams()
    seg = Segment(0, 50, np.array([0.2, -0.1]), np.array([0.2, -0.1]), Mode.SSR, 0)
    dcm = compute_dcm_trajectory(ZmpReference((seg,), DT), p)
    assert np.array_equal(dcm.sample(), np.tile([0.2, -0.1], (51, 1)))


# -- CoM ----------------------------------------------------------------------------

def test_com_rests_on_constant_dcm():
    p = GaitParams()
    seg = Segment(0, 100, np.array([0.3, 0.0]), np.array([0.3, 0.0]), Mode.DS, 0)
    dcm = compute_dcm_trajectory(ZmpReference((seg,), DT), p)
    pos, vel = compute_com_trajectory(dcm, p, com0=np.array([0.3, 0.0]))
    assert np.allclose(pos, [0.3, 0.0], atol=0, rtol=0)
    assert np.max(np.abs(vel)) == 0.0


def test_com_first_order_response():
    p = GaitParams()
    c = np.array([0.1, 0.05])
    seg = Segment(0, 200, c, c, Mode.DS, 0)
    dcm = compute_dcm_trajectory(ZmpReference((seg,), DT), p)
    x0 = np.array([0.0, 0.0])
    pos, _ = compute_com_trajectory(dcm, p, com0=x0)
    t = (np.arange(201) * DT)[:, None]
    analytic = c + (x0 - c) * np.exp(-p.omega * t)
    assert np.max(np.abs(pos - analytic)) < 1e-12


def test_com_dynamics_residual(four_step_plan):
    plan = four_step_plan
    w = plan.params.omega
    assert np.max(np.abs(plan.com_vel - w * (plan.dcm - plan.com_pos))) < 1e-9


def test_cart_table_matches_reference(four_step_plan):
    plan = four_step_plan
    p = plan.params
    x = plan.com_pos
    acc = np.zeros_like(x)
    acc[1:-1] = (x[2:] - 2 * x[1:-1] + x[:-2]) / DT ** 2
    zmp = x - p.com_height / p.gravity * acc
    keep = ~near_switch(plan)
    keep[[0, -1]] = False
    err = np.linalg.norm(zmp - plan.zmp_ref, axis=1)[keep]
    assert err.max() < 5e-3


def test_com_is_smooth_away_from_switches(four_step_plan):
    plan = four_step_plan
    v = np.diff(plan.com_pos, axis=0) / DT
    jump = np.linalg.norm(np.diff(v, axis=0), axis=1)
    assert np.max(jump) < 0.1  # bounded curvature everywhere
    assert np.max(np.linalg.norm(np.diff(plan.com_vel, axis=0), axis=1)) < 0.05


def test_mean_steady_speed(four_step_plan):
    plan = four_step_plan
    i, j = plan.step_start_tick(1), plan.step_start_tick(3)
    speed = (plan.com_pos[j, 0] - plan.com_pos[i, 0]) / ((j - i) * DT)
    assert speed == pytest.approx(0.278, rel=0.05)


# -- swing ----------------------------------------------------------------------

def test_swing_profile_boundaries_and_apex():
    apex = 0.04
    assert swing_profile(0.0, apex) == 0.0 and swing_profile(1.0, apex) == 0.0
    assert swing_profile(0.5, apex) == apex
    h = 1e-6
    assert abs(float(swing_profile(h, apex)) / h) < 1e-6
    assert abs(float(swing_profile(1 - h, apex)) / h) < 1e-6


def test_swing_midpoint_is_half_the_step(four_step_plan):
    plan = four_step_plan
    seg = next(s for s in plan.zmp.segments if s.mode is not Mode.DS and s.step_index == 0)
    swing = seg.mode.swing
    k = seg.k0 + seg.n // 2
    assert plan.phase(k).s == 0.5
    start_x = plan.footsteps.start[swing].x
    assert plan.ankle_pos[k, swing, 0] == pytest.approx(start_x + 0.125, abs=1e-12)
    assert plan.ankle_pos[k, swing, 2] == pytest.approx(plan.params.swing_apex_height, abs=1e-15)
    assert np.all(plan.ankle_rot == 0.0)


def test_swing_lands_on_foothold(four_step_plan):
    plan = four_step_plan
    for seg in plan.zmp.segments:
        if seg.mode is Mode.DS:
            continue
        end = seg.k0 + seg.n
        hold = plan.footsteps.footholds[seg.step_index]
        assert np.allclose(plan.ankle_pos[end, hold.side, :2], hold.xy)
        assert plan.ankle_pos[end, hold.side, 2] == 0.0


def test_plan_csv_dump(tmp_path, four_step_plan):
    path = write_plan_csv(four_step_plan, tmp_path / "plan.csv")
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(PLAN_COLUMNS)
    assert len(lines) == four_step_plan.n_samples + 1


def test_stepping_in_place_keeps_com_near_start():
    plan = plan_walk(GaitParams(step_length=0.0, n_steps=4))
    assert np.max(np.abs(plan.com_pos[:, 0])) < 1e-12
