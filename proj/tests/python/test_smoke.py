import json
import math

import numpy as np
import pytest

import csa


def min_jerk(r):
    return 10 * r**3 - 15 * r**4 + 6 * r**5


def test_fit_and_rollout_reproduce_a_demo():
    t = np.linspace(0.0, 1.0, 1001)
    demo = np.stack([min_jerk(t), 0.2 + 0.1 * t], axis=1)
    model = csa.fit(demo, dt=0.001, names=["x", "y"])
    assert model["schema"] == "csa-dmp"
    roll = csa.rollout(model, tau=1.0, dt=0.001)
    pos = roll["positions"]
    assert pos.shape[1] == 2
    n = min(len(pos), len(demo))
    assert np.max(np.abs(pos[:n, 0] - demo[:n, 0])) < 0.02
    assert abs(pos[-1, 0] - 1.0) < 1e-3

    slow = csa.rollout(model, tau=2.0, dt=0.001)
    assert slow["time"][-1] == pytest.approx(2 * roll["time"][-1], rel=0.01)
    back = csa.rollout(model, tau=1.0, dt=0.001, backward=True)
    assert back["positions"][0, 0] == pytest.approx(1.0)


def test_fit_needs_dt_for_arrays():
    with pytest.raises(csa.ConfigError):
        csa.fit(np.zeros((10, 1)))


def test_correction_step_settles_at_u_over_k():
    dy, rate = np.zeros(1), np.zeros(1)
    for _ in range(3000):
        dy, rate = csa.step_correction(dy, rate, np.ones(1), k_c=100.0, dt=0.001)
    assert dy[0] == pytest.approx(0.01, abs=1e-9)


def test_execution_time_constant():
    assert csa.execution_time_constant(0.5, 3.0) == 1.0
    assert csa.execution_time_constant(-0.5, 1.0) == 2.0
    assert csa.execution_time_constant(-1.0, 2.0) == -1.0
    assert csa.execution_time_constant(-0.5, 2.0) is None


def test_surface_fit_eval_project():
    u = np.linspace(0, 1, 12)
    v = np.linspace(0, 1, 8)
    grid = np.array([[[0.3 * a, 0.2 * b, 0.01 * math.sin(3 * a)] for b in v] for a in u])
    surf, residual = csa.Surface.fit(grid, rows=6, cols=4)
    assert residual < 1e-3
    p = surf.point(0.4, 0.6)
    foot = surf.project(p)
    assert foot["u"] == pytest.approx(0.4, abs=1e-6)
    assert foot["v"] == pytest.approx(0.6, abs=1e-6)
    assert abs(np.linalg.norm(surf.normal(0.4, 0.6)) - 1.0) < 1e-12
    plane = surf.best_fit_plane()
    assert plane["input_rotation"].shape == (3, 3)
    again = csa.Surface(surf.to_json())
    assert np.array_equal(again.point(0.1, 0.9), surf.point(0.1, 0.9))


def test_input_time_counts_ticks():
    u = np.zeros((5000, 3))
    u[3000:, 0] = 0.5
    assert csa.input_time(u, dt=0.001) == 2000 * 0.001
    assert csa.input_time(u, dt=0.001, method="motion") == 0.001
    with pytest.raises(csa.ConfigError):
        csa.input_time(u, dt=0.001, method="sideways")


def test_task_run_record_and_replay(tmp_path):
    task = next(t for t in csa.task_files() if t["name"] == "task1_insertion")
    record = tmp_path / "t1.jsonl"
    res = csa.run(task["scenario"], task["user"], record=record)
    assert res["reached_end"]
    assert res["metrics"]["outcome"]["success"]

    tr = csa.read_trace(record)
    assert tr["complete"]
    assert len(tr["records"]) == res["ticks"]
    rec = tr["records"][len(tr["records"]) // 2]
    for a, b, c in zip(rec["x_cmd"], rec["x_n"], rec["dy"]):
        assert a == b + c

    m = csa.metrics(record)
    assert m["t_input_corrective"] == res["metrics"]["t_input_corrective"]

    scenario_file = tmp_path / "scenario.json"
    scenario_file.write_text(json.dumps(tr["header"]["scenario"]))
    replayed = csa.run(scenario_file, record, records=True)
    assert [r["x_cmd"] for r in replayed["trace"]["records"]] == [r["x_cmd"] for r in tr["records"]]

    nominal = csa.run(task["scenario"])
    assert not nominal["metrics"]["outcome"]["success"]


def test_bad_scenario_is_a_config_error():
    with pytest.raises(csa.ConfigError):
        csa.run({"schema": "csa-scenario", "version": 1, "segments": []})
