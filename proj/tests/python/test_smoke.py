"""Smoke tests for the python bindings; the heavy numerics live in the C++
suites, these only check that the operations round-trip through python."""

import math
import os

import numpy as np
import pytest

import panocnav as pn

SCENARIO_DIR = os.environ.get(
    "PANOCNAV_SCENARIO_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "scenarios"),
)


def scenario(name):
    return os.path.join(SCENARIO_DIR, name)


def test_parse_and_eval():
    e = pn.parse_constraint("1 - x^2 - y^2")
    assert e.eval(0.0, 0.0) == pytest.approx(1.0)
    assert e.eval(2.0, 0.0) == pytest.approx(-3.0)
    dx, dy = e.grad(0.5, 0.0)
    assert dx == pytest.approx(-1.0)
    assert dy == pytest.approx(0.0)
    with pytest.raises(pn.ExprParseError):
        pn.parse_constraint("1 + q")


def test_obstacle_psi_and_penalty():
    half_disc = pn.ObstacleSpec(["x^2 + y^2 - 1", "4 - x^2 - y^2", "x"])
    assert half_disc.psi(1.5, 0.0) == pytest.approx(3.28125)
    assert half_disc.psi(-1.0, 0.0) == 0.0

    disc = pn.ObstacleSpec(["1 - x^2 - y^2"], enlargement=0.2)
    assert disc.psi(1.15, 0.0) > 0.0  # enlarged radius 1.2
    assert disc.psi(1.25, 0.0) == 0.0
    assert disc.psi_true(1.05, 0.0) == 0.0

    value, gx, gy = disc.penalty(0.5, 0.0, 1.0)
    assert value > 0.0
    assert gx < 0.0


def test_rk4_straight_line():
    model = pn.VehicleModel("bicycle", 1.0)
    q = pn.rk4_step(model, pn.VehicleState(0, 0, 0), np.array([1.0, 0.0]), 0.1)
    assert q.x == pytest.approx(0.1, abs=1e-15)
    assert q.y == 0.0

    states = pn.rollout(model, pn.VehicleState(0, 0, 0), np.tile([1.0, 0.0], 3), 0.1)
    assert states.shape == (4, 3)
    assert states[-1, 0] == pytest.approx(0.3, abs=1e-12)


def test_objective_gradient_matches_numpy_fd():
    sc = pn.load_scenario(scenario("crescent.scn"))
    spec = sc.make_problem()
    spec.horizon = 8
    mu = np.full((1, 8), 50.0)
    rng = np.random.default_rng(5)
    u = rng.uniform(-2.0, 2.0, 16)
    value, grad = pn.eval_objective_gradient(spec, mu, u)
    assert value == pytest.approx(pn.eval_objective(spec, mu, u))
    h = 1e-6
    for j in range(16):
        up, um = u.copy(), u.copy()
        up[j] += h
        um[j] -= h
        fd = (pn.eval_objective(spec, mu, up) - pn.eval_objective(spec, mu, um)) / (2 * h)
        assert grad[j] == pytest.approx(fd, rel=1e-4, abs=1e-6)


def test_panoc_with_python_callback():
    target = np.array([3.0, -2.0])

    def objective(u):
        d = u - target
        return float(0.5 * d @ d), d

    u, report = pn.panoc_solve(
        objective, np.array([-1.0, -1.0]), np.array([1.0, 1.0]),
        np.zeros(2), tolerance=1e-9,
    )
    assert report.status == "converged"
    assert u == pytest.approx([1.0, -1.0], abs=1e-6)
    assert report.fbe_descent_violations == 0


def test_scenario_and_penalty_solve():
    sc = pn.load_scenario(scenario("crescent.scn"))
    assert sc.ts == pytest.approx(0.03)
    assert sc.horizon == 50
    assert sc.start.y == pytest.approx(0.3)
    out = pn.penalty_solve(sc.make_problem(), sc.solver)
    assert out.status == "feasible"
    assert out.max_violation <= sc.solver.eta_star
    assert out.mu.shape == (1, 50)
    with pytest.raises(pn.ScenarioLoadError):
        pn.load_scenario(scenario("missing.scn"))


def test_grid_search():
    sc = pn.load_scenario(scenario("half_disc.scn"))
    occupancy, path, waypoints = pn.grid_search(sc)
    assert occupancy.sum() > 0
    assert len(path) > 0
    sx, sy = path[0]
    gx, gy = path[-1]
    assert math.hypot(sx - gx, sy - gy) > 10  # start and goal cells far apart


def test_short_mission():
    sc = pn.load_scenario(scenario("cross.scn"))
    log = pn.run_mission(sc)
    assert log.status == "reached"
    assert max(log.max_psi_true) == 0.0
    assert log.states.shape[1] == 3
    assert log.closed_loop_cost > 0.0
