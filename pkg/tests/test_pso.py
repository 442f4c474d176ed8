import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roundabout_ftc import pso
from roundabout_ftc.controllers import RangeError
from roundabout_ftc.fuzzy import TrapezoidMF, default_membership_set
from roundabout_ftc.sim import ConfigError


def test_dimension_and_bounds():
    b = pso.bounds()
    assert pso.N_DIM == 33 and b.shape == (33, 2)
    assert np.all(b[:, 0] == 0)
    # terms 7 and 8 (ET short/long), 1-based
    assert b[18:24, 1].tolist() == [7.5, 7.5, 15.0] * 2
    assert b[:3, 1].tolist() == [10, 10, 20] and b[-3:, 1].tolist() == [0.5, 0.5, 1.0]


def test_inertia_schedule():
    cfg = pso.SwarmConfig(iterations=101)
    assert pso.inertia(0, cfg) == 0.9
    assert pso.inertia(100, cfg) == pytest.approx(0.4)
    assert pso.inertia(50, cfg) == pytest.approx(0.65)


def particle(x, v, best):
    return pso.Particle(np.array(x, float), np.array(v, float), best_x=np.array(best, float))


BOX = np.array([[0.0, 10.0]] * 3)


def test_update_fixed_point():
    p = particle([1, 2, 3], [0, 0, 0], [1, 2, 3])
    pso.update_particle(p, np.array([1.0, 2, 3]), 0.9, 2, 2, np.random.default_rng(0), BOX)
    assert p.x.tolist() == [1, 2, 3] and p.v.tolist() == [0, 0, 0]


def test_update_cognitive_term_only():
    p = particle([1, 1, 1], [5, 5, 5], [4, 0, 2])
    ones = np.ones(3)
    pso.update_particle(p, np.zeros(3), 0.0, 2.0, 0.0, None, BOX, r1=ones, r2=ones)
    # V = 2 (pBest - X) = [6, -2, 2]; the middle component clamps at 0
    assert p.x.tolist() == [7, 0, 3] and p.v.tolist() == [6, 0, 2]


def test_update_hand_arithmetic():
    p = particle([1, 2, 3], [0.5, -0.5, 0], [2, 2, 2])
    g = np.array([3.0, 0.0, 2.0])
    r1 = np.array([0.5, 0.25, 1.0])
    r2 = np.array([0.1, 0.5, 0.5])
    pso.update_particle(p, g, 0.5, 2.0, 2.0, None, BOX, r1=r1, r2=r2)
    # v0 = .25 + 2(.5)(1) + 2(.1)(2) = 1.65
    # v1 = -.25 + 0 + 2(.5)(-2) = -2.25 -> x = -.25, clamped, v zeroed
    # v2 = 0 + 2(1)(-1) + 2(.5)(-1) = -3 -> x = 0, on the bound, kept
    np.testing.assert_allclose(p.x, [2.65, 0.0, 0.0])
    np.testing.assert_allclose(p.v, [1.65, 0.0, -3.0])


vectors = st.lists(st.floats(0, 1), min_size=33, max_size=33).map(
    lambda u: pso.bounds()[:, 1] * np.array(u))


@settings(max_examples=100)
@given(vectors)
def test_encode_decode_round_trip(v):
    assert np.array_equal(pso.encode(pso.decode_trapezoids(v)), v)
    assert np.array_equal(pso.encode_set(pso.decode(v)), v)


@settings(max_examples=30)
@given(vectors, st.floats(0, 20), st.floats(0, 100))
def test_every_vector_decodes_to_working_controller(v, ql, wt):
    m = pso.decode(v)
    assert 0 <= m.et_inference()(ql, wt) <= 15
    assert 0 <= m.ud_inference()(ql, wt) <= 1


def test_out_of_bounds_rejected():
    v = pso.bounds()[:, 1].copy()
    v[0] = 11.0
    with pytest.raises(RangeError):
        pso.decode(v)
    with pytest.raises(RangeError):
        pso.encode([TrapezoidMF(1, 1, 1)] * 3)
    with pytest.raises(RangeError):
        pso.encode_set(default_membership_set())   # hand-drawn shapes are not trapezoids


def test_fitness_arithmetic():
    assert pso.fitness_value(0, 100, 30.0) == pytest.approx(3e-7)
    assert pso.fitness_value(69, 6900, 0.0) == pytest.approx(0.01)
    assert pso.fitness_value(5, 0, 0.0) == 5.0


def test_config_validation():
    with pytest.raises(ConfigError):
        pso.SwarmConfig(particles=1)
    with pytest.raises(ConfigError):
        pso.SwarmConfig(w_start=0.3, w_end=0.4)
    with pytest.raises(ConfigError):
        pso.SwarmConfig.from_dict({"particles": 20, "colour": "blue"})
    cfg = pso.SwarmConfig(iterations=7, training=[("C2", 3, 900)])
    assert pso.SwarmConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_optimize_history_and_determinism():
    box = pso.bounds()
    target = 0.3 * box[:, 1]
    f = lambda x: float(np.sum((x - target) ** 2))
    cfg = pso.SwarmConfig(particles=6, iterations=30, seed=5)
    a = pso.optimize(f, cfg)
    b = pso.optimize(f, cfg)
    assert len(a.history) == 31
    assert np.all(np.diff(a.history) <= 0)
    assert a.history == b.history and np.array_equal(a.best_x, b.best_x)
    for p in a.particles:
        assert np.all((p.x >= box[:, 0]) & (p.x <= box[:, 1]))
        assert p.best_fit <= p.fit
    assert a.best_fit == min(p.best_fit for p in a.particles)


def test_default_set_fitness_anchor():
    # frozen from a seeded run; guards the simulator and controller chain
    cfg = pso.SwarmConfig(training=[("C6", 7, 5000)])
    fit = pso.evaluate_membership(default_membership_set(), pso.training_scenarios(cfg), cfg)
    assert fit == pytest.approx(7.002291984997917e-08, rel=1e-12)


def test_traffic_fitness_uses_common_random_numbers():
    cfg = pso.SwarmConfig(training=[("C5", 1, 1500)])
    f = pso.TrafficFitness(cfg)
    v = pso.bounds()[:, 1] * 0.5
    assert f(v) == f(v) == pso.fitness(v, cfg)


def test_history_and_manifest_files(tmp_path):
    pso.save_history(tmp_path / "h.csv", [3.0, 2.0, 2.0])
    assert (tmp_path / "h.csv").read_text().splitlines() == [
        "iteration,gbest_fitness", "0,3.0", "1,2.0", "2,2.0"]
    pso.save_manifest(tmp_path / "m.json", pso.SwarmConfig(), {"best_fitness": 1.0})
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["swarm"]["particles"] == 20 and doc["best_fitness"] == 1.0
