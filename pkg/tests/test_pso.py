import itertools
import math

import numpy as np
import pytest

from fires.channel import correlation_matrix, synthesize_channel
from fires.geometry import (
    Placement,
    partition_surface,
    placement_in_subareas,
    preset_grid,
    spacing_violations,
    subarea_bounds,
)
from fires.pso import (
    PsoConfig,
    brute_force_oracle,
    fitness,
    init_swarm,
    optimize,
    penalty_power,
    repair_spacing,
    update_position,
    update_velocity,
)
from fires.rate import evaluate, split_and_rates
from helpers import WL, default_links

P, S2 = 10.0, 1e-12


class OnesRng:
    """Stand-in generator whose uniform draws are all 1."""

    def random(self, size=None):
        return np.ones(size) if size is not None else 1.0


def tiny_instance(seed=0, d_min=None):
    geom = partition_surface(2.0, 2.0, 2, WL, n_h=3, n_v=3, grid=(2, 1), d_min=d_min)
    corr = correlation_matrix(geom)
    real = synthesize_channel(geom, *default_links(), rng=np.random.default_rng(seed), corr=corr)
    return geom, real


class TestUpdates:
    def test_velocity_vanishes_without_terms(self):
        cfg = PsoConfig(w=0.0, c1=0.0, c2=0.0)
        v = update_velocity(1.0, 0.5, 1.0, 2.0, cfg, np.random.default_rng(0))
        assert v == 0.0

    def test_stationary_at_optimum(self):
        cfg = PsoConfig()
        v = update_velocity(0.0, 1.0, 1.0, 1.0, cfg, np.random.default_rng(0))
        assert v == 0.0

    def test_scalar_arithmetic(self):
        cfg = PsoConfig(w=0.4, c1=0.5, c2=0.5)
        v = update_velocity(1.0, 0.0, 1.0, 2.0, cfg, OnesRng())
        assert np.isclose(float(v), 1.9)

    def test_position_identity_with_zero_velocity(self):
        geom, _ = tiny_instance()
        pos = np.array([[0.5, 0.5], [1.5, 0.5]])
        assert np.allclose(update_position(pos, np.zeros_like(pos), geom), pos)

    def test_position_clamps_to_boundary(self):
        geom, _ = tiny_instance()
        pos = np.array([[0.9, 0.5], [1.5, 0.5]])
        vel = np.array([[0.5, 0.0], [0.0, 0.0]])  # would exit subarea 1 at x=1
        moved = update_position(pos, vel, geom)
        assert np.allclose(moved[0], [1.0, 0.5])

    def test_interior_move_is_plain_addition(self):
        geom, _ = tiny_instance()
        pos = np.array([[0.10, 0.5], [1.5, 0.5]])
        vel = np.array([[0.05, 0.0], [0.0, 0.0]])
        assert np.allclose(update_position(pos, vel, geom)[0, 0], 0.15)


class TestPenalty:
    def test_budget_boundary(self):
        assert penalty_power(0.6, 0.4, 1.0) == 0.0

    def test_excess(self):
        assert np.isclose(penalty_power(0.9, 0.6, 1.0), 0.5)

    def test_idle(self):
        assert penalty_power(0.0, 0.0, 1.0) == 0.0


class TestInit:
    def test_particles_start_inside_subareas(self):
        geom, _ = tiny_instance()
        cfg = PsoConfig(n_particles=50)
        state = init_swarm(geom, cfg, np.random.default_rng(1))
        assert state.positions.shape == (50, 2, 2)
        for m in (1, 2):
            x_lo, y_lo, x_hi, y_hi = subarea_bounds(geom, m)
            xs, ys = state.positions[:, m - 1, 0], state.positions[:, m - 1, 1]
            assert np.all((xs >= x_lo) & (xs <= x_hi))
            assert np.all((ys >= y_lo) & (ys <= y_hi))

    def test_same_seed_same_swarm(self):
        geom, _ = tiny_instance()
        cfg = PsoConfig(n_particles=7)
        a = init_swarm(geom, cfg, np.random.default_rng(9))
        b = init_swarm(geom, cfg, np.random.default_rng(9))
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.velocities, b.velocities)

    def test_velocity_scale(self):
        geom, _ = tiny_instance()
        state = init_swarm(geom, PsoConfig(n_particles=200), np.random.default_rng(2))
        assert np.all(np.abs(state.velocities[..., 0]) <= 0.1 * geom.subarea_w)
        assert np.all(np.abs(state.velocities[..., 1]) <= 0.1 * geom.subarea_h)


class TestFitness:
    def test_feasible_placement_fitness_is_effective_rate(self):
        geom, real = tiny_instance()
        pl = Placement(np.array([[0.5, 1.0], [1.5, 1.0]]))
        cfg = PsoConfig()
        assert fitness(pl, real, geom, P, S2, cfg) == pytest.approx(
            evaluate(real, pl, geom, P, S2).effective, abs=0
        )

    def test_violation_dominates(self):
        geom, real = tiny_instance(d_min=0.5)
        pl = Placement(np.array([[0.9, 1.0], [1.1, 1.0]]))  # 0.2 m apart
        cfg = PsoConfig(tau=1e6)
        eff = evaluate(real, pl, geom, P, S2).effective
        assert fitness(pl, real, geom, P, S2, cfg) <= eff - 1e6

    def test_sum_objective_switch(self):
        geom, real = tiny_instance()
        pl = Placement(np.array([[0.5, 1.0], [1.5, 1.0]]))
        from fires.channel import channel_at

        _, report = split_and_rates(*channel_at(real, pl, geom), P, S2)
        got = fitness(pl, real, geom, P, S2, PsoConfig(objective="sum"))
        assert got == pytest.approx(float(report.rate_r + report.rate_t), abs=0)


class TestOracle:
    def test_single_subarea_argmax(self):
        geom = partition_surface(1.0, 1.0, 1, WL, n_h=3, n_v=3)
        corr = correlation_matrix(geom)
        real = synthesize_channel(geom, *default_links(), rng=np.random.default_rng(3), corr=corr)
        pl, rate = brute_force_oracle(real, geom, P, S2)
        rates = [
            evaluate(real, Placement(preset_grid(geom, 1)[k : k + 1]), geom, P, S2).effective
            for k in range(9)
        ]
        assert np.isclose(rate, max(rates), rtol=1e-12)

    def test_matches_exhaustive_reference(self):
        geom, real = tiny_instance(seed=5)
        pl, rate = brute_force_oracle(real, geom, P, S2)
        # independent reference: plain double loop over all 81 combos
        best = -1.0
        for a, b in itertools.product(preset_grid(geom, 1), preset_grid(geom, 2)):
            if math.dist(a, b) < geom.d_min:
                continue
            cand = evaluate(real, Placement(np.stack([a, b])), geom, P, S2).effective
            best = max(best, cand)
        assert np.isclose(rate, best, rtol=1e-12)
        assert placement_in_subareas(pl, geom)

    def test_cap_enforced(self):
        geom, real = tiny_instance()
        with pytest.raises(ValueError, match="cap"):
            brute_force_oracle(real, geom, P, S2, cap=10)


class TestOptimize:
    def test_history_nondecreasing_and_deterministic(self):
        geom, real = tiny_instance(seed=11)
        cfg = PsoConfig(n_particles=20, n_iterations=30, seed=4)
        pl_a, rep_a, hist_a = optimize(real, geom, cfg, P, S2)
        pl_b, rep_b, hist_b = optimize(real, geom, cfg, P, S2)
        assert np.array_equal(pl_a.positions, pl_b.positions)
        assert np.array_equal(hist_a, hist_b)
        assert rep_a.effective == rep_b.effective
        assert len(hist_a) == cfg.n_iterations + 1
        assert np.all(np.diff(hist_a) >= 0)

    def test_positions_stay_feasible(self):
        geom, real = tiny_instance(seed=12)
        cfg = PsoConfig(n_particles=15, n_iterations=25, seed=1)
        pl, _, _ = optimize(real, geom, cfg, P, S2)
        assert placement_in_subareas(pl, geom)

    def test_oracle_dominates_pso(self):
        geom, real = tiny_instance(seed=13)
        _, oracle_rate = brute_force_oracle(real, geom, P, S2)
        for seed in range(5):
            _, report, _ = optimize(
                real, geom, PsoConfig(n_particles=20, n_iterations=40, seed=seed), P, S2
            )
            assert report.effective <= oracle_rate + 1e-12

    def test_injection_lower_bounds_result(self):
        geom, real = tiny_instance(seed=14)
        anchor = Placement(np.array([[0.5, 1.0], [1.5, 1.0]]))
        anchor_rate = evaluate(real, anchor, geom, P, S2).effective
        _, report, _ = optimize(
            real, geom, PsoConfig(n_particles=10, n_iterations=5, seed=2), P, S2,
            initial_placements=[anchor],
        )
        assert report.effective >= anchor_rate - 1e-9

    def test_too_many_injections_rejected(self):
        geom, real = tiny_instance()
        anchors = [Placement(np.array([[0.5, 1.0], [1.5, 1.0]]))] * 3
        with pytest.raises(ValueError):
            optimize(real, geom, PsoConfig(n_particles=2, n_iterations=1), P, S2,
                     initial_placements=anchors)

    def test_spacing_respected_when_feasible_exists(self):
        # d_min = 1.0 rules out most of the space but feasible pairs exist
        geom, real = tiny_instance(seed=15, d_min=1.0)
        cfg = PsoConfig(n_particles=30, n_iterations=40, seed=3, tau=1e6)
        pl, _, _ = optimize(real, geom, cfg, P, S2)
        assert spacing_violations(pl, geom.d_min) == 0


class TestRepair:
    def test_repair_restores_spacing(self):
        geom, real = tiny_instance(seed=16, d_min=0.9)
        bad = np.array([[0.8, 1.0], [1.2, 1.0]])  # 0.4 m apart
        fixed = repair_spacing(bad, real, geom, P, S2)
        assert spacing_violations(Placement(fixed), geom.d_min) == 0
        assert np.array_equal(fixed[0], bad[0])  # first element never moves
        assert placement_in_subareas(Placement(fixed), geom)

    def test_repair_picks_best_feasible_preset(self):
        geom, real = tiny_instance(seed=17, d_min=0.9)
        bad = np.array([[0.8, 1.0], [1.2, 1.0]])
        fixed = repair_spacing(bad, real, geom, P, S2)
        got = evaluate(real, Placement(fixed), geom, P, S2).effective
        best = -1.0
        for cand in preset_grid(geom, 2):
            if math.dist(bad[0], cand) < geom.d_min:
                continue
            trial = np.stack([bad[0], cand])
            best = max(best, evaluate(real, Placement(trial), geom, P, S2).effective)
        assert np.isclose(got, best, rtol=1e-12)

    def test_impossible_spacing_falls_back_to_max_min_distance(self):
        geom, real = tiny_instance(seed=18, d_min=10.0)
        bad = np.array([[0.8, 1.0], [1.2, 1.0]])
        fixed = repair_spacing(bad, real, geom, P, S2)
        # the farthest preset of subarea 2 from the fixed element
        dists = [math.dist(bad[0], c) for c in preset_grid(geom, 2)]
        assert np.isclose(math.dist(bad[0], fixed[1]), max(dists))
