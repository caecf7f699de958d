"""Penalty-based particle swarm search over element placements.

A particle encodes one full placement (all M element positions jointly).
Per-subarea clamping keeps every particle inside its feasible rectangles;
the minimum-spacing constraint is handled by a large additive penalty plus
a final repair pass, and the power-budget penalty is carried along even
though the equalizing energy split always meets the budget exactly.

A brute-force lattice enumerator doubles as the testing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .geometry import (
    Placement,
    SurfaceGeometry,
    clamp_to_subareas,
    preset_flat_indices,
    preset_grid,
    snap_to_subarea_presets,
    spacing_violations,
    subarea_corners,
)
from .rate import RateReport, evaluate, split_and_rates

_OBJECTIVES = ("min", "sum")


@dataclass(frozen=True)
class PsoConfig:
    """Swarm parameters: size, schedule, inertia/attraction weights, penalty."""

    n_particles: int = 50
    n_iterations: int = 100
    w: float = 0.4
    c1: float = 0.5
    c2: float = 0.5
    tau: float = 1e6
    seed: int = 0
    objective: str = "min"  # "min": max-min rate; "sum": summed rates

    def __post_init__(self):
        if self.n_particles < 1 or self.n_iterations < 1:
            raise ValueError("need at least one particle and one iteration")
        if self.w < 0 or self.c1 < 0 or self.c2 < 0:
            raise ValueError("inertia and attraction factors must be nonnegative")
        if self.tau <= 0:
            raise ValueError("penalty coefficient must be positive")
        if self.objective not in _OBJECTIVES:
            raise ValueError(f"objective must be one of {_OBJECTIVES}")


@dataclass(eq=False)
class SwarmState:
    """Mutable swarm bookkeeping; shapes are (n_particles, M, 2)."""

    positions: np.ndarray
    velocities: np.ndarray
    personal_best_pos: np.ndarray
    personal_best_fit: np.ndarray
    global_best_pos: np.ndarray
    global_best_fit: float
    history: list = field(default_factory=list)


def init_swarm(geom: SurfaceGeometry, cfg: PsoConfig, rng: np.random.Generator) -> SwarmState:
    """Uniform positions inside each subarea; small uniform velocities.

    Initial velocity spans +-10% of the subarea side per axis. Best trackers
    start empty (-inf) and are filled by the first fitness evaluation.
    """
    n, m = cfg.n_particles, geom.n_subareas
    lo, hi = subarea_corners(geom)
    positions = lo + rng.random((n, m, 2)) * (hi - lo)
    span = 0.1 * np.array([geom.subarea_w, geom.subarea_h])
    velocities = (2.0 * rng.random((n, m, 2)) - 1.0) * span
    return SwarmState(
        positions=positions,
        velocities=velocities,
        personal_best_pos=positions.copy(),
        personal_best_fit=np.full(n, -np.inf),
        global_best_pos=positions[0].copy(),
        global_best_fit=-np.inf,
    )


def update_velocity(v, pos, p_best, g_best, cfg: PsoConfig, rng: np.random.Generator):
    """Inertia plus cognitive and social attraction, with fresh uniform
    draws per coordinate."""
    pos = np.asarray(pos, dtype=float)
    r1 = rng.random(np.shape(pos))
    r2 = rng.random(np.shape(pos))
    return (
        cfg.w * np.asarray(v, dtype=float)
        + cfg.c1 * r1 * (np.asarray(p_best, dtype=float) - pos)
        + cfg.c2 * r2 * (np.asarray(g_best, dtype=float) - pos)
    )


def update_position(pos, v, geom: SurfaceGeometry) -> np.ndarray:
    """Move and clamp each element back into its own subarea."""
    return clamp_to_subareas(np.asarray(pos, dtype=float) + np.asarray(v, dtype=float), geom)


def penalty_power(p_r, p_t, p_total):
    """Excess of the combined user powers over the budget, floored at zero."""
    return np.maximum(0.0, np.asarray(p_r, dtype=float) + np.asarray(p_t, dtype=float) - p_total)


def _pair_violation_counts(positions: np.ndarray, d_min: float) -> np.ndarray:
    """Spacing-violation count per placement in a (n, M, 2) batch."""
    m = positions.shape[-2]
    if m < 2:
        return np.zeros(positions.shape[0], dtype=int)
    diff = positions[:, :, None, :] - positions[:, None, :, :]
    d2 = np.einsum("nijk,nijk->nij", diff, diff)
    iu, ju = np.triu_indices(m, k=1)
    return np.count_nonzero(d2[:, iu, ju] < d_min * d_min, axis=-1)


def _batch_scores(
    positions: np.ndarray,
    realization: ChannelRealization,
    geom: SurfaceGeometry,
    power: float,
    noise_power: float,
    cfg: PsoConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """(fitness, effective rate) for a (n, M, 2) batch of placements."""
    idx = snap_to_subarea_presets(positions, geom)
    config, report = split_and_rates(
        realization.h_f[idx], realization.h_r[idx], realization.h_t[idx], power, noise_power
    )
    base = report.effective if cfg.objective == "min" else report.rate_r + report.rate_t
    over_budget = penalty_power(
        np.asarray(config.beta_r) * power, np.asarray(config.beta_t) * power, power
    )
    violations = _pair_violation_counts(positions, geom.d_min)
    fitness_vals = base - cfg.tau * (over_budget + violations)
    return fitness_vals, report.effective


def fitness(
    placement: Placement,
    realization: ChannelRealization,
    geom: SurfaceGeometry,
    power: float,
    noise_power: float,
    cfg: PsoConfig,
) -> float:
    """Penalized objective of one placement: base rate term minus
    tau * (power excess + spacing violations)."""
    fit, _ = _batch_scores(
        placement.positions[None, :, :], realization, geom, power, noise_power, cfg
    )
    return float(fit[0])


def repair_spacing(
    positions: np.ndarray,
    realization: ChannelRealization,
    geom: SurfaceGeometry,
    power: float,
    noise_power: float,
) -> np.ndarray:
    """Re-place spacing offenders on their subarea lattices, front to back.

    Element m moves only if it sits closer than d_min to an already-fixed
    element; it then takes the spacing-feasible preset of its own subarea
    with the best effective rate (other elements held still), or, if no
    preset clears the spacing, the preset maximizing the worst pairwise
    distance. Ties resolve to the smaller flat index.
    """
    pos = np.asarray(positions, dtype=float).copy()
    d2min = geom.d_min**2
    for i in range(1, geom.n_subareas):
        fixed = pos[:i]
        if np.all(((pos[i] - fixed) ** 2).sum(axis=-1) >= d2min):
            continue
        block = preset_grid(geom, i + 1)  # ascending flat index
        dd = ((block[:, None, :] - fixed[None, :, :]) ** 2).sum(axis=-1)
        clear = np.all(dd >= d2min, axis=1)
        if clear.any():
            cands = block[clear]
            trials = np.repeat(pos[None, :, :], len(cands), axis=0)
            trials[:, i, :] = cands
            idx = snap_to_subarea_presets(trials, geom)
            _, report = split_and_rates(
                realization.h_f[idx], realization.h_r[idx], realization.h_t[idx],
                power, noise_power,
            )
            pos[i] = cands[int(np.argmax(report.effective))]
        else:
            pos[i] = block[int(np.argmax(dd.min(axis=1)))]
    return pos


def optimize(
    realization: ChannelRealization,
    geom: SurfaceGeometry,
    cfg: PsoConfig,
    power: float,
    noise_power: float,
    initial_placements: list[Placement] | None = None,
) -> tuple[Placement, RateReport, np.ndarray]:
    """Run the swarm and return (best placement, its rate report, history).

    history[k] is the best fitness seen after k iterations (entry 0 covers
    the initial swarm) and is nondecreasing. The run is fully determined by
    cfg.seed. `initial_placements` overwrite the leading particles, which
    lower-bounds the result by any injected candidate. If the best placement
    still violates spacing, a repair pass rebuilds it and the returned report
    reflects the repaired (possibly lower-rate) placement.
    """
    rng = np.random.default_rng(cfg.seed)
    state = init_swarm(geom, cfg, rng)
    if initial_placements:
        if len(initial_placements) > cfg.n_particles:
            raise ValueError("more injected placements than particles")
        for k, pl in enumerate(initial_placements):
            state.positions[k] = clamp_to_subareas(pl.positions, geom)
    v_max = np.array([geom.subarea_w, geom.subarea_h])

    def record_bests(fit: np.ndarray) -> None:
        improved = fit > state.personal_best_fit
        state.personal_best_pos[improved] = state.positions[improved]
        state.personal_best_fit[improved] = fit[improved]
        leader = int(np.argmax(fit))
        if fit[leader] > state.global_best_fit:
            state.global_best_fit = float(fit[leader])
            state.global_best_pos = state.positions[leader].copy()
        state.history.append(state.global_best_fit)

    fit, _ = _batch_scores(state.positions, realization, geom, power, noise_power, cfg)
    record_bests(fit)

    for _ in range(cfg.n_iterations):
        vel = update_velocity(
            state.velocities, state.positions, state.personal_best_pos,
            state.global_best_pos, cfg, rng,
        )
        state.velocities = np.clip(vel, -v_max, v_max)
        state.positions = update_position(state.positions, state.velocities, geom)
        fit, _ = _batch_scores(state.positions, realization, geom, power, noise_power, cfg)
        record_bests(fit)

    best = state.global_best_pos
    if spacing_violations(Placement(best), geom.d_min) > 0:
        best = repair_spacing(best, realization, geom, power, noise_power)
    placement = Placement(best)
    report = evaluate(realization, placement, geom, power, noise_power)
    return placement, report, np.asarray(state.history)


def brute_force_oracle(
    realization: ChannelRealization,
    geom: SurfaceGeometry,
    power: float,
    noise_power: float,
    cap: int = 1_000_000,
    chunk: int = 8192,
) -> tuple[Placement, float]:
    """Exhaustive max-min rate over one preset per subarea.

    Spacing-infeasible combinations are skipped. Ties resolve to the
    lexicographically smallest tuple of flat preset indices. Refuses
    instances with more than `cap` combinations.
    """
    m = geom.n_subareas
    k = geom.n_h * geom.n_v
    total = k**m
    if total > cap:
        raise ValueError(f"{total} lattice combinations exceed the cap of {cap}")
    blocks = np.stack([preset_grid(geom, j + 1) for j in range(m)])  # (M, K, 2)
    flats = np.stack([preset_flat_indices(geom, j + 1) for j in range(m)]) - 1
    weights = k ** np.arange(m - 1, -1, -1)  # combo id -> per-subarea digits

    best_rate = -np.inf
    best_positions = None
    d2min = geom.d_min**2
    iu, ju = np.triu_indices(m, k=1)
    for start in range(0, total, chunk):
        ids = np.arange(start, min(start + chunk, total))
        local = (ids[:, None] // weights[None, :]) % k  # lexicographic order
        pos = blocks[np.arange(m)[None, :], local]  # (n, M, 2)
        if m > 1:
            diff = pos[:, :, None, :] - pos[:, None, :, :]
            d2 = np.einsum("nijk,nijk->nij", diff, diff)
            feasible = np.all(d2[:, iu, ju] >= d2min, axis=-1)
        else:
            feasible = np.ones(len(ids), dtype=bool)
        if not feasible.any():
            continue
        lattice_idx = flats[np.arange(m)[None, :], local[feasible]]
        _, report = split_and_rates(
            realization.h_f[lattice_idx],
            realization.h_r[lattice_idx],
            realization.h_t[lattice_idx],
            power,
            noise_power,
        )
        top = int(np.argmax(report.effective))  # first max: smallest combo id
        if report.effective[top] > best_rate:
            best_rate = float(report.effective[top])
            best_positions = pos[feasible][top].copy()
    if best_positions is None:
        raise ValueError("no spacing-feasible lattice placement exists")
    return Placement(best_positions), best_rate
