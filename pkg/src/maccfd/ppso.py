"""Projected particle swarm optimization over the joint 8-D antenna position.

Particles live in the box [-D/2, D/2]^8.  Each iteration draws fresh
uniform weights, updates the velocity from inertia plus attraction towards
the particle's own best and the swarm's best, moves, and clamps back into
the box.  Best positions are replaced only on strict improvement.

Random stream layout (fixed so seeded runs stay reproducible): initial
positions (N*8 uniforms, row-major), initial velocities (N*8), then per
iteration and per particle in index order, 8 uniforms for ``e1`` followed
by 8 for ``e2``.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from maccfd.seeding import stream
from maccfd.system import AntennaLayout

DIM = 8
UPDATE_MODES = ("batched", "sequential")


@dataclass(frozen=True)
class PpsoConfig:
    num_particles: int = 200
    num_iterations: int = 100
    c1: float = 1.4
    c2: float = 1.4
    omega_min: float = 0.4
    omega_max: float = 0.9
    region_size_d: float = 1.0
    seed: int = 0
    # "batched": every particle of an iteration steers towards the global
    # best as it stood at the start of the iteration, so the N fitness
    # calls can be evaluated together.  "sequential": the global best is
    # refreshed after every particle, exactly as the inner loop reads.
    update: str = "batched"

    def __post_init__(self):
        if self.num_particles < 1 or self.num_iterations < 1:
            raise ValueError("num_particles and num_iterations must be >= 1")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("learning factors must be non-negative")
        if not 0 <= self.omega_min <= self.omega_max:
            raise ValueError("need 0 <= omega_min <= omega_max")
        if self.region_size_d < 0:
            raise ValueError("region_size_d must be >= 0")
        if self.update not in UPDATE_MODES:
            raise ValueError(f"update must be one of {UPDATE_MODES}")


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    local_best: np.ndarray
    local_best_fitness: np.ndarray
    global_best: np.ndarray
    global_best_fitness: float
    iteration: int = 0


@dataclass
class FitnessTrace:
    """Global-best fitness after initialization and after each iteration."""

    values: List[float] = field(default_factory=list)
    evaluation_count: int = 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self):
        return len(self.values)


def project(v, d: float) -> np.ndarray:
    """Clamp every component into [-d/2, d/2]."""
    if d < 0:
        raise ValueError("region size must be >= 0")
    return np.clip(np.asarray(v, dtype=float), -d / 2, d / 2)


def inertia_weight(k: int, config: PpsoConfig) -> float:
    K = config.num_iterations
    if not 0 <= k <= K:
        raise ValueError(f"iteration {k} outside [0, {K}]")
    return config.omega_max - (config.omega_max - config.omega_min) * k / K


def velocity_update(n: int, swarm: Swarm, config: PpsoConfig, rng: Optional[np.random.Generator],
                    omega: float, e1=None, e2=None) -> np.ndarray:
    """New velocity of particle ``n``.

    ``e1``/``e2`` default to 8 fresh uniforms each from ``rng`` (``e1`` first);
    passing them explicitly bypasses the generator.
    """
    if e1 is None:
        e1 = rng.random(DIM)
    if e2 is None:
        e2 = rng.random(DIM)
    u_prev = swarm.positions[n]
    return (omega * swarm.velocities[n]
            + config.c1 * e1 * (swarm.local_best[n] - u_prev)
            + config.c2 * e2 * (swarm.global_best - u_prev))


def initialize_swarm(config: PpsoConfig, rng: np.random.Generator, fitness: Callable,
                     initial_positions=None) -> Swarm:
    """Random swarm in the box with bests set from one fitness sweep.

    ``initial_positions`` (M x 8, M <= N) overwrite the first M particles
    after the random draws, so injecting a layout never shifts the stream.
    """
    N, half = config.num_particles, config.region_size_d / 2
    positions = rng.uniform(-half, half, size=(N, DIM))
    velocities = rng.uniform(-half, half, size=(N, DIM))
    if initial_positions is not None:
        inject = np.atleast_2d(np.asarray(initial_positions, dtype=float))
        if inject.shape[0] > N or inject.shape[1] != DIM:
            raise ValueError(f"cannot inject {inject.shape} into a swarm of {N}")
        positions[: inject.shape[0]] = project(inject, config.region_size_d)
    values = np.asarray(fitness(positions), dtype=float)
    best = int(np.argmax(values))
    return Swarm(
        positions=positions,
        velocities=velocities,
        local_best=positions.copy(),
        local_best_fitness=values.copy(),
        global_best=positions[best].copy(),
        global_best_fitness=float(values[best]),
    )


def _step_batched(swarm: Swarm, config: PpsoConfig, rng, omega: float, fitness) -> int:
    N = config.num_particles
    draws = rng.random((N, 2 * DIM))
    e1, e2 = draws[:, :DIM], draws[:, DIM:]
    u_prev = swarm.positions
    v = (omega * swarm.velocities
         + config.c1 * e1 * (swarm.local_best - u_prev)
         + config.c2 * e2 * (swarm.global_best - u_prev))
    u = project(u_prev + v, config.region_size_d)
    values = np.asarray(fitness(u), dtype=float)
    swarm.velocities, swarm.positions = v, u
    for n in range(N):
        if values[n] > swarm.local_best_fitness[n]:
            swarm.local_best[n] = u[n]
            swarm.local_best_fitness[n] = values[n]
        if values[n] > swarm.global_best_fitness:
            swarm.global_best = u[n].copy()
            swarm.global_best_fitness = float(values[n])
    return N


def _step_sequential(swarm: Swarm, config: PpsoConfig, rng, omega: float, fitness) -> int:
    """Particle-by-particle sweep with the global best refreshed after each particle.

    A particle's move depends only on its own state, its pre-drawn weights
    and the current global best.  So the remaining particles are moved and
    evaluated as one batch, and the batch is recomputed from the next
    particle onward only when the global best changes.
    """
    N = config.num_particles
    draws = rng.random((N, 2 * DIM))
    e1, e2 = draws[:, :DIM], draws[:, DIM:]
    start = 0
    while start < N:
        sl = slice(start, N)
        u_prev = swarm.positions[sl]
        v = (omega * swarm.velocities[sl]
             + config.c1 * e1[sl] * (swarm.local_best[sl] - u_prev)
             + config.c2 * e2[sl] * (swarm.global_best - u_prev))
        u = project(u_prev + v, config.region_size_d)
        values = np.asarray(fitness(u), dtype=float)
        restart = N
        for i in range(N - start):
            n = start + i
            swarm.velocities[n], swarm.positions[n] = v[i], u[i]
            if values[i] > swarm.local_best_fitness[n]:
                swarm.local_best[n] = u[i]
                swarm.local_best_fitness[n] = values[i]
            if values[i] > swarm.global_best_fitness:
                swarm.global_best = u[i].copy()
                swarm.global_best_fitness = float(values[i])
                restart = n + 1
                break
        start = restart
    return N


def run_ppso(fitness: Callable, config: PpsoConfig, initial_positions=None,
             rng: Optional[np.random.Generator] = None):
    """Maximize ``fitness`` over the box; returns (best AntennaLayout, FitnessTrace).

    ``fitness`` maps an (M, 8) array of layout vectors to M values.  The
    trace holds K+1 global-best values, the first taken right after
    initialization.
    """
    if rng is None:
        rng = stream(config.seed, 0)
    swarm = initialize_swarm(config, rng, fitness, initial_positions)
    trace = FitnessTrace([swarm.global_best_fitness], config.num_particles)
    step = _step_batched if config.update == "batched" else _step_sequential
    for k in range(1, config.num_iterations + 1):
        omega = inertia_weight(k, config)
        trace.evaluation_count += step(swarm, config, rng, omega, fitness)
        swarm.iteration = k
        trace.values.append(swarm.global_best_fitness)
    return AntennaLayout.from_vector(swarm.global_best), trace


def normalized_cumulative_error(trace, f_star: float) -> float:
    """Mean absolute gap between the global-best trace and ``f_star``, over ``f_star``."""
    if not f_star > 0:
        raise ValueError(f"f_star must be positive, got {f_star!r}")
    values = trace.as_array() if isinstance(trace, FitnessTrace) else np.asarray(trace, dtype=float)
    return float(np.sum(np.abs(f_star - values)) / (len(values) * f_star))


def cumulative_error_curve(trace, f_star: float) -> np.ndarray:
    """Normalized cumulative error truncated at every k = 0..K."""
    if not f_star > 0:
        raise ValueError(f"f_star must be positive, got {f_star!r}")
    values = trace.as_array() if isinstance(trace, FitnessTrace) else np.asarray(trace, dtype=float)
    return np.cumsum(np.abs(f_star - values)) / (np.arange(1, len(values) + 1) * f_star)
