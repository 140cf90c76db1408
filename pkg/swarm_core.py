# swarm_core.py
"""
Synchronous particle swarm: one velocity/position update per particle per
iteration, neighbourhood bests taken from the pre-step personal bests,
positions clamped to the search box, velocities left unclamped.
"""
import copy
from dataclasses import dataclass
from typing import List

import numpy as np

from bench_functions import LOWER_BOUND, UPPER_BOUND, ProblemInstance, evaluate_batch
from errors import ArgumentError, ConfigurationError
from topology import (
    NeighborhoodAssignment,
    Topology,
    neighbors_ring,
    neighbors_star,
    neighbors_von_neumann,
)


@dataclass(frozen=True)
class Hyperparameters:
    topology: Topology
    c1: float
    c2: float
    w: float
    n: int
    k: int = 1
    p: int = 2
    r: int = 1

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if not 1 <= self.k <= self.n - 1:
            raise ConfigurationError(f"k must satisfy 1 <= k <= n-1, got k={self.k}, n={self.n}")
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigurationError(f"c1 and c2 must be non-negative, got c1={self.c1}, c2={self.c2}")
        if self.p not in (1, 2):
            raise ConfigurationError(f"p must be 1 or 2, got {self.p}")
        if self.r < 1:
            raise ConfigurationError(f"r must be >= 1, got {self.r}")


@dataclass(frozen=True)
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_pos: np.ndarray
    pbest_val: float


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_pos: np.ndarray
    pbest_val: np.ndarray
    gbest_pos: np.ndarray
    gbest_val: float
    iteration: int
    rng: np.random.Generator

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def particles(self) -> List[Particle]:
        return [
            Particle(self.positions[i], self.velocities[i], self.pbest_pos[i], float(self.pbest_val[i]))
            for i in range(self.n)
        ]


@dataclass(frozen=True, eq=False)
class ConvergenceTrace:
    best_so_far: np.ndarray
    budget: int

    def __post_init__(self):
        values = np.array(self.best_so_far, dtype=float)
        if values.shape != (self.budget,):
            raise ArgumentError(f"trace length {values.shape} does not match budget {self.budget}")
        values.flags.writeable = False
        object.__setattr__(self, "best_so_far", values)

    def __len__(self):
        return self.budget


def _global_best(pbest_pos: np.ndarray, pbest_val: np.ndarray):
    g = int(np.argmin(pbest_val))
    return pbest_pos[g].copy(), float(pbest_val[g])


def init_swarm(hp: Hyperparameters, inst: ProblemInstance, seed: int) -> SwarmState:
    rng = np.random.default_rng(int(seed))
    positions = rng.uniform(LOWER_BOUND, UPPER_BOUND, size=(hp.n, inst.dim))
    values = evaluate_batch(inst, positions)
    gbest_pos, gbest_val = _global_best(positions, values)
    return SwarmState(
        positions=positions,
        velocities=np.zeros_like(positions),
        pbest_pos=positions.copy(),
        pbest_val=values,
        gbest_pos=gbest_pos,
        gbest_val=gbest_val,
        iteration=0,
        rng=rng,
    )


def velocity_update(v, x, pbest, nbest, hp: Hyperparameters, r1, r2) -> np.ndarray:
    """w*v + c1*r1*(pbest - x) + c2*r2*(nbest - x), component-wise."""
    v, x, pbest, nbest, r1, r2 = (np.asarray(a, dtype=float) for a in (v, x, pbest, nbest, r1, r2))
    shapes = {a.shape for a in (v, x, pbest, nbest, r1, r2)}
    if len(shapes) != 1:
        raise ArgumentError(f"velocity update operands differ in shape: {sorted(shapes)}")
    return hp.w * v + hp.c1 * r1 * (pbest - x) + hp.c2 * r2 * (nbest - x)


def position_update(x, v) -> np.ndarray:
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    if x.shape != v.shape:
        raise ArgumentError(f"position and velocity differ in shape: {x.shape} vs {v.shape}")
    return np.clip(x + v, LOWER_BOUND, UPPER_BOUND)


def assign_neighbors(hp: Hyperparameters, positions: np.ndarray) -> NeighborhoodAssignment:
    if hp.topology is Topology.STAR:
        return neighbors_star(positions.shape[0])
    if hp.topology is Topology.RING:
        return neighbors_ring(positions, hp.k, hp.p)
    return neighbors_von_neumann(positions, hp.r, hp.p, positions.shape[1])


def step(
    state: SwarmState,
    inst: ProblemInstance,
    hp: Hyperparameters,
    neighborhood: NeighborhoodAssignment,
) -> SwarmState:
    n, dim = state.positions.shape
    if neighborhood.n != n:
        raise ArgumentError(f"neighbourhood covers {neighborhood.n} particles, swarm has {n}")

    rng = copy.deepcopy(state.rng)
    # row i holds r1 then r2 of particle i
    draws = rng.random((n, 2, dim))
    r1, r2 = draws[:, 0, :], draws[:, 1, :]

    nbest = state.pbest_pos[neighborhood.best_indices(state.pbest_val)]
    velocities = velocity_update(state.velocities, state.positions, state.pbest_pos, nbest, hp, r1, r2)
    positions = position_update(state.positions, velocities)
    values = evaluate_batch(inst, positions)

    improved = values < state.pbest_val
    pbest_pos = np.where(improved[:, None], positions, state.pbest_pos)
    pbest_val = np.where(improved, values, state.pbest_val)
    gbest_pos, gbest_val = _global_best(pbest_pos, pbest_val)

    return SwarmState(
        positions=positions,
        velocities=velocities,
        pbest_pos=pbest_pos,
        pbest_val=pbest_val,
        gbest_pos=gbest_pos,
        gbest_val=gbest_val,
        iteration=state.iteration + 1,
        rng=rng,
    )


def run(hp: Hyperparameters, inst: ProblemInstance, budget: int, seed: int) -> ConvergenceTrace:
    """Initialize, take exactly `budget` steps, return the per-iteration global-best trace."""
    if budget < 1:
        raise ArgumentError(f"budget must be >= 1, got {budget}")
    state = init_swarm(hp, inst, seed)
    best_so_far = np.empty(budget)
    for t in range(budget):
        state = step(state, inst, hp, assign_neighbors(hp, state.positions))
        best_so_far[t] = state.gbest_val
    return ConvergenceTrace(best_so_far=best_so_far, budget=budget)
