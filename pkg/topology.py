# topology.py
"""
Communication topologies: who a particle listens to when it picks its social attractor.

Neighborhoods are always self-inclusive and are recomputed from the current
positions every iteration. Ring is "k nearest particles by Minkowski p-norm";
Von Neumann is Ring with k derived from the Delannoy number D(dim, r).
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import FrozenSet, List

import numpy as np

from errors import ArgumentError, ConfigurationError


class Topology(str, Enum):
    STAR = "Star"
    RING = "Ring"
    VON_NEUMANN = "VonNeumann"

    @property
    def code(self) -> int:
        """Stable small integer used in seed derivation."""
        return _TOPOLOGY_CODES[self]

    @classmethod
    def parse(cls, text) -> "Topology":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        try:
            return _TOPOLOGY_ALIASES[key]
        except KeyError:
            raise ConfigurationError(
                f"unknown topology {text!r}; expected one of star, ring, vonneumann"
            ) from None


_TOPOLOGY_CODES = {Topology.STAR: 0, Topology.RING: 1, Topology.VON_NEUMANN: 2}
_TOPOLOGY_ALIASES = {
    "star": Topology.STAR,
    "gbest": Topology.STAR,
    "ring": Topology.RING,
    "lbest": Topology.RING,
    "vonneumann": Topology.VON_NEUMANN,
    "vn": Topology.VON_NEUMANN,
}


@dataclass(frozen=True, eq=False)
class NeighborhoodAssignment:
    """Row i of `mask` marks the particles whose personal bests particle i may use."""

    mask: np.ndarray

    @property
    def n(self) -> int:
        return self.mask.shape[0]

    def sets(self) -> List[FrozenSet[int]]:
        return [frozenset(np.flatnonzero(row).tolist()) for row in self.mask]

    def best_indices(self, pbest_val: np.ndarray) -> np.ndarray:
        """Lowest-index argmin of pbest_val inside each neighborhood."""
        masked = np.where(self.mask, pbest_val[None, :], np.inf)
        return np.argmin(masked, axis=1)

    def __eq__(self, other):
        if not isinstance(other, NeighborhoodAssignment):
            return NotImplemented
        return self.mask.shape == other.mask.shape and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None


def neighbors_star(n: int) -> NeighborhoodAssignment:
    if n < 2:
        raise ConfigurationError(f"a swarm needs at least 2 particles, got {n}")
    return NeighborhoodAssignment(np.ones((n, n), dtype=bool))


def minkowski_distances(positions: np.ndarray, p: int) -> np.ndarray:
    """Pairwise Minkowski distances of order p (1 or 2) between rows."""
    diff = positions[:, None, :] - positions[None, :, :]
    if p == 1:
        return np.sum(np.abs(diff), axis=2)
    if p == 2:
        return np.sqrt(np.sum(diff * diff, axis=2))
    raise ConfigurationError(f"Minkowski order must be 1 or 2, got {p}")


def neighbors_ring(positions, k: int, p: int) -> NeighborhoodAssignment:
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2:
        raise ArgumentError(f"positions must be an (n, dim) matrix, got shape {positions.shape}")
    n = positions.shape[0]
    if k < 1 or k >= n:
        raise ConfigurationError(f"nearest-neighbour count k={k} must satisfy 1 <= k <= n-1 (n={n})")

    dist = minkowski_distances(positions, p)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps ascending index order among equal distances
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]

    mask = np.eye(n, dtype=bool)
    mask[np.arange(n)[:, None], nearest] = True
    return NeighborhoodAssignment(mask)


def delannoy(m: int, q: int) -> int:
    """Lattice paths from (0,0) to (m,q) with east, north and north-east steps."""
    if int(m) != m or int(q) != q:
        raise ArgumentError(f"Delannoy arguments must be integers, got ({m}, {q})")
    if m < 0 or q < 0:
        raise ArgumentError(f"Delannoy arguments must be non-negative, got ({m}, {q})")
    return _delannoy(int(m), int(q))


@lru_cache(maxsize=None)
def _delannoy(m: int, q: int) -> int:
    row = [1] * (q + 1)
    for _ in range(m):
        nxt = [1] * (q + 1)
        for j in range(1, q + 1):
            nxt[j] = row[j] + row[j - 1] + nxt[j - 1]
        row = nxt
    return row[q]


def von_neumann_k(n: int, r: int, dim: int) -> int:
    if r < 1:
        raise ConfigurationError(f"Delannoy range r must be >= 1, got {r}")
    return min(delannoy(dim, r) - 1, n - 1)


def neighbors_von_neumann(positions, r: int, p: int, dim: int) -> NeighborhoodAssignment:
    positions = np.asarray(positions, dtype=float)
    k_vn = von_neumann_k(positions.shape[0], r, dim)
    return neighbors_ring(positions, k_vn, p)
