"""Game-theoretic core of the consensus problem.

Each node n holds a closed convex set C_n and plays a point p_n in C_n.  Its
utility is the negated sum of squared distances to its graph neighbors,

    U_n(p) = -sum_{k in N_n} ||p_n - p_k||^2,

which is maximal (zero) exactly at consensus with the neighborhood.  The
function

    phi(p) = -(1/2) sum_n sum_{k in N_n} ||p_n - p_k||^2

changes by exactly a deviator's utility change (an exact potential), and its
negation J = -phi is the smooth convex cost driven to zero by the
gradient-projection algorithm.  This module provides those functions, their
gradients, the closed-form best response (projected neighborhood centroid)
and the Lipschitz/step-size bounds for J.

Strategy profiles are (N, q) float arrays, one row per node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graphs import Graph
from .sets import ConvexSet, RowProjector


class DegenerateNodeError(ValueError):
    """The operation needs the node to have at least one neighbor."""


class DegenerateInstanceError(ValueError):
    """The operation needs the graph to have at least one edge."""


@dataclass(frozen=True, eq=False)
class GameInstance:
    """A consensus game: communication graph plus one convex set per node."""

    graph: Graph
    sets: tuple[ConvexSet, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if len(self.sets) != self.graph.n:
            raise ValueError(f"need one set per node: {len(self.sets)} sets for {self.graph.n} nodes")
        for i, s in enumerate(self.sets):
            if s.dim != self.q:
                raise ValueError(f"set of node {i} has dimension {s.dim}, expected {self.q}")

    @property
    def n(self) -> int:
        return self.graph.n

    # dense helpers are cached; instances are small (desk scale, N <= a few hundred)
    @cached_property
    def degrees(self) -> np.ndarray:
        d = self.graph.degrees()
        d.flags.writeable = False
        return d

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, k in self.graph.edges():
            a[i, k] = a[k, i] = 1.0
        a.flags.writeable = False
        return a

    @cached_property
    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Undirected edge endpoints as two index arrays (i < k)."""
        pairs = list(self.graph.edges())
        ei = np.array([i for i, _ in pairs], dtype=int)
        ek = np.array([k for _, k in pairs], dtype=int)
        return ei, ek

    @cached_property
    def edge_gather(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened per-coordinate edge indices into profile.ravel()."""
        ei, ek = self.edge_index
        cols = np.arange(self.q)
        return ((ei[:, None] * self.q + cols).ravel(),
                (ek[:, None] * self.q + cols).ravel())

    @cached_property
    def neighbor_flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated neighbor lists, their source node per entry, and the
        per-node segment starts, for reductions over neighborhoods (only
        meaningful when every degree is positive)."""
        targets = np.concatenate([np.array(nbrs, dtype=int) for nbrs in self.graph.neighbors]) \
            if self.graph.edge_count else np.empty(0, dtype=int)
        sources = np.repeat(np.arange(self.n), self.degrees)
        starts = np.concatenate(([0], np.cumsum(self.degrees)[:-1]))
        return targets, sources, starts

    @cached_property
    def node_ids(self) -> np.ndarray:
        ids = np.arange(self.n)
        ids.flags.writeable = False
        return ids

    @cached_property
    def projector(self) -> RowProjector:
        return RowProjector(self.sets)


def as_profile(inst: GameInstance, p) -> np.ndarray:
    prof = np.asarray(p, dtype=float)
    if prof.shape != (inst.n, inst.q):
        raise ValueError(f"expected a profile of shape {(inst.n, inst.q)}, got {prof.shape}")
    if not np.all(np.isfinite(prof)):
        raise ValueError("profile entries must be finite")
    return prof


def _check_node(inst: GameInstance, n: int) -> int:
    if not 0 <= n < inst.n:
        raise ValueError(f"node id {n} out of range [0, {inst.n})")
    return n


def utility(inst: GameInstance, p, n: int) -> float:
    """U_n(p) = -sum over neighbors of ||p_n - p_k||^2 (always <= 0)."""
    prof = as_profile(inst, p)
    _check_node(inst, n)
    nbrs = list(inst.graph.neighbors[n])
    diffs = prof[nbrs] - prof[n]
    return -float(np.sum(diffs * diffs))


def potential(inst: GameInstance, p) -> float:
    """Exact potential: the negated sum of squared differences over edges.

    Equals zero iff neighboring strategies agree (consensus, on a connected
    graph); computed edge-wise so it is nonpositive in exact arithmetic and
    in floating point alike.
    """
    prof = as_profile(inst, p)
    gi, gk = inst.edge_gather
    flat = np.ascontiguousarray(prof).ravel()
    diffs = flat[gi] - flat[gk]
    return -float(diffs @ diffs)


def _neighbor_sum(inst: GameInstance, prof: np.ndarray, n: int) -> np.ndarray:
    return prof[list(inst.graph.neighbors[n])].sum(axis=0)


def utility_gradient(inst: GameInstance, p, n: int) -> np.ndarray:
    """Gradient of U_n in the p_n block: -2 sum_k (p_n - p_k)."""
    prof = as_profile(inst, p)
    _check_node(inst, n)
    deg = inst.graph.degree(n)
    return -2.0 * (deg * prof[n] - _neighbor_sum(inst, prof, n))


def cost_gradient(inst: GameInstance, p) -> np.ndarray:
    """Stacked gradient of the cost J = -phi; block n is -utility_gradient(n)."""
    prof = as_profile(inst, p)
    return np.concatenate([-utility_gradient(inst, prof, n) for n in range(inst.n)])


def centroid(inst: GameInstance, p, n: int) -> np.ndarray:
    """Mean of the neighbors' strategies."""
    prof = as_profile(inst, p)
    _check_node(inst, n)
    deg = inst.graph.degree(n)
    if deg == 0:
        raise DegenerateNodeError(f"node {n} has no neighbors")
    return _neighbor_sum(inst, prof, n) / deg


def best_response(inst: GameInstance, p, n: int) -> np.ndarray:
    """Utility-maximizing strategy with the others fixed.

    The utility's level sets are spheres around the neighborhood centroid, so
    the maximizer over C_n is the projection of that centroid onto C_n.
    """
    return inst.sets[n].project(centroid(inst, p, n))


def update_metric(inst: GameInstance, p, n: int) -> float:
    """Squared length of the move the best response would make."""
    prof = as_profile(inst, p)
    r = best_response(inst, prof, n)
    return float(np.sum((r - prof[n]) ** 2))


def lipschitz_constant(inst: GameInstance) -> float:
    """L = 4 sqrt(q * sum_i deg_i^2), a Lipschitz constant of grad J."""
    if inst.graph.edge_count == 0:
        raise DegenerateInstanceError("graph has no edges")
    deg_sq = int(np.sum(inst.degrees ** 2))
    return 4.0 * math.sqrt(inst.q * deg_sq)


def max_step_size(inst: GameInstance) -> float:
    """Open upper bound 2/L on constant steps with stationary limit points."""
    return 2.0 / lipschitz_constant(inst)


def default_step_size(inst: GameInstance) -> float:
    """Step close to the maximum allowed: 0.99 * (2/L)."""
    return 0.99 * max_step_size(inst)


def max_set_distance(inst: GameInstance, p) -> float:
    """Largest distance from any strategy to its own set (feasibility gauge)."""
    prof = as_profile(inst, p)
    return float(np.max(inst.projector.distances(prof)))
