"""Communication topologies.

Undirected, unweighted graphs with 0-based node ids internally (text exports
use 1-based ids).  Includes random geometric graph generation on the unit
box, a BFS connectivity test, the combinatorial Laplacian and its spectrum
via a cyclic Jacobi eigensolver, whose second-smallest eigenvalue (the
algebraic connectivity, a.k.a. Fiedler value) is the network-density axis of
the rate experiments.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .seeding import rng_for
from .tolerances import DEFAULT


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph as per-node sorted neighbor tuples."""

    n: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1 or len(self.neighbors) != self.n:
            raise ValueError(f"need one neighbor list per node, got {len(self.neighbors)} for n={self.n}")
        seen = {i: set(nbrs) for i, nbrs in enumerate(self.neighbors)}
        for i, nbrs in enumerate(self.neighbors):
            for k in nbrs:
                if not 0 <= k < self.n:
                    raise ValueError(f"node id {k} out of range [0, {self.n})")
                if k == i:
                    raise ValueError(f"self-loop at node {i}")
                if i not in seen[k]:
                    raise ValueError(f"edge ({i}, {k}) is not symmetric")
            if any(a >= b for a, b in zip(nbrs, nbrs[1:])):
                raise ValueError(f"neighbor list of node {i} is not sorted and duplicate-free")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, k in edges:
            if i == k:
                raise ValueError(f"self-loop at node {i}")
            nbrs[i].add(k)
            nbrs[k].add(i)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.neighbors])

    def edges(self):
        """Iterate undirected edges once, as (i, k) with i < k."""
        for i, nbrs in enumerate(self.neighbors):
            for k in nbrs:
                if i < k:
                    yield i, k

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.neighbors) // 2


@dataclass(frozen=True, eq=False)
class GeometricLayout:
    """Node positions in the unit box plus the communication range used."""

    positions: np.ndarray
    range: float

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2:
            raise ValueError("positions must be an (n, q) array")
        if np.any(pos < 0.0) or np.any(pos > 1.0):
            raise ValueError("positions must lie in the unit box")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "range", float(self.range))
        if self.range <= 0.0:
            raise ValueError("communication range must be positive")


def graph_from_positions(positions: np.ndarray, rho: float) -> Graph:
    """Edge (i, k) iff ||pos_i - pos_k|| <= rho (boundary counts as an edge)."""
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    adj = dist <= rho
    np.fill_diagonal(adj, False)
    return Graph(n, tuple(tuple(np.flatnonzero(adj[i]).tolist()) for i in range(n)))


def generate_rgg(n: int, q: int, rho: float, seed: int) -> tuple[Graph, GeometricLayout]:
    """Random geometric graph: n i.i.d. uniform points in [0,1]^q, edges within rho."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if q < 1:
        raise ValueError(f"dimension must be positive, got {q}")
    if rho <= 0:
        raise ValueError(f"communication range must be positive, got {rho}")
    return _rgg_from_rng(n, q, rho, rng_for(seed))


def _rgg_from_rng(n: int, q: int, rho: float, rng: np.random.Generator):
    positions = rng.random((n, q))
    return graph_from_positions(positions, rho), GeometricLayout(positions, rho)


def is_connected(g: Graph) -> bool:
    """BFS from node 0 reaches all nodes."""
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for k in g.neighbors[i]:
            if not seen[k]:
                seen[k] = True
                count += 1
                queue.append(k)
    return count == g.n


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian L = D - A (built in integers, returned float)."""
    lap = np.zeros((g.n, g.n), dtype=int)
    for i, nbrs in enumerate(g.neighbors):
        lap[i, i] = len(nbrs)
        for k in nbrs:
            lap[i, k] = -1
    return lap.astype(float)


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = DEFAULT.jacobi_offdiag,
                       max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps the upper triangle until the off-diagonal Frobenius norm drops to
    ``tol`` (or ``max_sweeps`` is hit).  Deterministic, O(n^3) per sweep.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix must be symmetric")
    if n == 1:
        return a.diagonal().copy()

    # rotating every |a_pq| above tol/n leaves the off-diagonal norm below tol
    rotate_above = tol / n
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= rotate_above:
                    continue
                phi = 0.5 * math.atan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = math.cos(phi), math.sin(phi)
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    return np.sort(a.diagonal())


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(a.diagonal())
    return float(np.linalg.norm(off))


def fiedler_value(g: Graph, tol: float = DEFAULT.jacobi_offdiag) -> float:
    """Second-smallest Laplacian eigenvalue, clamped at 0 from below.

    Positive iff the graph is connected (for n >= 2).
    """
    if g.n < 2:
        return 0.0
    eig = jacobi_eigenvalues(laplacian(g), tol=tol)
    return max(0.0, float(eig[1]))


def edge_list_text(g: Graph) -> str:
    """One 'i k' line per edge, 1-based ids, i < k."""
    return "".join(f"{i + 1} {k + 1}\n" for i, k in g.edges())


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(edge_list_text(g))
