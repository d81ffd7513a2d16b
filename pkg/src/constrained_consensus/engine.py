"""Synchronous-round simulation of the distributed consensus algorithms.

Two distributed schemes are simulated round by round on immutable game
instances:

* best-response dynamics with a local winner rule (one update per closed
  neighborhood per round, chosen by largest squared update length, ties to
  the higher node id), and
* simultaneous gradient projection on the consensus cost with a constant
  step size.

A centralized alternating-projections baseline (cyclic projection onto every
node's set) is included for comparison.  Every round reads only round-start
values; a run produces a ``Trace`` with the consensus metric, potential and
update activity per iteration.

Structural invariants are asserted while running: updated strategies stay in
their sets, best-response winners form an independent set, and the potential
never decreases under best-response rounds.  Violations raise
``InvariantError`` (they indicate a bug, not a user error).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .game import (
    DegenerateNodeError,
    GameInstance,
    as_profile,
    max_step_size,
    potential,
)
from .graphs import GeometricLayout
from .tolerances import DEFAULT, Tolerances


class InvariantError(RuntimeError):
    """A per-round structural invariant was violated."""


class StepSizeWarning(UserWarning):
    """The configured step size exceeds the sufficient convergence bound."""


@dataclass(frozen=True, eq=False)
class EngineState:
    """Round-synchronous simulation state: instance, profile and counters."""

    instance: GameInstance
    profile: np.ndarray
    t: int = 0
    step_size: float | None = None
    seed: int | None = None


@dataclass(frozen=True)
class TraceRecord:
    t: int
    consensus_metric: float
    potential: float
    updated: tuple[int, ...]
    # largest squared best-response displacement seen this round (best-response runs)
    max_metric: float | None = None


@dataclass(eq=False)
class Trace:
    """Per-iteration history of a run plus its outcome."""

    algo: str
    records: list[TraceRecord]
    final_profile: np.ndarray
    converged: bool
    iterations_used: int
    # True when the run stopped at a literal best-response fixed point
    fixed_point: bool = False
    seed: int | None = None

    @property
    def consensus_curve(self) -> np.ndarray:
        return np.array([r.consensus_metric for r in self.records])

    @property
    def final_metric(self) -> float:
        return self.records[-1].consensus_metric

    def csv_text(self) -> str:
        lines = ["t,consensus_metric,potential,num_updated"]
        for r in self.records:
            lines.append(f"{r.t},{_fmt(r.consensus_metric)},{_fmt(r.potential)},{len(r.updated)}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.csv_text())


def _fmt(x: float) -> str:
    return repr(float(x))


def consensus_metric(p) -> float:
    """Root-sum-square deviation of all strategies from their coordinate mean."""
    prof = np.asarray(p, dtype=float)
    return float(np.linalg.norm(prof - prof.mean(axis=0)))


def initialize(inst: GameInstance, layout: GeometricLayout | None = None) -> np.ndarray:
    """Deterministic feasible start: project each node's anchor onto its set.

    The anchor is the node's own position when a geometric layout is given,
    the origin otherwise.
    """
    if layout is not None:
        anchors = np.asarray(layout.positions, dtype=float)
        if anchors.shape != (inst.n, inst.q):
            raise ValueError(f"layout shape {anchors.shape} does not match instance {(inst.n, inst.q)}")
    else:
        anchors = np.zeros((inst.n, inst.q))
    return np.array([s.project(a) for s, a in zip(inst.sets, anchors)])


def initial_state(inst: GameInstance, layout: GeometricLayout | None = None,
                  step_size: float | None = None, seed: int | None = None) -> EngineState:
    """Build a validated engine state with the deterministic initial profile."""
    if step_size is not None:
        _check_step(inst, step_size)
    return EngineState(inst, initialize(inst, layout), 0, step_size, seed)


def _check_step(inst: GameInstance, s: float) -> None:
    if not s > 0:
        raise ValueError(f"step size must be positive, got {s}")
    bound = max_step_size(inst)
    if s >= bound:
        warnings.warn(
            f"step size {s:.6g} is at or above the sufficient bound {bound:.6g}; "
            "convergence is no longer guaranteed",
            StepSizeWarning,
            stacklevel=3,
        )


def _require_no_isolated(inst: GameInstance) -> None:
    if np.any(inst.degrees == 0):
        isolated = int(np.argmin(inst.degrees))
        raise DegenerateNodeError(f"node {isolated} has no neighbors")


def _best_response_all(inst: GameInstance, prof: np.ndarray):
    """Vectorized best responses and squared update metrics for every node."""
    deg = inst.degrees
    centroids = (inst.adjacency @ prof) / deg[:, None]
    responses = inst.projector.project(centroids)
    metrics = ((responses - prof) ** 2).sum(axis=1)
    return responses, metrics


def _select_winners(inst: GameInstance, metrics: np.ndarray) -> np.ndarray:
    """Boolean winner mask of the best-response round (greedy local rule).

    A node updates iff its metric strictly beats every neighbor's, or ties
    the neighborhood maximum while its id exceeds the highest-id neighbor
    attaining that maximum.  Comparisons are exact floating point.
    Requires every node to have at least one neighbor.
    """
    targets, sources, starts = inst.neighbor_flat
    nb_metrics = metrics[targets]
    nb_max = np.maximum.reduceat(nb_metrics, starts)
    tied_ids = np.where(nb_metrics == nb_max[sources], targets, -1)
    nb_argmax_id = np.maximum.reduceat(tied_ids, starts)
    ids = inst.node_ids
    return (metrics > nb_max) | ((metrics == nb_max) & (ids > nb_argmax_id))


def dgtc_round(state: EngineState) -> EngineState:
    """One synchronous best-response round (winner-rule dynamics)."""
    inst = state.instance
    _require_no_isolated(inst)
    prof = as_profile(inst, state.profile)
    responses, metrics = _best_response_all(inst, prof)
    win = _select_winners(inst, metrics)
    new_prof = np.where(win[:, None], responses, prof)
    return replace(state, profile=new_prof, t=state.t + 1)


def dgpc_round(state: EngineState) -> EngineState:
    """One simultaneous gradient-projection round with constant step size."""
    inst = state.instance
    if state.step_size is None:
        raise ValueError("gradient-projection rounds need a step size")
    _check_step(inst, state.step_size)
    prof = as_profile(inst, state.profile)
    new_prof = _gradient_projection_step(inst, prof, state.step_size)
    return replace(state, profile=new_prof, t=state.t + 1)


def _gradient_projection_step(inst: GameInstance, prof: np.ndarray, s: float) -> np.ndarray:
    lap_p = inst.degrees[:, None] * prof - inst.adjacency @ prof
    return inst.projector.project(prof - 2.0 * s * lap_p)


def run(state: EngineState, algo: str, max_iters: int | None = None,
        threshold: float = DEFAULT.convergence_threshold,
        tol: Tolerances = DEFAULT) -> Trace:
    """Iterate rounds until the consensus metric reaches ``threshold``.

    Stops after ``max_iters`` rounds (default 100 * N) or, for the
    best-response dynamics, at a literal fixed point: once every update
    metric is at most ``tol.fixed_point`` the profile can never change
    again, so looping further would be vacuous.

    Per-round invariants (feasibility, winner independence, potential
    monotonicity) are asserted; see module docstring.
    """
    if algo not in ("dgtc", "dgpc"):
        raise ValueError(f"unknown algorithm {algo!r} (expected 'dgtc' or 'dgpc')")
    inst = state.instance
    _require_no_isolated(inst)
    if max_iters is None:
        max_iters = 100 * inst.n
    if max_iters < 1:
        raise ValueError(f"max_iters must be positive, got {max_iters}")
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")

    prof = as_profile(inst, state.profile).copy()
    _assert_feasible(inst, prof, tol, when="after initialization")
    if algo == "dgpc":
        if state.step_size is None:
            raise ValueError("gradient-projection runs need a step size")
        _check_step(inst, state.step_size)
        all_ids = tuple(range(inst.n))

    phi = potential(inst, prof)
    metric = consensus_metric(prof)
    records = [TraceRecord(0, metric, phi, ())]
    t = 0
    fixed_point = False

    while metric > threshold and t < max_iters:
        if algo == "dgtc":
            responses, metrics = _best_response_all(inst, prof)
            max_metric = float(metrics.max())
            if max_metric <= tol.fixed_point:
                fixed_point = True
                break
            win = _select_winners(inst, metrics)
            _assert_independent(inst, win)
            prof = np.where(win[:, None], responses, prof)
            updated = tuple(np.flatnonzero(win).tolist())
        else:
            prof = _gradient_projection_step(inst, prof, state.step_size)
            updated = all_ids
            max_metric = None
        t += 1

        _assert_feasible(inst, prof, tol, when=f"after round {t}")
        new_phi = potential(inst, prof)
        if algo == "dgtc" and new_phi < phi - tol.monotonicity:
            raise InvariantError(
                f"potential decreased in round {t}: {phi!r} -> {new_phi!r}")
        phi = new_phi
        metric = consensus_metric(prof)
        records.append(TraceRecord(t, metric, phi, updated, max_metric))

    return Trace(
        algo=algo,
        records=records,
        final_profile=prof,
        converged=metric <= threshold,
        iterations_used=t,
        fixed_point=fixed_point,
        seed=state.seed,
    )


def _assert_feasible(inst: GameInstance, prof: np.ndarray, tol: Tolerances, when: str) -> None:
    dists = inst.projector.distances(prof)
    if dists.max() > tol.membership:
        worst = int(np.argmax(dists))
        raise InvariantError(
            f"strategy of node {worst} left its set {when}: distance {dists[worst]:.3e}")


def _assert_independent(inst: GameInstance, win: np.ndarray) -> None:
    winners = np.flatnonzero(win)
    if winners.size > 1 and inst.adjacency[np.ix_(winners, winners)].any():
        raise InvariantError(f"adjacent winners in round update: {winners.tolist()}")


def pocs_run(inst: GameInstance, x0, cycles: int) -> tuple[np.ndarray, list[float]]:
    """Cyclic projections onto every node's set, in ascending node order.

    Returns the final point and the displacement of each full cycle.  The
    per-cycle displacement is nonincreasing (the cycle map is nonexpansive)
    and goes to zero on feasible instances.
    """
    if cycles < 1:
        raise ValueError(f"cycles must be positive, got {cycles}")
    x = np.array(x0, dtype=float)
    if x.shape != (inst.q,):
        raise ValueError(f"expected a starting point of dimension {inst.q}, got shape {x.shape}")
    displacements = []
    for _ in range(cycles):
        start = x
        for s in inst.sets:
            x = s.project(x)
        displacements.append(float(np.linalg.norm(x - start)))
    return x, displacements
