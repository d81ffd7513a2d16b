"""Source-localization experiments.

Scenario: n sensor nodes uniform in the unit box, communicating within range
rho; a source sits uniformly in the central box of side 0.5, and each node
knows only a ball around its own position whose radius is its true distance
to the source plus a margin epsilon (so the source lies in every ball and
the intersection is nonempty).

On top of the scenario sit the two experiment protocols:

* ``validation_study`` - Monte-Carlo convergence runs of both distributed
  algorithms plus the centralized cyclic-projections baseline, and
* ``rate_sweep`` - iterations-to-threshold for both algorithms across
  network densities, indexed by the Fiedler value of each realization.

Everything is reproducible from a base seed; rerunning with the same seed
yields byte-identical CSV output.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .engine import Trace, initial_state, pocs_run, run
from .game import GameInstance, default_step_size
from .graphs import GeometricLayout, Graph, fiedler_value, graph_from_positions, is_connected
from .seeding import rng_for
from .sets import Ball
from .tolerances import DEFAULT, Tolerances


class GenerationError(RuntimeError):
    """Instance generation could not produce a connected topology."""


@dataclass(frozen=True, eq=False)
class LocalizationInstance:
    """A connected localization scenario and its per-node constraint balls."""

    layout: GeometricLayout
    graph: Graph
    source: np.ndarray
    epsilon: float
    sets: tuple[Ball, ...]
    seed: int

    @cached_property
    def game_instance(self) -> GameInstance:
        return GameInstance(self.graph, self.sets, self.layout.positions.shape[1])


def localization_sets(positions: np.ndarray, source: np.ndarray, epsilon: float) -> tuple[Ball, ...]:
    """One ball per node: center at the node, radius = source distance + epsilon."""
    radii = np.linalg.norm(positions - source, axis=1) + epsilon
    return tuple(Ball(c, r) for c, r in zip(positions, radii))


def make_localization_instance(n: int, q: int, rho: float, epsilon: float, seed: int,
                               max_attempts: int = 100) -> LocalizationInstance:
    """Generate a connected scenario, rejection-sampling the layout.

    Each attempt uses the sub-seed (seed, attempt); the first connected
    layout wins, so the result is deterministic per seed.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if q < 1:
        raise ValueError(f"dimension must be positive, got {q}")
    if rho <= 0:
        raise ValueError(f"communication range must be positive, got {rho}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if max_attempts < 1:
        raise ValueError(f"max_attempts must be positive, got {max_attempts}")
    for attempt in range(max_attempts):
        rng = rng_for(seed, attempt)
        positions = rng.random((n, q))
        graph = graph_from_positions(positions, rho)
        if not is_connected(graph):
            continue
        source = 0.25 + 0.5 * rng.random(q)
        return LocalizationInstance(
            layout=GeometricLayout(positions, rho),
            graph=graph,
            source=source,
            epsilon=float(epsilon),
            sets=localization_sets(positions, source, epsilon),
            seed=seed,
        )
    raise GenerationError(
        f"no connected topology for n={n}, q={q}, rho={rho} after {max_attempts} attempts")


@dataclass(eq=False)
class PocsResult:
    """Baseline outcome: final point, per-cycle displacement, final feasibility."""

    final_point: np.ndarray
    displacements: list[float]
    max_set_distance: float


@dataclass(eq=False)
class ValidationResult:
    base_seed: int
    seeds: list[int]
    dgtc: list[Trace]
    dgpc: list[Trace]
    pocs: list[PocsResult]

    def median_iterations(self) -> dict[str, float]:
        return {
            "dgtc": statistics.median(tr.iterations_used for tr in self.dgtc),
            "dgpc": statistics.median(tr.iterations_used for tr in self.dgpc),
        }

    def median_curve(self, algo: str) -> np.ndarray:
        """Per-iteration median consensus metric (short runs padded with
        their final value)."""
        traces = {"dgtc": self.dgtc, "dgpc": self.dgpc}[algo]
        length = max(len(tr.records) for tr in traces)
        curves = np.empty((len(traces), length))
        for i, tr in enumerate(traces):
            curve = tr.consensus_curve
            curves[i, :len(curve)] = curve
            curves[i, len(curve):] = curve[-1]
        return np.median(curves, axis=0)


def validation_study(n: int, q: int, rho: float, epsilon: float, trials: int,
                     max_iters: int | None = None,
                     threshold: float = DEFAULT.convergence_threshold,
                     base_seed: int = 0, step_size: float | None = None,
                     pocs_cycles: int = 40, max_attempts: int = 100,
                     tol: Tolerances = DEFAULT) -> ValidationResult:
    """Monte-Carlo convergence runs on `trials` connected instances.

    Trial i uses instance seed base_seed + i.  Both distributed algorithms
    run to `threshold`; the gradient-projection step defaults to 0.99 of its
    sufficient bound per instance.  The baseline performs `pocs_cycles`
    cycles of projections from the origin.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    seeds, dgtc_traces, dgpc_traces, pocs_results = [], [], [], []
    for trial in range(trials):
        seed = base_seed + trial
        loc = make_localization_instance(n, q, rho, epsilon, seed, max_attempts)
        inst = loc.game_instance
        seeds.append(seed)

        state = initial_state(inst, loc.layout, seed=seed)
        dgtc_traces.append(run(state, "dgtc", max_iters, threshold, tol))

        s = step_size if step_size is not None else default_step_size(inst)
        state = initial_state(inst, loc.layout, step_size=s, seed=seed)
        dgpc_traces.append(run(state, "dgpc", max_iters, threshold, tol))

        x, disp = pocs_run(inst, np.zeros(q), pocs_cycles)
        pocs_results.append(PocsResult(x, disp, float(np.max(inst.projector.distances(
            np.broadcast_to(x, (inst.n, q)))))))
    return ValidationResult(base_seed, seeds, dgtc_traces, dgpc_traces, pocs_results)


@dataclass(frozen=True)
class SweepRecord:
    """One connected realization of the rate sweep."""

    trial: int
    seed: int  # sub-seed (attempt counter); instance = rng key (base_seed, seed)
    rho: float
    fiedler: float
    iters_dgtc: int
    conv_dgtc: bool
    iters_dgpc: int
    conv_dgpc: bool


def rate_sweep(n: int, q: int, rho_min: float, rho_max: float, realizations: int,
               threshold: float = DEFAULT.convergence_threshold, base_seed: int = 0,
               epsilon: float = 0.01, max_iters: int | None = None,
               max_attempts: int | None = None,
               tol: Tolerances = DEFAULT) -> list[SweepRecord]:
    """Iterations-to-threshold across network densities.

    Every attempt draws a fresh communication range uniform in
    [rho_min, rho_max] and a fresh layout; disconnected layouts are skipped
    (the kept density distribution is therefore conditioned on connectivity)
    until `realizations` connected records exist.  Deterministic per
    base_seed.
    """
    if not rho_min < rho_max:
        raise ValueError(f"need rho_min < rho_max, got [{rho_min}, {rho_max}]")
    if realizations < 1:
        raise ValueError(f"realizations must be positive, got {realizations}")
    cap = max_attempts if max_attempts is not None else 200 * realizations + 100
    records: list[SweepRecord] = []
    attempt = 0
    while len(records) < realizations:
        if attempt >= cap:
            raise GenerationError(
                f"only {len(records)}/{realizations} connected realizations "
                f"after {attempt} attempts")
        rng = rng_for(base_seed, attempt)
        sub_seed = attempt
        attempt += 1
        rho = rho_min + (rho_max - rho_min) * rng.random()
        positions = rng.random((n, q))
        graph = graph_from_positions(positions, rho)
        if not is_connected(graph):
            continue
        source = 0.25 + 0.5 * rng.random(q)
        loc = LocalizationInstance(
            layout=GeometricLayout(positions, rho),
            graph=graph,
            source=source,
            epsilon=float(epsilon),
            sets=localization_sets(positions, source, epsilon),
            seed=sub_seed,
        )
        inst = loc.game_instance

        tr_dgtc = run(initial_state(inst, loc.layout, seed=sub_seed),
                      "dgtc", max_iters, threshold, tol)
        tr_dgpc = run(initial_state(inst, loc.layout, step_size=default_step_size(inst),
                                    seed=sub_seed),
                      "dgpc", max_iters, threshold, tol)
        records.append(SweepRecord(
            trial=len(records),
            seed=sub_seed,
            rho=float(rho),
            fiedler=fiedler_value(graph),
            iters_dgtc=tr_dgtc.iterations_used,
            conv_dgtc=tr_dgtc.converged,
            iters_dgpc=tr_dgpc.iterations_used,
            conv_dgpc=tr_dgpc.converged,
        ))
    return records


def median_split(records: list[SweepRecord], fiedler_cut: float) -> dict[str, float | int]:
    """Median iteration comparison on the sparse subsample (fiedler < cut)
    and over the full range."""
    sparse = [r for r in records if r.fiedler < fiedler_cut]
    out: dict[str, float | int] = {"num_sparse": len(sparse), "num_total": len(records)}
    if sparse:
        out["sparse_median_dgtc"] = statistics.median(r.iters_dgtc for r in sparse)
        out["sparse_median_dgpc"] = statistics.median(r.iters_dgpc for r in sparse)
    out["full_median_dgtc"] = statistics.median(r.iters_dgtc for r in records)
    out["full_median_dgpc"] = statistics.median(r.iters_dgpc for r in records)
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def validation_csv_text(result: ValidationResult) -> str:
    """CSV of all traces: algo,trial,seed,t,consensus_metric,potential.

    Baseline rows reuse the layout with per-cycle displacement in the
    consensus_metric column and nan potential (undefined for a single
    point).
    """
    lines = ["algo,trial,seed,t,consensus_metric,potential"]
    for algo, traces in (("dgtc", result.dgtc), ("dgpc", result.dgpc)):
        for trial, tr in enumerate(traces):
            seed = result.seeds[trial]
            for r in tr.records:
                lines.append(f"{algo},{trial},{seed},{r.t},{_fmt(r.consensus_metric)},{_fmt(r.potential)}")
    for trial, pr in enumerate(result.pocs):
        seed = result.seeds[trial]
        for cycle, disp in enumerate(pr.displacements, start=1):
            lines.append(f"pocs,{trial},{seed},{cycle},{_fmt(disp)},nan")
    return "\n".join(lines) + "\n"


def sweep_csv_text(records: list[SweepRecord]) -> str:
    """CSV of the sweep: trial,seed,rho,fiedler,iters_dgtc,conv_dgtc,iters_dgpc,conv_dgpc."""
    lines = ["trial,seed,rho,fiedler,iters_dgtc,conv_dgtc,iters_dgpc,conv_dgpc"]
    for r in records:
        lines.append(
            f"{r.trial},{r.seed},{_fmt(r.rho)},{_fmt(r.fiedler)},"
            f"{r.iters_dgtc},{int(r.conv_dgtc)},{r.iters_dgpc},{int(r.conv_dgpc)}")
    return "\n".join(lines) + "\n"


def write_text(text: str, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
