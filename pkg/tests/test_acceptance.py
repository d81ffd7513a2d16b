"""Acceptance suite.

One test per acceptance criterion, each at its stated tolerance, printing a
pass line when it holds (run with ``pytest tests/test_acceptance.py -v -s``).
The heavy fixtures (ten 100-node localization runs; a 200-realization rate
sweep) are session-scoped and shared across criteria.
"""

import statistics
import time

import numpy as np
import pytest

from conftest import rand_feasible_instance, rand_feasible_profile, sample_point
from constrained_consensus.engine import initial_state, pocs_run, run
from constrained_consensus.experiments import (
    make_localization_instance,
    rate_sweep,
    sweep_csv_text,
    validation_csv_text,
    validation_study,
)
from constrained_consensus.game import (
    best_response,
    cost_gradient,
    default_step_size,
    lipschitz_constant,
    max_set_distance,
    potential,
    utility,
)

RNG_SEED = 20240901


def report(num: int, text: str) -> None:
    print(f"\ncriterion {num:02d} PASS - {text}")


@pytest.fixture(scope="session")
def validation_bundle():
    """Ten connected localization instances (N=100, q=2, rho=0.3, eps=0.01)
    run deep with both algorithms; per-round structural invariants are
    enforced by the engine during these runs."""
    bundle = []
    for seed in range(10):
        loc = make_localization_instance(100, 2, 0.3, 0.01, seed=seed)
        inst = loc.game_instance
        t0 = time.perf_counter()
        # a consensus point on a constraint boundary throttles the tail
        # rate, so the iteration budget is generous (worst seed: ~145k)
        tr_dgtc = run(initial_state(inst, loc.layout), "dgtc",
                      max_iters=600_000, threshold=1e-9)
        tr_dgpc = run(initial_state(inst, loc.layout, step_size=default_step_size(inst)),
                      "dgpc", max_iters=600_000, threshold=1e-9)
        elapsed = time.perf_counter() - t0
        bundle.append((loc, tr_dgtc, tr_dgpc, elapsed))
    return bundle


@pytest.fixture(scope="session")
def sweep_records():
    """200 connected realizations, q=2, rho uniform in [0.1, 0.4], at the
    1e-5 threshold (50-node networks keep the suite's runtime tractable)."""
    return rate_sweep(n=50, q=2, rho_min=0.1, rho_max=0.4, realizations=200,
                      threshold=1e-5, base_seed=RNG_SEED, max_iters=30_000)


def test_criterion_01_convergence_reproduction(validation_bundle):
    for loc, tr_dgtc, tr_dgpc, elapsed in validation_bundle:
        for tr in (tr_dgtc, tr_dgpc):
            assert tr.converged, f"{tr.algo} did not reach 1e-9 on seed {loc.seed}"
            assert min(tr.consensus_curve) < 1e-5
            assert tr.final_metric < 1e-9
        assert elapsed < 60.0, f"instance took {elapsed:.1f}s"
    iters = [(tr1.iterations_used, tr2.iterations_used) for _, tr1, tr2, _ in validation_bundle]
    report(1, f"10/10 instances below 1e-9 for both algorithms "
              f"(iterations dgtc/dgpc: {iters[0][0]}/{iters[0][1]} on the first)")


def test_criterion_02_pocs_baseline(validation_bundle):
    worst = 0.0
    for loc, _, _, _ in validation_bundle:
        inst = loc.game_instance
        x, _ = pocs_run(inst, np.zeros(2), cycles=40)
        worst = max(worst, max(s.distance_to(x) for s in inst.sets))
    assert worst <= 1e-6
    report(2, f"40 projection cycles leave max set distance {worst:.2e} <= 1e-6")


def test_criterion_03_exact_potential_suite():
    rng = np.random.default_rng(RNG_SEED + 3)
    failures = 0
    for _ in range(40):  # 40 x 25 = 1000 single-node changes
        inst, _ = rand_feasible_instance(rng)
        for _ in range(25):
            p1 = rand_feasible_profile(inst, rng)
            n = int(rng.integers(inst.n))
            p2 = p1.copy()
            p2[n] = sample_point(inst.sets[n], rng)
            dphi = potential(inst, p2) - potential(inst, p1)
            dutil = utility(inst, p2, n) - utility(inst, p1, n)
            if abs(dphi - dutil) > 1e-9 * max(1.0, abs(dphi), abs(dutil)):
                failures += 1
    for _ in range(40):  # 40 x 5 = 200 independent-set changes
        inst, _ = rand_feasible_instance(rng)
        for _ in range(5):
            p1 = rand_feasible_profile(inst, rng)
            chosen = []
            for cand in rng.permutation(inst.n):
                if all(inst.adjacency[cand, c] == 0 for c in chosen):
                    chosen.append(int(cand))
            p2 = p1.copy()
            for n in chosen:
                p2[n] = sample_point(inst.sets[n], rng)
            dphi = potential(inst, p2) - potential(inst, p1)
            dutil = sum(utility(inst, p2, n) - utility(inst, p1, n) for n in chosen)
            if abs(dphi - dutil) > 1e-9 * max(1.0, abs(dphi), abs(dutil)):
                failures += 1
    assert failures == 0
    report(3, "1000 single-node + 200 independent-set deviations, zero failures")


def test_criterion_04_gradient_matches_finite_differences():
    rng = np.random.default_rng(RNG_SEED + 4)
    h = 1e-6
    worst = 0.0
    for _ in range(20):  # 20 x 5 = 100 random profiles, N <= 10, q <= 4
        inst, _ = rand_feasible_instance(rng, n_max=10, q_max=4)
        for _ in range(5):
            p = rand_feasible_profile(inst, rng)
            grad = cost_gradient(inst, p)
            fd = np.empty_like(grad)
            flat = p.ravel()
            for j in range(flat.size):
                up, down = flat.copy(), flat.copy()
                up[j] += h
                down[j] -= h
                fd[j] = (potential(inst, down.reshape(p.shape))
                         - potential(inst, up.reshape(p.shape))) / (2 * h)
            rel = np.linalg.norm(grad - fd) / max(1.0, np.linalg.norm(grad))
            worst = max(worst, rel)
    assert worst < 1e-6
    report(4, f"100 profiles, worst relative error {worst:.2e} < 1e-6")


def test_criterion_05_lipschitz_bound():
    rng = np.random.default_rng(RNG_SEED + 5)
    violations = 0
    for _ in range(20):  # 20 graphs x 50 pairs = 1000
        inst, _ = rand_feasible_instance(rng)
        lip = lipschitz_constant(inst)
        for _ in range(50):
            x = rng.uniform(-3, 3, (inst.n, inst.q))
            y = rng.uniform(-3, 3, (inst.n, inst.q))
            lhs = np.linalg.norm(cost_gradient(inst, x) - cost_gradient(inst, y))
            if lhs > lip * np.linalg.norm(x - y) + 1e-12:
                violations += 1
    assert violations == 0
    report(5, "1000 random pairs on 20 graphs, zero violations")


def test_criterion_06_best_response_optimality():
    rng = np.random.default_rng(RNG_SEED + 6)
    worst = -np.inf
    for _ in range(100):  # 100 configurations x 10 candidates = 1000
        inst, _ = rand_feasible_instance(rng)
        p = rand_feasible_profile(inst, rng)
        n = int(rng.integers(inst.n))
        p_br = p.copy()
        p_br[n] = best_response(inst, p, n)
        u_br = utility(inst, p_br, n)
        for _ in range(10):
            p_cand = p.copy()
            p_cand[n] = sample_point(inst.sets[n], rng)
            worst = max(worst, utility(inst, p_cand, n) - u_br)
    assert worst <= 1e-9
    report(6, f"1000 sampled candidates, max shortfall {worst:.2e} <= 1e-9")


def test_criterion_07_structural_invariants(validation_bundle, sweep_records):
    """The engine asserts independence/monotonicity/feasibility every round
    and would have raised on any violation while the criterion-1 runs and the
    criterion-8 sweep executed; the best-response traces are re-checked here
    from their recorded update activity."""
    rounds = 0
    for loc, tr_dgtc, tr_dgpc, _ in validation_bundle:
        inst = loc.game_instance
        prev_phi = -np.inf
        for rec in tr_dgtc.records:
            updated = np.array(rec.updated, dtype=int)
            if updated.size > 1:
                assert not inst.adjacency[np.ix_(updated, updated)].any(), \
                    f"adjacent winners at t={rec.t}"
            assert rec.potential >= prev_phi - 1e-12
            assert rec.potential <= 0.0
            prev_phi = rec.potential
            rounds += 1
        for tr in (tr_dgtc, tr_dgpc):
            assert max_set_distance(inst, tr.final_profile) <= 1e-9
    assert len(sweep_records) == 200  # sweep runs completed under per-round checks
    report(7, f"winner independence + potential monotonicity verified on "
              f"{rounds} recorded rounds; feasibility enforced per round in all runs")


def test_criterion_08_crossover_trend(sweep_records):
    assert len(sweep_records) >= 200
    sparse = [r for r in sweep_records if r.fiedler < 3.0]
    assert len(sparse) >= 30, "sparse subsample unexpectedly small"
    med_dgtc = statistics.median(r.iters_dgtc for r in sparse)
    med_dgpc = statistics.median(r.iters_dgpc for r in sparse)
    assert med_dgtc < med_dgpc, \
        f"sparse medians: best-response {med_dgtc} vs gradient {med_dgpc}"
    full_dgtc = statistics.median(r.iters_dgtc for r in sweep_records)
    full_dgpc = statistics.median(r.iters_dgpc for r in sweep_records)
    report(8, f"fiedler<3 medians: best-response {med_dgtc} < gradient {med_dgpc} "
              f"({len(sparse)} records); full range (report only): "
              f"{full_dgtc} vs {full_dgpc} on {len(sweep_records)}")


def test_criterion_09_fixed_point_implies_consensus():
    rng = np.random.default_rng(RNG_SEED + 9)
    tiny_rounds = 0
    for _ in range(50):
        inst, _ = rand_feasible_instance(rng)
        trace = run(initial_state(inst), "dgtc", threshold=0.0, max_iters=60 * inst.n)
        for rec in trace.records:
            if rec.max_metric is not None and rec.max_metric <= 1e-18:
                tiny_rounds += 1
                assert rec.consensus_metric <= 1e-6, \
                    f"metric {rec.consensus_metric!r} with update {rec.max_metric!r}"
    assert tiny_rounds > 0, "no sub-1e-18 update rounds observed"
    report(9, f"{tiny_rounds} rounds with all update metrics <= 1e-18, "
              f"every one at consensus metric <= 1e-6")


def test_criterion_10_determinism(tmp_path):
    study_kwargs = dict(n=12, q=2, rho=0.45, epsilon=0.01, trials=2,
                        threshold=1e-5, base_seed=77)
    text1 = validation_csv_text(validation_study(**study_kwargs))
    text2 = validation_csv_text(validation_study(**study_kwargs))
    assert text1 == text2
    sweep_kwargs = dict(n=12, q=2, rho_min=0.3, rho_max=0.6, realizations=3,
                        threshold=1e-4, base_seed=77, max_iters=3000)
    sw1 = sweep_csv_text(rate_sweep(**sweep_kwargs))
    sw2 = sweep_csv_text(rate_sweep(**sweep_kwargs))
    assert sw1 == sw2
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text(text1)
    b.write_text(text2)
    assert a.read_bytes() == b.read_bytes()
    report(10, "byte-identical CSV output for repeated runs with the same seed")
