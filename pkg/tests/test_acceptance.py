"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The Monte Carlo cells run once per session through the experiment harness,
are written to CSV, and are reused by the criteria that read them.  The
determinism criterion reruns every cell from scratch and compares bytes.
"""
import time

import numpy as np
import pytest

from mlnet.gof import estimate_block_probabilities, largest_singular_value, oracle_residual_matrix
from mlnet.harness import default_spec, run_experiment, write_experiment
from mlnet.model import CommunityLabels, GeneratorConfig, MultiLayerNetwork, simulate
from mlnet.selection import candidate_sequence, index_of_pair
from mlnet.spectral import debiased_gram_sum

from conftest import ACCEPTANCE_LINES, block_oracle, gram_oracle, random_network_array

SEED = 20240611


def suite_specs():
    return {
        "null": default_spec("stat-behavior", n=(200, 400), L=20, rho=(0.2,),
                             candidates=((3, 5), (2, 5), (3, 4)), replications=50, seed=SEED),
        "discrimination": default_spec("discrimination", n=(800,), L=15, structures=((3, 4),),
                                       eps=(0.2,), replications=50, seed=SEED),
        "accuracy-dense": default_spec("accuracy-sweep", n=(400,), L=15, rho=(0.2,),
                                       structures=((2, 3),), replications=50, seed=SEED),
        "accuracy-sparse": default_spec("accuracy-sweep", n=(200,), L=15, rho=(0.1,),
                                        structures=((3, 5),), replications=50, seed=SEED),
        "thresholds": default_spec("threshold-sensitivity", n=(800,), L=15, rho=(0.2,),
                                   structures=((3, 5),), eps=(0.1, 0.2, 0.5), tau_const=(2.0,),
                                   tau_scale=(4.0,), replications=25, seed=SEED),
    }


def run_suite(out_dir):
    results, paths, elapsed = {}, {}, {}
    for name, spec in suite_specs().items():
        start = time.perf_counter()
        results[name] = run_experiment(spec)
        elapsed[name] = time.perf_counter() - start
        paths[name] = write_experiment(results[name], out_dir / name)
    return results, paths, elapsed


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    return run_suite(tmp_path_factory.mktemp("suite"))


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _stat_rows(result, n):
    return {(r["k_s0"], r["k_r0"]): r for r in result.table if r["n"] == n}


def test_criterion_1_null_behavior(suite):
    results, _, elapsed = suite
    row = _stat_rows(results["null"], 400)[(3, 5)]
    mean, sd = row["mean_t_hat"], row["sd_t_hat"]
    ok = -0.05 <= mean <= 0.02 and sd <= 0.05 and elapsed["null"] <= 180
    report(1, "null behavior at (3,5), n=400", ok,
           f"mean={mean:.4f} in [-0.05,0.02], sd={sd:.4f} <= 0.05, "
           f"runtime={elapsed['null']:.0f}s <= 180s")


def test_criterion_2_underfit_divergence(suite):
    results, _, _ = suite
    at400 = _stat_rows(results["null"], 400)
    at200 = _stat_rows(results["null"], 200)
    m25, m34 = at400[(2, 5)]["mean_t_hat"], at400[(3, 4)]["mean_t_hat"]
    m25_small = at200[(2, 5)]["mean_t_hat"]
    ok = 4.2 <= m25 <= 6.3 and 0.1 <= m34 <= 1.5 and m25 > m25_small
    report(2, "underfitting divergence", ok,
           f"(2,5) mean={m25:.3f} in [4.2,6.3], (3,4) mean={m34:.3f} in [0.1,1.5], "
           f"(2,5) n=200 mean={m25_small:.3f} < n=400 mean")


def test_criterion_3_perfect_discrimination(suite):
    results, _, elapsed = suite
    rates = {r["scenario"]: r["prob_correct"] for r in results["discrimination"].table}
    ok = len(rates) == 4 and all(v == 1.0 for v in rates.values()) and elapsed["discrimination"] <= 300
    report(3, "discrimination at (3,4), n=800", ok,
           ", ".join(f"{k}={v:.2f}" for k, v in rates.items())
           + f", runtime={elapsed['discrimination']:.0f}s <= 300s")


def _accuracy(result):
    return {r["algorithm"]: r["accuracy"] for r in result.table}


def test_criterion_4_selection_accuracy(suite):
    results, _, _ = suite
    dense = _accuracy(results["accuracy-dense"])
    sparse = _accuracy(results["accuracy-sparse"])
    ok = (dense["mldigof"] >= 0.95 and dense["mlrdigof"] >= 0.95
          and sparse["mldigof"] <= 0.3 and sparse["mlrdigof"] >= sparse["mldigof"])
    report(4, "selection accuracy", ok,
           f"(2,3) n=400: mldigof={dense['mldigof']:.2f}, mlrdigof={dense['mlrdigof']:.2f} (>= 0.95); "
           f"(3,5) n=200 rho=0.1: mldigof={sparse['mldigof']:.2f} <= 0.3, "
           f"mlrdigof={sparse['mlrdigof']:.2f} >= mldigof")


def test_criterion_5_threshold_sensitivity(suite):
    results, _, _ = suite
    acc = {(r["parameter"], r["value"]): r["accuracy"] for r in results["thresholds"].table}
    eps_ok = all(acc[("eps", e)] >= 0.9 for e in (0.1, 0.2, 0.5))
    ok = eps_ok and acc[("tau_const", 2.0)] < 0.5 and acc[("tau_scale", 4.0)] >= 0.9
    report(5, "threshold sensitivity at n=800", ok,
           ", ".join(f"eps={e}: {acc[('eps', e)]:.2f}" for e in (0.1, 0.2, 0.5))
           + f" (>= 0.9); tau=2: {acc[('tau_const', 2.0)]:.2f} < 0.5; "
           f"tau=4 ln n: {acc[('tau_scale', 4.0)]:.2f} >= 0.9")


def test_criterion_6_oracle_statistic():
    n, L, reps = 400, 20, 50
    below, worst_var, violations = 0, 0.0, 0
    off = ~np.eye(n, dtype=bool)
    for rep in range(reps):
        pm = simulate(GeneratorConfig(n, L, 3, 5, 0.2, seed=SEED + rep))
        R = oracle_residual_matrix(pm.network, pm.sender, pm.receiver, pm.blocks).matrix
        below += largest_singular_value(R) - 2 < 0.1
        worst_var = max(worst_var, abs(R[off].var() * (n - 1) - 1))
        B = pm.blocks.blocks
        delta = min(B.min(), 1 - B.max())
        violations += int((np.abs(R) > np.sqrt(L / ((n - 1) * delta * (1 - delta)))).sum())
    ok = below >= 49 and worst_var <= 0.1 and violations == 0
    report(6, "oracle residual", ok,
           f"T_n < 0.1 in {below}/{reps} (>= 49), max relative variance error={worst_var:.4f} "
           f"<= 0.1, entry-bound violations={violations}")


def test_criterion_7_numerical_oracles(suite):
    results, _, _ = suite
    rng = np.random.default_rng(SEED)
    svd_err = 0.0
    for _ in range(100):
        M = rng.standard_normal((50, 50))
        ref = np.linalg.svd(M, compute_uv=False)[0]
        svd_err = max(svd_err, abs(largest_singular_value(M, "lanczos") - ref) / ref)
    gram_ok = True
    for _ in range(20):
        net = MultiLayerNetwork(random_network_array(rng, 8, int(rng.integers(1, 4)),
                                                     float(rng.uniform(0.1, 0.9))))
        for side in ("sender", "receiver"):
            gram_ok &= np.array_equal(debiased_gram_sum(net, side), gram_oracle(net.layers, side))
    block_ok = True
    for _ in range(20):
        n, ks, kr = int(rng.integers(4, 10)), int(rng.integers(1, 4)), int(rng.integers(1, 4))
        A = random_network_array(rng, n, int(rng.integers(1, 4)))
        gs, gr = rng.integers(0, ks, n), rng.integers(0, kr, n)
        B = estimate_block_probabilities(MultiLayerNetwork(A), CommunityLabels(gs, ks),
                                         CommunityLabels(gr, kr)).blocks
        block_ok &= np.array_equal(B, block_oracle(A, gs, gr, ks, kr))
    n_evals, bound_ok = 0, True
    for result in results.values():
        for rec in result.records:
            for t in rec.statistics.values():
                n_evals += 1
                bound_ok &= t <= np.sqrt(2 * rec.n * rec.L)
    ok = svd_err <= 1e-8 and gram_ok and block_ok and bound_ok
    report(7, "numerical oracles", ok,
           f"max relative sigma_1 error={svd_err:.1e} <= 1e-8, Gram exact={gram_ok}, "
           f"block average exact={block_ok}, bound held on {n_evals} evaluations={bound_ok}")


TABLE_ORDER = [
    (1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1), (1, 4), (2, 3), (3, 2), (4, 1),
    (1, 5), (2, 4), (3, 3), (4, 2), (5, 1), (1, 6), (2, 5), (3, 4), (4, 3), (5, 2),
    (6, 1), (1, 7), (2, 6), (3, 5), (4, 4), (5, 3), (6, 2), (7, 1), (1, 8), (2, 7),
    (3, 6), (4, 5), (5, 4), (6, 3), (7, 2), (8, 1), (1, 9), (2, 8), (3, 7), (4, 6),
    (5, 5), (6, 4), (7, 3), (8, 2), (9, 1), (1, 10), (2, 9), (3, 8), (4, 7), (5, 6),
    (6, 5), (7, 4), (8, 3), (9, 2), (10, 1), (2, 10), (3, 9), (4, 8), (5, 7), (6, 6),
    (7, 5), (8, 4), (9, 3), (10, 2), (3, 10), (4, 9), (5, 8), (6, 7), (7, 6), (8, 5),
    (9, 4), (10, 3), (4, 10), (5, 9), (6, 8), (7, 7), (8, 6), (9, 5), (10, 4), (5, 10),
    (6, 9), (7, 8), (8, 7), (9, 6), (10, 5), (6, 10), (7, 9), (8, 8), (9, 7), (10, 6),
    (7, 10), (8, 9), (9, 8), (10, 7), (8, 10), (9, 9), (10, 8), (9, 10), (10, 9), (10, 10),
]


def test_criterion_8_candidate_order():
    seq = [tuple(p) for p in candidate_sequence(10)]
    matches = sum(a == b for a, b in zip(seq, TABLE_ORDER))
    inverse = all(index_of_pair(p, 10) == m for m, p in enumerate(TABLE_ORDER, start=1))
    ok = len(seq) == 100 and matches == 100 and inverse
    report(8, "candidate order", ok,
           f"{matches}/100 positions match the published order, m=42 -> {seq[41]}, "
           f"index_of_pair inverse={inverse}")


def test_criterion_9_determinism(suite, tmp_path):
    _, first, _ = suite
    _, second, _ = run_suite(tmp_path)
    mismatched = [f"{name}/{kind}" for name in first for kind in ("table", "statistics", "choices")
                  if first[name][kind].read_bytes() != second[name][kind].read_bytes()]
    report(9, "bit-identical rerun", not mismatched,
           f"{3 * len(first)} CSV files compared, mismatches={mismatched or 'none'}")
