"""Exit criteria for the package, one test per criterion.

Each test records a label and a one-line detail; ``conftest.py`` prints a
PASS/FAIL line per criterion at the end of the run. Tolerances and runtime
budgets are fixed here and are not tuned per run.
"""
import json
import math
import time

import numpy as np
import pytest

from qlint import boolean_core as bc
from qlint.cli import main as cli_main
from qlint.harness import ExperimentConfig, run_sweep
from qlint.quantum_sim import (
    MarkedOracle,
    QueryCounter,
    angle_split,
    deutsch_jozsa_state,
    grover_iterate,
    outside_mass,
)
from qlint.testers import (
    ExactTheta,
    PaperEpsilon,
    Verdict,
    blr_test,
    dj_repetition_test,
    exact_algorithm2_error,
    exact_algorithm3_success,
    grover_test,
)


def naive_sign_matrix(n):
    """(-1)**(omega . x) for every pair, built from popcounts without any butterfly."""
    idx = np.arange(1 << n)
    parity = np.array([bin(v).count("1") & 1 for v in range(1 << n)], dtype=np.int64)
    return 1 - 2 * parity[idx[:, None] & idx[None, :]]


def naive_spectra(tables):
    n = tables[0].n
    signs = np.stack([t.signs for t in tables], axis=1)
    return (naive_sign_matrix(n) @ signs).T


@pytest.fixture
def criterion(record_property):
    def tag(label, detail=""):
        record_property("criterion", label)
        record_property("detail", detail)
    return tag


def test_c1_spectral_correctness(criterion):
    criterion("C1 spectral correctness")
    start = time.perf_counter()
    rng = np.random.default_rng(1001)
    for n in (4, 6, 8, 10):
        tables = [bc.random_function(n, rng) for _ in range(100)]
        fast = np.stack([bc.walsh_transform(f).values for f in tables])
        assert np.array_equal(fast, naive_spectra(tables)), f"mismatch at n={n}"
        sq = (fast.astype(object) ** 2).sum(axis=1)
        assert all(int(s) == 1 << (2 * n) for s in sq), f"Parseval fails at n={n}"
    elapsed = time.perf_counter() - start
    criterion("C1 spectral correctness", f"400 functions exact, {elapsed:.2f}s (budget 10s)")
    assert elapsed < 10


def test_c2_dj_identity(criterion):
    criterion("C2 DJ identity")
    start = time.perf_counter()
    rng = np.random.default_rng(1002)
    worst = 0.0
    for i in range(100):
        n = 1 + i % 10
        f = bc.random_function(n, rng)
        psi = deutsch_jozsa_state(f, QueryCounter())
        nw = naive_spectra([f])[0] / 2**n
        worst = max(worst, float(np.max(np.abs(psi.amps - nw))))
    elapsed = time.perf_counter() - start
    criterion("C2 DJ identity", f"max |amp - NW| = {worst:.1e} (tol 1e-12), {elapsed:.2f}s (budget 10s)")
    assert worst <= 1e-12
    assert elapsed < 10


def test_c3_proposition_amplitude(criterion):
    criterion("C3 Grover amplitude sin((2t+1)theta)")
    start = time.perf_counter()
    rng = np.random.default_rng(1003)
    worst = 0.0
    checked = 0
    for n in (4, 6, 8):
        done = 0
        while done < 50:
            f = bc.random_function(n, rng)
            if bc.nonlinearity(f) == 0:
                continue
            done += 1
            psi = deutsch_jozsa_state(f, QueryCounter())
            for a0 in range(1 << n):
                if abs(psi.amps[a0]) == 1.0:
                    continue
                _, _, theta = angle_split(psi, a0)
                oracle = MarkedOracle(n, a0)
                state = psi
                for t in range(0, 101):
                    if t:
                        state = grover_iterate(state, psi, oracle, QueryCounter())
                    err = abs(outside_mass(state, a0) - abs(math.sin((2 * t + 1) * theta)))
                    worst = max(worst, err)
                    checked += 1
    elapsed = time.perf_counter() - start
    criterion("C3 Grover amplitude sin((2t+1)theta)",
              f"{checked} (f, a0, t) cases, max err {worst:.1e} (tol 1e-9), {elapsed:.1f}s (budget 60s)")
    assert worst <= 1e-9
    assert elapsed < 60


def test_c4_one_sided_error(criterion):
    criterion("C4 one-sided error")
    start = time.perf_counter()
    false_rejections = 0
    runs = 0
    for n in range(1, 7):
        for _, _, f in bc.affine_functions(n):
            for seed in range(100):
                reports = (
                    blr_test(f, 10, seed),
                    dj_repetition_test(f, 10, seed),
                    grover_test(f, ExactTheta(), seed),
                    grover_test(f, PaperEpsilon(0.05), seed),
                )
                runs += len(reports)
                false_rejections += sum(r.verdict is Verdict.NOT_AFFINE for r in reports)
    elapsed = time.perf_counter() - start
    criterion("C4 one-sided error",
              f"{false_rejections} false rejections in {runs} runs, {elapsed:.1f}s (budget 60s)")
    assert false_rejections == 0
    assert elapsed < 60


def test_c5_algorithm2_bound(criterion):
    criterion("C5 Algorithm 2 error bound")
    start = time.perf_counter()
    violations = 0
    count = 0
    worst_gap = -math.inf
    for n in range(1, 5):
        size = 1 << n
        for code in range(1 << size):
            bits = (code >> np.arange(size)) & 1
            f = bc.TruthTable(n, bits)
            eps = bc.nonlinearity(f) / size
            count += 1
            for t in range(6):
                bound = (1 - 2 * eps) ** t
                err = exact_algorithm2_error(f, t)
                worst_gap = max(worst_gap, err - bound)
                if err > bound * (1 + 1e-12):
                    violations += 1
    elapsed = time.perf_counter() - start
    criterion("C5 Algorithm 2 error bound",
              f"{count} functions x t<=5, {violations} violations, max(err-bound)={worst_gap:.2e}, "
              f"{elapsed:.1f}s (budget 120s)")
    assert count == 4 + 16 + 256 + 65536
    assert violations == 0
    assert elapsed < 120


def test_c6_monte_carlo_vs_exact(criterion):
    criterion("C6 Monte Carlo vs exact")
    start = time.perf_counter()
    n, trials, dj_rounds = 10, 10_000, 2
    rng = np.random.default_rng(1006)
    ks = np.linspace(10, bc.max_planted_distance(n), 20).astype(int)
    worst = 0.0
    for i, k in enumerate(ks):
        f = bc.plant_distance(n, int(rng.integers(1 << n)), int(rng.integers(2)), int(k), rng)
        p2 = exact_algorithm2_error(f, dj_rounds)
        p3 = exact_algorithm3_success(f, ExactTheta())
        base = 1_000_000 * (i + 1)
        affine = sum(dj_repetition_test(f, dj_rounds, base + s).verdict is Verdict.AFFINE
                     for s in range(trials))
        rejected = sum(grover_test(f, ExactTheta(), base + trials + s).verdict is Verdict.NOT_AFFINE
                       for s in range(trials))
        for p, hits in ((p2, affine), (p3, rejected)):
            sd = math.sqrt(p * (1 - p) / trials)
            z = abs(hits / trials - p) / sd if sd > 0 else (0.0 if hits / trials == p else math.inf)
            worst = max(worst, z)
    elapsed = time.perf_counter() - start
    criterion("C6 Monte Carlo vs exact",
              f"20 fixtures x 2 algorithms x 1e4 trials, max |z| = {worst:.2f} (tol 4), "
              f"{elapsed:.0f}s (budget 300s)")
    assert worst <= 4.0
    assert elapsed < 300


def test_c7_headline_scaling(criterion):
    criterion("C7 exponent separation")
    start = time.perf_counter()
    grover = run_sweep(ExperimentConfig(n=12, algorithm="grover", policy="exact_theta"))
    dj = run_sweep(ExperimentConfig(n=12, algorithm="dj"))
    elapsed = time.perf_counter() - start
    gs, gr = grover.fitted_exponent, grover.fit_residual
    ds, dr = dj.fitted_exponent, dj.fit_residual
    g_in = 0.4 <= gs <= 0.6
    d_in = 0.85 <= ds <= 1.15
    apart = gs + 2 * gr < ds - 2 * dr
    criterion(
        "C7 exponent separation",
        f"grover slope {gs:.3f} in [0.4,0.6]: {g_in}; dj slope {ds:.3f} in [0.85,1.15]: {d_in}; "
        f"[{gs - 2 * gr:.3f},{gs + 2 * gr:.3f}] vs [{ds - 2 * dr:.3f},{ds + 2 * dr:.3f}] disjoint: {apart}; "
        f"t*: grover {[p.t_star for p in grover.points]} dj {[p.t_star for p in dj.points]}; "
        f"{elapsed:.0f}s (budget 1200s)",
    )
    assert g_in
    assert d_in
    assert apart
    assert elapsed < 1200


def test_c8_sweep_determinism(criterion, tmp_path, capsys):
    criterion("C8 sweep determinism")
    cfg = {"n": 10, "epsilons": [0.25, 0.125, 0.0625, 0.03125, 0.015625], "trials": 300,
           "target": 2 / 3, "algorithm": "grover", "policy": "exact_theta", "seed": 8,
           "fixture": "planted"}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    outputs = []
    for tag, workers in (("s1", 1), ("s2", 1), ("p3", 3), ("p5", 5)):
        assert cli_main(["sweep", "--config", str(path), "--out", str(tmp_path / tag),
                         "--workers", str(workers)]) == 0
        outputs.append((tmp_path / f"{tag}.csv").read_bytes())
    capsys.readouterr()
    identical = all(o == outputs[0] for o in outputs)
    criterion("C8 sweep determinism", f"2 serial + 2 parallel runs byte-identical: {identical}")
    assert identical
