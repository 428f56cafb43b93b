"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""
import itertools
import json
import time
from dataclasses import replace

import numpy as np
import pytest

from latitude.baselines import truncated_svd
from latitude.cli import bench_slope, main
from latitude.matrix import (
    constant_factor_alpha,
    frobenius_error,
    maxtimes_product,
    mixed_product_with_alpha,
    sigmoid,
)
from latitude.nmf import nmf_fit
from latitude.nnls import default_tolerance, nnls_solve
from latitude.solver import SolverConfig, build_coefficient_matrix, latitude_fit
from latitude.synth import SynthSpec, desk_spec, gen_planted, instance_seed

pytestmark = pytest.mark.slow

SEEDS = 10
BASE_SEED = 0


def desk_runs(mode, noise, keep_model=False):
    """Fit Latitude, NMF and SVD at rank 5 on 10 desk-scale instances."""
    runs = []
    for rep in range(SEEDS):
        spec = desk_spec(mode=mode, noise_sigma=noise, seed=instance_seed(BASE_SEED, 0, rep))
        clean, noisy, truth = gen_planted(spec)
        cfg = SolverConfig(k=5, seed=rep)
        fact, _ = latitude_fit(noisy, cfg)
        B, C, _ = nmf_fit(noisy, cfg.resolved_nmf_config())
        runs.append(dict(
            latitude=frobenius_error(clean, fact.product())[1],
            nmf=frobenius_error(clean, B @ C)[1],
            svd=frobenius_error(clean, truncated_svd(noisy, 5))[1],
            truth=truth, fact=fact if keep_model else None,
        ))
    return runs


@pytest.fixture(scope="module")
def mixed_runs():
    return desk_runs("mixed", 0.01, keep_model=True)


def test_c01_constant_factor_exactness(criterion):
    rng = np.random.default_rng(1)
    B = np.full((20, 4), np.sqrt(3) / 2)
    C = np.full((4, 15), np.sqrt(3) / 2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        A = rng.uniform(1, 2, (20, 15))
        worst = max(worst, frobenius_error(A, mixed_product_with_alpha(B, C, constant_factor_alpha(A, B, C)))[0])
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 1
    criterion(1, "constant-factor exact fit", ok, f"max abs error {worst:.2e}, {elapsed:.3f}s")
    assert ok


def test_c02_sandwich(criterion):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    violations = 0
    for _ in range(1000):
        n, m, k = rng.integers(1, 9, 3)
        B, C, alpha = rng.random((n, k)), rng.random((k, m)), rng.random((n, m))
        mixed = mixed_product_with_alpha(B, C, alpha)
        violations += int(np.any(maxtimes_product(B, C) > mixed) or np.any(mixed > B @ C))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 5
    criterion(2, "sandwich invariant", ok, f"{violations} violations in 1000, {elapsed:.2f}s")
    assert ok


def _enumerate(B, b):
    best = np.linalg.norm(b)
    for r in range(1, B.shape[1] + 1):
        for S in itertools.combinations(range(B.shape[1]), r):
            xs = np.linalg.lstsq(B[:, S], b, rcond=None)[0]
            if np.all(xs >= 0):
                best = min(best, np.linalg.norm(b - B[:, S] @ xs))
    return best


def test_c03_nnls_optimality(criterion):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    gap = 0.0
    kkt_bad = 0
    for _ in range(200):
        n, k = rng.integers(1, 21), rng.integers(1, 7)
        B, b = rng.normal(size=(n, k)), rng.normal(size=n)
        res = nnls_solve(B, b)
        gap = max(gap, abs(res.residual_norm - _enumerate(B, b)))
        g = B.T @ (B @ res.x - b)
        tol = default_tolerance((B.T @ B)[None])[0]
        kkt_bad += int(np.any(g < -tol) or np.any(np.abs(g[res.x > 0]) > tol) or np.any(res.x < 0))
    elapsed = time.perf_counter() - t0
    ok = gap <= 1e-8 and kkt_bad == 0 and elapsed < 10
    criterion(3, "NNLS optimality", ok, f"max objective gap {gap:.2e}, KKT failures {kkt_bad}, {elapsed:.2f}s")
    assert ok


def test_c04_rewritten_form_identity(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        n, k = rng.integers(1, 30), rng.integers(1, 9)
        B, c, alpha = rng.random((n, k)), rng.random(k), rng.random(n)
        direct = alpha * np.max(B * c, axis=1) + (1 - alpha) * (B @ c)
        got = build_coefficient_matrix(B, c, alpha) @ c
        worst = max(worst, float(np.max(np.abs(got - direct) / np.maximum(np.abs(direct), 1.0))))
    ok = worst <= 1e-12
    criterion(4, "frozen-argmax identity", ok, f"max deviation {worst:.2e}")
    assert ok


def test_c05_solver_dominance(criterion):
    rng = np.random.default_rng(5)
    failures = []
    for i in range(20):
        A = rng.random((30, 25))
        _, rep = latitude_fit(A, SolverConfig(k=3, niter=15, seed=i))
        if not rep.best_error <= rep.init_factor_error:
            failures.append(f"random#{i}")
    for i in range(20):
        _, noisy, _ = gen_planted(SynthSpec(n=60, m=50, k_true=3, density=0.4, seed=100 + i))
        _, rep = latitude_fit(noisy, SolverConfig(k=3, niter=15, seed=i))
        if not rep.best_error <= rep.init_factor_error:
            failures.append(f"planted#{i}")
    ok = not failures
    criterion(5, "Latitude <= its NMF initialization", ok, f"{40 - len(failures)}/40 instances, failures: {failures or 'none'}")
    assert ok


def _ordering(runs):
    lat = np.mean([r["latitude"] for r in runs])
    nmf = np.mean([r["nmf"] for r in runs])
    svd = np.mean([r["svd"] for r in runs])
    wins = sum(r["latitude"] < min(r["nmf"], r["svd"]) for r in runs)
    return lat, nmf, svd, wins


def test_c06_mixed_ordering(mixed_runs, criterion):
    lat, nmf, svd, wins = _ordering(mixed_runs)
    ok = lat < nmf and lat < svd and wins >= 8
    criterion(6, "mixed data: Latitude best", ok,
              f"mean rel error latitude {lat:.4f}, nmf {nmf:.4f}, svd {svd:.4f}; wins {wins}/10")
    assert ok


def test_c07_subtropical_ordering(criterion):
    details = []
    ok = True
    for noise in (0.02, 0.06):
        lat, nmf, svd, wins = _ordering(desk_runs("pure_subtropical", noise))
        ok &= lat < nmf and lat < svd
        details.append(f"sigma={noise}: latitude {lat:.4f}, nmf {nmf:.4f}, svd {svd:.4f}")
    criterion(7, "pure subtropical data: Latitude best", ok, "; ".join(details))
    assert ok


def test_c08_nmf_zero_noise(criterion):
    runs = desk_runs("pure_nmf", 0.0)
    losses = [i for i, r in enumerate(runs) if not r["latitude"] <= r["nmf"]]
    worst = max(runs, key=lambda r: r["latitude"] - r["nmf"])
    ok = not losses
    criterion(8, "pure NMF data, zero noise: Latitude <= NMF", ok,
              f"{SEEDS - len(losses)}/{SEEDS} seeds; worst latitude {worst['latitude']:.2e} vs nmf {worst['nmf']:.2e}")
    assert ok


def test_c09_parameter_sign_recovery(mixed_runs, criterion):
    rates = []
    for r in mixed_runs:
        truth, fact = r["truth"], r["fact"]
        planted = truth.co[:, None] + truth.ro[None, :]
        fitted = fact.co[:, None] + fact.ro[None, :]
        mask = np.abs(planted) > 2
        rates.append(np.mean(np.sign(planted[mask]) == np.sign(fitted[mask])))
    rate = float(np.mean(rates))
    ok = rate > 0.60
    criterion(9, "parameter sign recovery", ok, f"mean agreement {rate:.3f} (bar 0.60)")
    assert ok


def test_c10_linear_scaling(criterion):
    sizes = [250, 500, 1000]
    t0 = time.perf_counter()
    per_iter = []
    for n in sizes:
        _, noisy, _ = gen_planted(SynthSpec(n=n, m=200, k_true=10, seed=10))
        _, rep = latitude_fit(noisy, SolverConfig(k=10, niter=3))
        per_iter.append(float(np.median(rep.wall_time_per_iteration)))
    slope = bench_slope(sizes, per_iter)
    elapsed = time.perf_counter() - t0
    ok = 0.8 <= slope <= 1.5 and elapsed < 600
    criterion(10, "linear scaling in n", ok,
              f"slope {slope:.3f}, seconds/iteration {[round(t, 3) for t in per_iter]}")
    assert ok


def test_c11_sigmoid_at_bound(criterion):
    value = float(sigmoid(5.0))
    ok = round(value, 4) == 0.9933
    criterion(11, "sigma(5) = 0.9933", ok, f"{value:.6f}")
    assert ok


def test_c12_cli_determinism(tmp_path, criterion):
    data = str(tmp_path / "d")
    assert main(["synth", "--n", "60", "--m", "50", "--k", "4", "--seed", "12", "--out-prefix", data]) == 0
    prefixes = []
    for run, jobs in enumerate(["1", "1", "3"]):
        prefix = str(tmp_path / f"run{run}")
        argv = ["factorize", "--input", f"{data}.noisy.csv", "--k", "4", "--niter", "8", "--seed", "7",
                "--n-jobs", jobs, "--block-size", "16", "--preprocess", "minsub,stddiv", "--out-prefix", prefix]
        assert main(argv) == 0
        prefixes.append(prefix)

    def report(prefix):
        rep = json.loads(open(f"{prefix}.report.json").read())
        rep.pop("seconds_per_iteration")  # wall-clock measurement
        return rep

    mismatches = []
    for prefix in prefixes[1:]:
        for suffix in ("B.csv", "C.csv", "co.csv", "ro.csv", "alpha.csv"):
            if open(f"{prefixes[0]}.{suffix}", "rb").read() != open(f"{prefix}.{suffix}", "rb").read():
                mismatches.append(f"{prefix}.{suffix}")
        if report(prefixes[0]) != report(prefix):
            mismatches.append(f"{prefix}.report.json")
    ok = not mismatches
    criterion(12, "CLI determinism across thread counts", ok,
              "all outputs byte-identical (timings excluded)" if ok else f"differ: {mismatches}")
    assert ok
