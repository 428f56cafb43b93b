import numpy as np
import pytest

from latitude.baselines import run_methods, truncated_svd, truncated_svd_error
from latitude.solver import SolverConfig


def jacobi_singular_values(A, sweeps=60):
    """One-sided Jacobi SVD: orthogonalize column pairs by plane rotations."""
    U = np.array(A, dtype=float)
    if U.shape[0] < U.shape[1]:
        U = U.T.copy()
    n = U.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if gamma == 0.0:
                    continue
                off = max(off, abs(gamma) / np.sqrt(alpha * beta))
                zeta = (beta - alpha) / (2 * gamma)
                t = np.sign(zeta or 1.0) / (abs(zeta) + np.sqrt(1 + zeta * zeta))
                c = 1 / np.sqrt(1 + t * t)
                s = c * t
                up, uq = U[:, p].copy(), U[:, q].copy()
                U[:, p] = c * up - s * uq
                U[:, q] = s * up + c * uq
        if off < 1e-15:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


def test_exact_low_rank():
    rng = np.random.default_rng(0)
    A = rng.random((12, 2)) @ rng.random((2, 9))
    assert truncated_svd_error(A, 3)[1] < 1e-6
    assert truncated_svd_error(A, 2)[1] < 1e-6


def test_diagonal():
    absolute, relative = truncated_svd_error(np.diag([3.0, 2.0, 1.0]), 2)
    assert absolute == pytest.approx(1.0, rel=1e-12)
    assert relative == pytest.approx(1 / np.sqrt(14), rel=1e-12)


def test_matches_jacobi_oracle():
    rng = np.random.default_rng(1)
    A = rng.random((8, 6))
    s = jacobi_singular_values(A)
    expect = np.sqrt(np.sum(s[3:] ** 2))
    assert truncated_svd_error(A, 3)[0] == pytest.approx(expect, rel=1e-8)
    np.testing.assert_allclose(np.linalg.norm(A - truncated_svd(A, 3)), expect, rtol=1e-8)


def test_rank_too_large():
    with pytest.raises(ValueError):
        truncated_svd_error(np.ones((3, 2)), 3)


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(2)
    return rng.random((30, 20))


def test_svd_beats_nmf(data):
    res = {r.method: r for r in run_methods(data, data, 4, ["svd", "nmf"])}
    assert res["svd"].abs_error <= res["nmf"].abs_error


def test_latitude_vs_its_initializer(data):
    cfg = SolverConfig(niter=10, seed=3)
    res = {r.method: r for r in run_methods(data, data, 4, ["latitude", "nmf", "lattrunc"], cfg)}
    assert res["latitude"].abs_error <= res["nmf"].abs_error
    assert res["lattrunc"].k == 3 and res["latitude"].k == 4
    assert all(r.wall_seconds >= 0 for r in res.values())


def test_run_methods_errors(data):
    with pytest.raises(ValueError):
        run_methods(data, data, 1, ["lattrunc"])
    with pytest.raises(ValueError):
        run_methods(data, data, 2, ["cancer"])
    with pytest.raises(ValueError):
        run_methods(data, data[:5], 2, ["svd"])
