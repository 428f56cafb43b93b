"""Latitude: alternating fit of the mixed linear-tropical model.

One outer iteration sweeps the columns (updating ``C`` and ``ro`` with ``B``
and ``co`` frozen) and then the rows (the same routine on the transposed
problem). Each column subproblem linearizes the max term around the current
column, solves an NNLS problem for the new column, and then line-searches
the column parameter by bisection on the derivative of the squared error.

Columns are processed in fixed-size blocks so that results never depend on
how many worker threads are used.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matrix import DEFAULT_M, MixedFactorization, ParamVectors, as_matrix, mixed_product, sigmoid
from .nmf import NmfConfig, nmf_fit, random_factors
from .nnls import NnlsConfig, default_tolerance, nnls_gram_batch

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    k: int = 10
    niter: int = 40
    M: float = DEFAULT_M
    seed: Optional[int] = 0
    init_mode: str = "nmf"
    nmf_config: Optional[NmfConfig] = None
    nnls_config: NnlsConfig = field(default_factory=NnlsConfig)
    bisect_iterations: int = 50
    block_size: int = 128
    n_jobs: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.niter < 1:
            raise ValueError("niter must be at least 1")
        if not self.M > 0:
            raise ValueError("M must be positive")
        if self.init_mode not in ("nmf", "random"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.block_size < 1 or self.n_jobs < 1:
            raise ValueError("block_size and n_jobs must be at least 1")

    def resolved_nmf_config(self) -> NmfConfig:
        if self.nmf_config is None:
            return NmfConfig(k=self.k, seed=self.seed)
        if self.nmf_config.k != self.k:
            raise ValueError("nmf_config.k must equal k")
        return self.nmf_config


@dataclass
class FitReport:
    error_trace: np.ndarray
    best_error: float
    best_iteration: int  # 0 is the initial state
    wall_time_per_iteration: np.ndarray
    initial_error: float
    init_factor_error: float  # ||A - B0 C0||_F of the starting factors


def init_parameters(A, B, C, M=DEFAULT_M) -> ParamVectors:
    """Rank rows and columns by their summed residual ``B C - A``.

    The row with the smallest residual sum gets ``-M`` and the largest gets
    ``0``, evenly spaced in between; columns likewise.
    """
    A = np.asarray(A, dtype=np.float64)
    n, m = A.shape
    if n < 2 or m < 2:
        raise ValueError("parameter initialization needs at least two rows and two columns")
    D = B @ C - A
    f = D.sum(axis=1)
    g = D.sum(axis=0)
    co = np.empty(n)
    ro = np.empty(m)
    co[np.argsort(f, kind="stable")] = (np.arange(1, n + 1) - n) / (n - 1) * M
    ro[np.argsort(g, kind="stable")] = (np.arange(1, m + 1) - m) / (m - 1) * M
    return ParamVectors(co, ro, M)


# ---- batched column kernels: a is (n, p), B is (n, k), C is (k, p) ----

def _products(B, C):
    # explicit accumulation keeps every entry's summation order independent of block layout
    mx = B[:, 0:1] * C[0:1, :]
    sm = mx.copy()
    for s in range(1, B.shape[1]):
        term = B[:, s : s + 1] * C[s : s + 1, :]
        np.maximum(mx, term, out=mx)
        sm += term
    return mx, sm


def _column_sq_errors(a, mx, sm, co, t):
    alpha = sigmoid(co[:, None] + t[None, :])
    r = a - (sm + alpha * (mx - sm))
    return np.sum(r * r, axis=0)


def _coefficient_tensor(B, C, alpha):
    """``Y[p] = B * T[p]``: weight 1 on each row's winning term, ``1 - alpha`` elsewhere."""
    X = B[None, :, :] * C.T[:, None, :]
    win = np.argmax(X, axis=2)  # first maximum: ties go to the smallest index
    T = np.broadcast_to((1.0 - alpha.T)[:, :, None], X.shape).copy()
    np.put_along_axis(T, win[:, :, None], 1.0, axis=2)
    return B[None, :, :] * T


def _update_t_batch(a, mx, sm, co, t_in, M, bisect_iterations):
    D = mx - sm
    R = sm - a
    p = a.shape[1]

    def deriv(t, R, D):
        # d/dt of the squared column error
        s = sigmoid(co[:, None] + t[None, :])
        return 2.0 * np.sum((R + s * D) * (s * (1.0 - s)) * D, axis=0)

    bracket = (deriv(np.full(p, -M), R, D) < 0) & (deriv(np.full(p, M), R, D) > 0)
    t_bis = np.zeros(p)
    cols = np.flatnonzero(bracket)
    if cols.size:
        Rb, Db = R[:, cols], D[:, cols]
        lo = np.full(cols.size, -M)
        hi = np.full(cols.size, M)
        for _ in range(bisect_iterations):
            mid = 0.5 * (lo + hi)
            up = deriv(mid, Rb, Db) > 0
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        t_bis[cols] = 0.5 * (lo + hi)

    # order sets the tie preference: keep t_in unless something is strictly better
    cands = np.stack([t_in, t_bis, np.full(p, -M), np.full(p, M)])
    errs = np.stack([_column_sq_errors(a, mx, sm, co, t) for t in cands])
    errs[1, ~bracket] = np.inf
    pick = np.argmin(errs, axis=0)
    return cands[pick, np.arange(p)]


def _solve_block(a, B, C0, co, t0, M, nnls_config, bisect_iterations):
    alpha = sigmoid(co[:, None] + t0[None, :])
    Y = _coefficient_tensor(B, C0, alpha)
    G = np.einsum("pns,pnr->psr", Y, Y)
    h = np.einsum("pns,np->ps", Y, a)
    tol = default_tolerance(G) if nnls_config.kkt_tolerance is None else nnls_config.kkt_tolerance
    x, _ = nnls_gram_batch(G, h, tol, nnls_config.max_iterations)
    C = np.ascontiguousarray(x.T)

    mx, sm = _products(B, C)
    t = _update_t_batch(a, mx, sm, co, t0, M, bisect_iterations)
    err = _column_sq_errors(a, mx, sm, co, t)

    mx0, sm0 = _products(B, C0)
    err0 = _column_sq_errors(a, mx0, sm0, co, t0)
    # the frozen linearization can make a column worse; never accept that
    old = err0 < err
    C[:, old] = C0[:, old]
    t = np.where(old, t0, t)
    return C, t, np.where(old, err0, err)


def _sweep(A, B, C, co, ro, config: SolverConfig, pool=None):
    """Update every column of ``C`` and entry of ``ro`` with ``B``, ``co`` fixed."""
    m = A.shape[1]
    starts = range(0, m, config.block_size)

    def run(j0):
        sl = slice(j0, min(j0 + config.block_size, m))
        return _solve_block(
            A[:, sl], B, C[:, sl], co, ro[sl], config.M, config.nnls_config, config.bisect_iterations
        )

    results = list(pool.map(run, starts)) if pool is not None else [run(j0) for j0 in starts]
    C_new = np.concatenate([r[0] for r in results], axis=1)
    ro_new = np.concatenate([r[1] for r in results])
    return C_new, ro_new


def latitude_fit(A, config: SolverConfig, init_factors=None):
    """Fit ``A ~ B ⋈_{co,ro} C`` and return ``(MixedFactorization, FitReport)``.

    The returned model is the lowest-error state among the initial one and
    all ``config.niter`` iterates.
    """
    A = as_matrix(A, "A", nonneg=True)
    n, m = A.shape
    if n < 2 or m < 2:
        raise ValueError("Latitude needs at least two rows and two columns")
    k = config.k

    if init_factors is not None:
        B, C = (as_matrix(f, nonneg=True).copy() for f in init_factors)
        if B.shape != (n, k) or C.shape != (k, m):
            raise ValueError("initial factors have the wrong shape")
    elif config.init_mode == "nmf":
        B, C, _ = nmf_fit(A, config.resolved_nmf_config())
    else:
        B, C = random_factors(n, m, k, config.seed)
    init_factor_error = float(np.linalg.norm(A - B @ C))

    params = init_parameters(A, B, C, config.M)
    co, ro = params.co, params.ro
    error = float(np.linalg.norm(A - mixed_product(MixedFactorization(B, C, params))))
    initial_error = error
    best = (error, 0, B, C, co, ro)

    trace = np.empty(config.niter)
    times = np.empty(config.niter)
    pool = ThreadPoolExecutor(config.n_jobs) if config.n_jobs > 1 else None
    At = np.ascontiguousarray(A.T)
    try:
        for it in range(1, config.niter + 1):
            t0 = time.perf_counter()
            C, ro = _sweep(A, B, C, co, ro, config, pool)
            Bt, co = _sweep(At, C.T, np.ascontiguousarray(B.T), ro, co, config, pool)
            B = np.ascontiguousarray(Bt.T)
            mx, sm = _products(B, C)
            error = float(np.sqrt(np.sum(_column_sq_errors(A, mx, sm, co, ro))))
            times[it - 1] = time.perf_counter() - t0
            trace[it - 1] = error
            if error < best[0]:
                best = (error, it, B, C, co, ro)
            log.debug("iteration %d: error %.6g", it, error)
    finally:
        if pool is not None:
            pool.shutdown()

    best_error, best_it, B, C, co, ro = best
    fact = MixedFactorization(B, C, ParamVectors(co, ro, config.M))
    report = FitReport(trace, best_error, best_it, times, initial_error, init_factor_error)
    return fact, report


# ---- single-column entry points ----

def build_coefficient_matrix(B, c, alpha) -> np.ndarray:
    """Frozen-argmax coefficient matrix ``Y`` with ``Y c`` equal to the mixed prediction at ``c``."""
    B = np.asarray(B, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64).reshape(-1, 1)
    alpha = np.asarray(alpha, dtype=np.float64).reshape(-1, 1)
    return _coefficient_tensor(B, c, alpha)[0]


def update_t(a, B, c, co, M=DEFAULT_M, t_in=0.0, bisect_iterations=50) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1, 1)
    B = np.asarray(B, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64).reshape(-1, 1)
    if not -M <= t_in <= M:
        raise ValueError("t_in must lie in [-M, M]")
    mx, sm = _products(B, c)
    t = _update_t_batch(a, mx, sm, np.asarray(co, dtype=np.float64), np.array([float(t_in)]), M, bisect_iterations)
    return float(t[0])


def solve_mix_regression(a, B, c0, co, t0, M=DEFAULT_M, nnls_config=None, bisect_iterations=50):
    """One column update: returns the new nonnegative column ``c`` and parameter ``t``."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 1)
    B = np.asarray(B, dtype=np.float64)
    c0 = np.asarray(c0, dtype=np.float64).reshape(-1, 1)
    if np.any(c0 < 0):
        raise ValueError("c0 must be nonnegative")
    if not -M <= t0 <= M:
        raise ValueError("t0 must lie in [-M, M]")
    C, t, _ = _solve_block(
        a, B, c0, np.asarray(co, dtype=np.float64), np.array([float(t0)]), M,
        nnls_config or NnlsConfig(), bisect_iterations,
    )
    return C[:, 0], float(t[0])
