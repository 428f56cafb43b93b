"""Active-set (Lawson-Hanson) nonnegative least squares.

The solver works on the normal equations ``G = B^T B``, ``h = B^T b`` so a
stack of independent problems sharing nothing but their size ``k`` can be
advanced in lockstep. Each problem follows exactly the step sequence it
would follow if solved alone; the batch only amortizes Python overhead.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

_PINV_RCOND = 1e-13


@dataclass
class NnlsConfig:
    # None means the per-problem defaults: 1e-10 * max column norm, 3 * k
    kkt_tolerance: Optional[float] = None
    max_iterations: Optional[int] = None

    def __post_init__(self):
        if self.kkt_tolerance is not None and not self.kkt_tolerance > 0:
            raise ValueError("kkt_tolerance must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class NnlsResult(NamedTuple):
    x: np.ndarray
    residual_norm: float
    converged: bool


def _solve_passive(G, h, P):
    """Least-squares solution restricted to the passive sets ``P`` (batched).

    Inactive variables are decoupled with a unit diagonal and zero rhs, so
    they come back as exact zeros.
    """
    k = G.shape[-1]
    mask = P[:, :, None] & P[:, None, :]
    scale = np.maximum(np.einsum("pii->p", G) / k, 1.0)
    Gm = np.where(mask, G, 0.0) + (~P)[:, :, None] * np.eye(k) * scale[:, None, None]
    hm = np.where(P, h, 0.0)
    try:
        s = np.linalg.solve(Gm, hm[:, :, None])[:, :, 0]
        bad = ~np.all(np.isfinite(s), axis=1)
    except np.linalg.LinAlgError:
        s = np.empty_like(hm)
        bad = np.ones(len(hm), dtype=bool)
    if bad.any():
        # singular passive block: least-norm solve
        s[bad] = np.einsum("pij,pj->pi", np.linalg.pinv(Gm[bad], rcond=_PINV_RCOND), hm[bad])
    return np.where(P, s, 0.0)


def default_tolerance(G) -> np.ndarray:
    diag = np.einsum("pii->pi", G)
    return 1e-10 * np.sqrt(np.max(diag, axis=1))


def nnls_gram_batch(G, h, tol=None, max_iterations=None):
    """Solve ``min_{x >= 0} ||b_p - B_p x||`` for a stack of problems.

    Parameters
    ----------
    G : (p, k, k) array
        Gram matrices ``B_p^T B_p``.
    h : (p, k) array
        ``B_p^T b_p``.
    tol : float or (p,) array, optional
        KKT tolerance on the negative gradient ``h - G x``.
    max_iterations : int, optional
        Outer (variable-entering) iterations per problem, default ``3 k``.

    Returns
    -------
    x : (p, k) array
    converged : (p,) bool array
    """
    G = np.asarray(G, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    p, k = h.shape
    tol = default_tolerance(G) if tol is None else np.broadcast_to(np.asarray(tol, dtype=np.float64), (p,)).copy()
    max_iterations = 3 * k if max_iterations is None else int(max_iterations)

    x = np.zeros((p, k))
    P = np.zeros((p, k), dtype=bool)
    blocked = np.zeros((p, k), dtype=bool)
    iters = np.zeros(p, dtype=np.int64)
    converged = np.zeros(p, dtype=bool)
    live = np.arange(p)
    rows = np.arange(p)

    while live.size:
        w = h[live] - np.einsum("pij,pj->pi", G[live], x[live])
        cand = ~P[live] & ~blocked[live] & (w > tol[live, None])
        done = ~cand.any(axis=1)
        converged[live[done]] = True
        out = iters[live] >= max_iterations
        keep = ~done & ~out
        live, w, cand = live[keep], w[keep], cand[keep]
        if not live.size:
            break
        iters[live] += 1
        # np.argmax returns the first maximum: ties go to the smallest index
        enter = np.argmax(np.where(cand, w, -np.inf), axis=1)
        P[live, enter] = True

        s = _solve_passive(G[live], h[live], P[live])
        reject = s[rows[: live.size], enter] <= 0
        if reject.any():
            # entering variable cannot move off zero (round-off): undo and block it
            r = live[reject]
            P[r, enter[reject]] = False
            blocked[r, enter[reject]] = True
        accept = ~reject
        cur, s = live[accept], s[accept]

        # inner loop: step back toward feasibility until the passive solution is positive
        while cur.size:
            Pc = P[cur]
            feasible = ~np.any(Pc & (s <= 0), axis=1)
            if feasible.any():
                f = cur[feasible]
                x[f] = s[feasible]
                blocked[f] = False
            cur, s, Pc = cur[~feasible], s[~feasible], Pc[~feasible]
            if not cur.size:
                break
            xc = x[cur]
            neg = Pc & (s <= 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(neg, xc / (xc - s), np.inf)
            q = np.argmin(ratio, axis=1)
            step = ratio[rows[: cur.size], q]
            xc = xc + step[:, None] * (s - xc)
            xc[rows[: cur.size], q] = 0.0
            drop = Pc & (xc <= 0)
            xc[drop] = 0.0
            x[cur] = xc
            P[cur] = Pc & ~drop
            s = _solve_passive(G[cur], h[cur], P[cur])

    np.maximum(x, 0.0, out=x)
    return x, converged


def nnls_solve(B, b, config: Optional[NnlsConfig] = None) -> NnlsResult:
    """``argmin_{x >= 0} ||b - B x||_2`` for a single problem.

    >>> nnls_solve([[2.0, 1.0], [1.0, 2.0]], [1.0, 0.0]).x
    array([0.4, 0. ])
    """
    B = np.asarray(B, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if B.ndim != 2 or B.shape[0] < 1 or B.shape[1] < 1:
        raise ValueError(f"B must be a non-empty 2-D array, got shape {B.shape}")
    if b.shape[0] != B.shape[0]:
        raise ValueError(f"b has length {b.shape[0]}, expected {B.shape[0]}")
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(b))):
        raise ValueError("NNLS inputs must be finite")
    config = config or NnlsConfig()
    G = (B.T @ B)[None]
    h = (B.T @ b)[None]
    x, conv = nnls_gram_batch(G, h, config.kkt_tolerance, config.max_iterations)
    x = x[0]
    return NnlsResult(x, float(np.linalg.norm(b - B @ x)), bool(conv[0]))
