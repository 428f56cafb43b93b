"""Projected alternating least squares NMF, used as Latitude's initializer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix import as_matrix

RIDGE = 1e-12


@dataclass
class NmfConfig:
    k: int = 10
    max_iterations: int = 100
    seed: Optional[int] = 0
    relative_improvement_floor: float = 1e-5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


def random_factors(n, m, k, seed=None):
    """Uniform [0, 1] factors ``B`` (n x k) and ``C`` (k x m)."""
    if min(n, m, k) < 1:
        raise ValueError("dimensions must be at least 1")
    rng = np.random.default_rng(seed)
    B = rng.random((n, k))
    C = rng.random((k, m))
    return B, C


def _ls_step(F, R):
    # argmin_X ||R - F X|| via ridge-stabilized normal equations, then projection
    G = F.T @ F
    G[np.diag_indices_from(G)] += RIDGE * max(np.trace(G), 1.0)
    X = np.linalg.solve(G, F.T @ R)
    np.maximum(X, 0.0, out=X)
    return X


def nmf_fit(A, config: NmfConfig, init=None):
    """Fit ``A ~ B C`` with ``B, C >= 0``.

    Returns the best iterate ``(B, C, error_trace)``; ``error_trace[q]`` is the
    absolute Frobenius error after iteration ``q``. Starting factors come from
    ``random_factors`` unless ``init=(B0, C0)`` is given.
    """
    A = as_matrix(A, "A", nonneg=True)
    n, m = A.shape
    k = config.k
    if not np.any(A):
        return np.zeros((n, k)), np.zeros((k, m)), np.zeros(1)
    if init is None:
        B, C = random_factors(n, m, k, config.seed)
    else:
        B, C = (np.array(f, dtype=np.float64) for f in init)

    best = (np.inf, B, C)
    trace = []
    for _ in range(config.max_iterations):
        C = _ls_step(B, A)
        B = _ls_step(C.T, A.T).T
        err = float(np.linalg.norm(A - B @ C))
        prev = trace[-1] if trace else np.inf
        trace.append(err)
        if err < best[0]:
            best = (err, B, C)
        if np.isfinite(prev) and prev - err < config.relative_improvement_floor * prev:
            break
    return best[1], best[2], np.array(trace)
