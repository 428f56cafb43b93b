"""Reference methods (truncated SVD, NMF, Latitude, Latitude at rank k-1)."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .matrix import as_matrix, frobenius_error
from .nmf import nmf_fit
from .solver import SolverConfig, latitude_fit

METHODS = ("latitude", "lattrunc", "nmf", "svd")


@dataclass
class MethodResult:
    method: str
    k: int
    abs_error: float
    rel_error: float
    wall_seconds: float


def truncated_svd(A, k):
    """Best rank-``k`` approximation of ``A`` in the Frobenius norm."""
    A = as_matrix(A, "A")
    if not 1 <= k <= min(A.shape):
        raise ValueError(f"k={k} must lie in [1, {min(A.shape)}]")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return (U[:, :k] * s[:k]) @ Vt[:k]


def truncated_svd_error(A, k) -> tuple[float, float]:
    """Eckart-Young error: the norm of the discarded singular values."""
    A = as_matrix(A, "A")
    if not 1 <= k <= min(A.shape):
        raise ValueError(f"k={k} must lie in [1, {min(A.shape)}]")
    s = np.linalg.svd(A, compute_uv=False)
    absolute = float(np.sqrt(np.sum(s[k:] ** 2)))
    ref = float(np.sqrt(np.sum(s**2)))
    return absolute, (absolute / ref if ref > 0 else 0.0)


def run_methods(A_eval_target, A_input, k, methods: Sequence[str],
                config: Optional[SolverConfig] = None) -> list[MethodResult]:
    """Fit each method on ``A_input`` and score it against ``A_eval_target``.

    ``config`` is a template; its rank is replaced by ``k`` (``k - 1`` for
    lattrunc). NMF uses the same NMF settings and seed as Latitude's
    initializer, so the two are directly comparable.
    """
    A_eval_target = as_matrix(A_eval_target, "A_eval_target")
    A_input = as_matrix(A_input, "A_input", nonneg=True)
    if A_eval_target.shape != A_input.shape:
        raise ValueError("evaluation target and input must have the same shape")
    unknown = [mth for mth in methods if mth not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; expected a subset of {METHODS}")
    if "lattrunc" in methods and k < 2:
        raise ValueError("lattrunc needs k >= 2")
    config = config or SolverConfig()

    results = []
    for method in methods:
        kk = k - 1 if method == "lattrunc" else k
        cfg = replace(config, k=kk, nmf_config=None if config.nmf_config is None else replace(config.nmf_config, k=kk))
        t0 = time.perf_counter()
        if method in ("latitude", "lattrunc"):
            fact, _ = latitude_fit(A_input, cfg)
            approx = fact.product()
        elif method == "nmf":
            B, C, _ = nmf_fit(A_input, cfg.resolved_nmf_config())
            approx = B @ C
        else:
            approx = truncated_svd(A_input, kk)
        elapsed = time.perf_counter() - t0
        absolute, relative = frobenius_error(A_eval_target, approx)
        results.append(MethodResult(method, kk, absolute, relative, elapsed))
    return results
