"""Standard, max-times and mixed linear-tropical matrix products.

Matrices are plain 2-D float64 numpy arrays. The helpers here validate
shape, finiteness and (where required) nonnegativity and raise
``ValueError`` on bad input.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

DEFAULT_M = 5.0
_BRACKET_SLACK = 1e-12


class DegenerateEntryError(ValueError):
    """Raised when the standard and max-times products coincide at an entry."""

    def __init__(self, index):
        self.index = tuple(int(i) for i in index)
        super().__init__(f"max-times and standard products are equal at entry {self.index}")


def as_matrix(X, name="matrix", nonneg=False) -> np.ndarray:
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite values")
    if nonneg and np.any(A < 0):
        raise ValueError(f"{name} must be nonnegative")
    return A


def _check_inner(B, C):
    if B.shape[1] != C.shape[0]:
        raise ValueError(f"inner dimensions differ: {B.shape} x {C.shape}")


def sigmoid(x):
    """Logistic function ``1 / (1 + exp(-x))``."""
    return expit(np.asarray(x, dtype=np.float64))


@dataclass
class ParamVectors:
    """Row parameters ``co`` (length n), column parameters ``ro`` (length m), bound ``M``."""

    co: np.ndarray
    ro: np.ndarray
    M: float = DEFAULT_M

    def __post_init__(self):
        self.co = np.asarray(self.co, dtype=np.float64).reshape(-1)
        self.ro = np.asarray(self.ro, dtype=np.float64).reshape(-1)
        self.M = float(self.M)
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        for name, v in (("co", self.co), ("ro", self.ro)):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} contains non-finite values")
            if np.any(np.abs(v) > self.M):
                raise ValueError(f"{name} has entries outside [-{self.M}, {self.M}]")


@dataclass
class MixedFactorization:
    B: np.ndarray
    C: np.ndarray
    params: ParamVectors = field(repr=False)

    def __post_init__(self):
        self.B = as_matrix(self.B, "B", nonneg=True)
        self.C = as_matrix(self.C, "C", nonneg=True)
        _check_inner(self.B, self.C)
        if self.params.co.shape[0] != self.B.shape[0]:
            raise ValueError("co length must equal the number of rows of B")
        if self.params.ro.shape[0] != self.C.shape[1]:
            raise ValueError("ro length must equal the number of columns of C")

    @property
    def k(self) -> int:
        return self.B.shape[1]

    @property
    def co(self) -> np.ndarray:
        return self.params.co

    @property
    def ro(self) -> np.ndarray:
        return self.params.ro

    @property
    def M(self) -> float:
        return self.params.M

    def alpha(self) -> np.ndarray:
        return alpha_matrix(self.params)

    def product(self) -> np.ndarray:
        return mixed_product(self)


def matmul(B, C) -> np.ndarray:
    B = as_matrix(B, "B")
    C = as_matrix(C, "C")
    _check_inner(B, C)
    return B @ C


def maxtimes_product(B, C) -> np.ndarray:
    """Subtropical product: ``out[i, j] = max_s B[i, s] * C[s, j]``."""
    B = as_matrix(B, "B", nonneg=True)
    C = as_matrix(C, "C", nonneg=True)
    _check_inner(B, C)
    out = B[:, 0:1] * C[0:1, :]
    # one rank-1 layer at a time keeps memory at n*m
    for s in range(1, B.shape[1]):
        np.maximum(out, B[:, s : s + 1] * C[s : s + 1, :], out=out)
    return out


def alpha_matrix(params: ParamVectors) -> np.ndarray:
    return sigmoid(params.co[:, None] + params.ro[None, :])


def _blend(mx, sm, alpha):
    # written around the standard product so equal products stay bit-exact
    return sm + alpha * (mx - sm)


def mixed_product(fact: MixedFactorization) -> np.ndarray:
    alpha = alpha_matrix(fact.params)
    return _blend(maxtimes_product(fact.B, fact.C), fact.B @ fact.C, alpha)


def mixed_product_with_alpha(B, C, alpha) -> np.ndarray:
    """Per-entry convex combination with an unconstrained mixing matrix ``alpha``."""
    B = as_matrix(B, "B", nonneg=True)
    C = as_matrix(C, "C", nonneg=True)
    _check_inner(B, C)
    alpha = as_matrix(alpha, "alpha")
    if alpha.shape != (B.shape[0], C.shape[1]):
        raise ValueError(f"alpha has shape {alpha.shape}, expected {(B.shape[0], C.shape[1])}")
    if np.any(alpha < 0) or np.any(alpha > 1):
        raise ValueError("alpha entries must lie in [0, 1]")
    return _blend(maxtimes_product(B, C), B @ C, alpha)


def constant_factor_alpha(A, B, C) -> np.ndarray:
    """Mixing matrix that makes the mixed product reproduce ``A`` exactly.

    Requires every ``A[i, j]`` to lie between ``(B ⊠ C)[i, j]`` and ``(B C)[i, j]``
    and the two products to differ at every entry.
    """
    A = as_matrix(A, "A")
    mx = maxtimes_product(B, C)
    sm = matmul(B, C)
    if A.shape != mx.shape:
        raise ValueError(f"A has shape {A.shape}, expected {mx.shape}")
    gap = mx - sm
    bad = np.argwhere(gap == 0)
    if bad.size:
        raise DegenerateEntryError(bad[0])
    alpha = (A - sm) / gap
    # slack absorbs round-off in the products themselves, e.g. (sqrt(3)/2)**2
    out = np.argwhere((alpha < -_BRACKET_SLACK) | (alpha > 1 + _BRACKET_SLACK))
    if out.size:
        i, j = out[0]
        raise ValueError(
            f"A[{i}, {j}] = {A[i, j]} lies outside [{mx[i, j]}, {sm[i, j]}]"
        )
    return np.clip(alpha, 0.0, 1.0)


def frobenius_error(A, Ahat) -> tuple[float, float]:
    """Absolute and relative Frobenius error ``||A - Ahat||_F`` (relative to ``||A||_F``)."""
    A = as_matrix(A, "A")
    Ahat = as_matrix(Ahat, "Ahat")
    if A.shape != Ahat.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {Ahat.shape}")
    absolute = float(np.linalg.norm(A - Ahat))
    ref = float(np.linalg.norm(A))
    if ref == 0.0:
        if absolute == 0.0:
            return 0.0, 0.0
        raise ValueError("relative error undefined for an all-zero reference with nonzero residual")
    return absolute, absolute / ref
