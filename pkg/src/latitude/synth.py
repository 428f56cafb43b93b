"""Planted mixed / subtropical / NMF data and parameter sweeps over it."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .matrix import MixedFactorization, ParamVectors, alpha_matrix, maxtimes_product, mixed_product

log = logging.getLogger(__name__)

MODES = ("mixed", "pure_subtropical", "pure_nmf", "alpha_scaled_nmf_only")
AXES = ("noise", "density", "rank")
RESULT_COLUMNS = ("axis_value", "repeat", "method", "abs_error", "rel_error", "seconds")


@dataclass
class SynthSpec:
    n: int = 1000
    m: int = 800
    k_true: int = 10
    density: float = 0.2
    noise_sigma: float = 0.01
    param_range: float = 5.0
    mode: str = "mixed"
    seed: Optional[int] = 0

    def __post_init__(self):
        if min(self.n, self.m, self.k_true) < 1:
            raise ValueError("dimensions and rank must be at least 1")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if not self.param_range > 0:
            raise ValueError("param_range must be positive")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")


def desk_spec(**overrides) -> SynthSpec:
    """Reduced-size defaults (200 x 160, rank 5) for quick experiments."""
    base = dict(n=200, m=160, k_true=5)
    base.update(overrides)
    return SynthSpec(**base)


def _sparse_uniform(rng, shape, density):
    mask = rng.random(shape) < density
    return np.where(mask, rng.random(shape), 0.0)


def gen_planted(spec: SynthSpec):
    """Return ``(A_clean, A_noisy, truth)`` for one planted instance."""
    rng = np.random.default_rng(spec.seed)
    B = _sparse_uniform(rng, (spec.n, spec.k_true), spec.density)
    C = _sparse_uniform(rng, (spec.k_true, spec.m), spec.density)
    co = rng.uniform(-spec.param_range, spec.param_range, spec.n)
    ro = rng.uniform(-spec.param_range, spec.param_range, spec.m)
    truth = MixedFactorization(B, C, ParamVectors(co, ro, spec.param_range))

    if spec.mode == "mixed":
        clean = mixed_product(truth)
    elif spec.mode == "pure_subtropical":
        clean = maxtimes_product(B, C)
    elif spec.mode == "pure_nmf":
        clean = B @ C
    else:
        clean = (1.0 - alpha_matrix(truth.params)) * (B @ C)

    noise = rng.normal(0.0, spec.noise_sigma, clean.shape) if spec.noise_sigma > 0 else 0.0
    noisy = np.maximum(clean + noise, 0.0)
    return clean, noisy, truth


@dataclass
class ResultRow:
    axis_value: float
    repeat: int
    method: str
    abs_error: float
    rel_error: float
    seconds: float


class ResultTable(list):
    """List of ``ResultRow`` with CSV output and per-cell summaries."""

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_COLUMNS)
            for r in self:
                w.writerow([
                    f"{r.axis_value:.17g}", r.repeat, r.method,
                    f"{r.abs_error:.17g}", f"{r.rel_error:.17g}", f"{r.seconds:.6f}",
                ])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            return cls(
                ResultRow(float(d["axis_value"]), int(d["repeat"]), d["method"],
                          float(d["abs_error"]), float(d["rel_error"]), float(d["seconds"]))
                for d in rd
            )

    def summary(self, metric="rel_error"):
        """``{(axis_value, method): (mean, std, count)}`` using population std."""
        cells = {}
        for r in self:
            cells.setdefault((r.axis_value, r.method), []).append(getattr(r, metric))
        return {key: (float(np.mean(v)), float(np.std(v)), len(v)) for key, v in cells.items()}


def spec_for(spec_base: SynthSpec, axis: str, value) -> SynthSpec:
    if axis == "noise":
        return replace(spec_base, noise_sigma=float(value))
    if axis == "density":
        return replace(spec_base, density=float(value))
    if axis == "rank":
        return replace(spec_base, k_true=int(value))
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


def instance_seed(base_seed, value_index, repeat) -> int:
    ss = np.random.SeedSequence([0 if base_seed is None else int(base_seed), value_index, repeat])
    return int(ss.generate_state(1)[0])


def sweep(spec_base: SynthSpec, axis: str, values: Sequence, methods: Sequence[str],
          repeats: int = 10, solver_config=None, fit_rank=None) -> ResultTable:
    """Generate data along ``axis`` and score each method against the clean matrix.

    The fitted rank is ``fit_rank`` when given, otherwise the planted rank of
    each instance (so a rank sweep fits at the swept rank).
    """
    from .baselines import METHODS, run_methods

    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")
    unknown = [mth for mth in methods if mth not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; expected a subset of {METHODS}")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")

    table = ResultTable()
    for vi, value in enumerate(values):
        for rep in range(repeats):
            spec = replace(spec_for(spec_base, axis, value), seed=instance_seed(spec_base.seed, vi, rep))
            clean, noisy, _ = gen_planted(spec)
            k = fit_rank or spec.k_true
            for res in run_methods(clean, noisy, k, methods, solver_config):
                table.append(ResultRow(float(value), rep, res.method, res.abs_error, res.rel_error, res.wall_seconds))
            log.info("%s=%s repeat %d done", axis, value, rep)
    return table
