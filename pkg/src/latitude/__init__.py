"""Mixed linear-tropical matrix factorization (Latitude) and baselines."""
from .baselines import METHODS, MethodResult, run_methods, truncated_svd, truncated_svd_error
from .io import PreprocessSpec, load_csv, preprocess, save_csv
from .matrix import (
    DegenerateEntryError,
    MixedFactorization,
    ParamVectors,
    alpha_matrix,
    constant_factor_alpha,
    frobenius_error,
    matmul,
    maxtimes_product,
    mixed_product,
    mixed_product_with_alpha,
    sigmoid,
)
from .nmf import NmfConfig, nmf_fit, random_factors
from .nnls import NnlsConfig, NnlsResult, nnls_solve
from .solver import (
    FitReport,
    SolverConfig,
    build_coefficient_matrix,
    init_parameters,
    latitude_fit,
    solve_mix_regression,
    update_t,
)
from .synth import ResultRow, ResultTable, SynthSpec, desk_spec, gen_planted, sweep

__version__ = "0.1.0"
