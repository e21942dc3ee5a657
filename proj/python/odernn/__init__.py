"""Continuous-time GRU/LSTM cells trained through ODE solvers.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from odernn._core import (
    BudgetError,
    DataError,
    Dataset,
    DimensionError,
    FormatError,
    IoError,
    Model,
    NumericError,
    TimeSeries,
    UsageError,
    gen_eight_curve,
    gen_spiral,
    gen_triknot,
    grad_check,
    load_checkpoint,
    load_csv,
    make_model,
    predict,
    save_checkpoint,
    save_csv,
    subsample_irregular,
    train,
)

__all__ = [
    "BudgetError",
    "DataError",
    "Dataset",
    "DimensionError",
    "FormatError",
    "IoError",
    "Model",
    "NumericError",
    "TimeSeries",
    "UsageError",
    "gen_eight_curve",
    "gen_spiral",
    "gen_triknot",
    "grad_check",
    "load_checkpoint",
    "load_csv",
    "make_model",
    "predict",
    "save_checkpoint",
    "save_csv",
    "subsample_irregular",
    "train",
]
