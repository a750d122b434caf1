import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from analysis.fringe_analysis import ContrastSeries, FitResult, fit_exponential, fit_linear, fringe_contrast
from models.errors import ConfigError
from pipelines.run_pipeline import write_json
from propagators.propagator import Trace
from registries.standards.model_standards import fit_exponential as model_exponential
from registries.standards.model_standards import fit_linear as model_linear

FIT_MODELS = (model_exponential, model_linear)
FIT_SUFFIX = ".fit.json"


def read_series(path) -> ContrastSeries:
    """
    Two leading numeric columns (time, value) of a CSV file with a header row.

    Raises:
        ConfigError: If the file is missing, empty or not numeric.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}", field="input") from None
    except pd.errors.EmptyDataError:
        raise ConfigError(f"{path} is empty", field="input") from None
    except pd.errors.ParserError as e:
        raise ConfigError(f"cannot parse {path}: {e}", field="input") from None
    if frame.shape[1] < 2 or frame.shape[0] == 0:
        raise ConfigError(f"{path} needs at least two columns and one row", field="input")
    columns = frame.iloc[:, :2]
    try:
        values = columns.to_numpy(dtype=float)
    except ValueError:
        raise ConfigError(f"{path} holds non-numeric values", field="input") from None
    if not np.all(np.isfinite(values)):
        raise ConfigError(f"{path} holds missing or infinite values", field="input")
    try:
        return ContrastSeries(values[:, 0], values[:, 1])
    except ValueError as e:
        raise ConfigError(str(e), field="input") from e


def fit(
    input_path,
    model: str,
    contrast_period: Optional[float] = None,
    out: Optional[str] = None,
) -> FitResult:
    """
    Fits a two-column data file and writes the FitResult as JSON.

    Args:
        input_path: CSV with (time, value) leading columns.
        model (str): 'exponential' or 'linear'.
        contrast_period (float, optional): When given, the file holds a p_e
            trace and the fringe contrast over windows of this period is fitted.
        out (str, optional): Report path, defaults to <input>.fit.json.

    Raises:
        ConfigError: On unreadable input or unknown model.
        FitDiverged: If the exponential fit cannot lower its residual.
    """
    if model not in FIT_MODELS:
        raise ConfigError(f"must be one of {FIT_MODELS}", field="model")
    series = read_series(input_path)
    if contrast_period is not None:
        trace = Trace(times=series.times, p_e=series.contrast, p_plus=np.zeros_like(series.contrast))
        series = fringe_contrast(trace, contrast_period)
    result = fit_exponential(series) if model == model_exponential else fit_linear(series)

    report = result.to_dict()
    report["input"] = str(input_path)
    report["points"] = len(series)
    out_path = Path(out) if out else Path(input_path).with_name(Path(input_path).stem + FIT_SUFFIX)
    write_json(out_path, report)
    logging.info(f"fit: {model} fit of {len(series)} points written to {out_path}")
    return result
