# metrics.py
"""Log-scaled best-so-far error and the normalized area over the convergence curve (AOCC)."""
from dataclasses import dataclass

import numpy as np

from errors import ArgumentError, DataIntegrityError

# Keeps log10 finite when a run hits the optimum exactly.
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class AoccBounds:
    lb: float = -5.0
    ub: float = 5.0

    def __post_init__(self):
        if not self.lb < self.ub:
            raise ArgumentError(f"AOCC bounds need lb < ub, got lb={self.lb}, ub={self.ub}")


def log_scale_trace(trace, f_opt: float = 0.0) -> np.ndarray:
    """log10 of the best-so-far error, floored at LOG_FLOOR. Accepts a ConvergenceTrace or a sequence."""
    values = np.asarray(getattr(trace, "best_so_far", trace), dtype=float)
    if values.size == 0:
        raise ArgumentError("cannot log-scale an empty trace")
    error = values - f_opt
    if np.any(error < 0):
        worst = float(values[np.argmin(error)])
        raise DataIntegrityError(f"trace value {worst!r} lies below the optimum {f_opt!r}")
    return np.log10(np.maximum(error, LOG_FLOOR))


def aocc(y, bounds: AoccBounds = AoccBounds()) -> float:
    """Mean over the budget of 1 - (clip(y_i, lb, ub) - lb) / (ub - lb); 1 is best."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ArgumentError("AOCC of an empty trace is undefined")
    clipped = np.clip(y, bounds.lb, bounds.ub)
    return float(np.mean(1.0 - (clipped - bounds.lb) / (bounds.ub - bounds.lb)))


def trace_aocc(trace, f_opt: float = 0.0, bounds: AoccBounds = AoccBounds()) -> float:
    return aocc(log_scale_trace(trace, f_opt), bounds)
