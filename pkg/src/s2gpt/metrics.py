"""Field comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ErrorMetrics:
    rel_l2: float
    max_abs: float
    pointwise: np.ndarray
    absolute_only: bool = False


def compute_error_metrics(field_a: np.ndarray, field_b: np.ndarray) -> ErrorMetrics:
    """Relative L2 of a against reference b, max-abs, and the pointwise
    difference field. A zero reference switches to absolute-only mode."""
    a = np.asarray(field_a, dtype=float)
    b = np.asarray(field_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"field shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    denom = float(np.linalg.norm(b))
    num = float(np.linalg.norm(diff))
    if denom == 0.0:
        return ErrorMetrics(rel_l2=num, max_abs=float(np.max(np.abs(diff), initial=0.0)),
                            pointwise=np.abs(diff), absolute_only=True)
    return ErrorMetrics(rel_l2=num / denom,
                        max_abs=float(np.max(np.abs(diff), initial=0.0)),
                        pointwise=np.abs(diff))
