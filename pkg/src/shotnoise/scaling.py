"""Power-law exponent of QFI against chain length."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import stats

CLASSIFY_MARGIN = 0.1


@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    alpha_stderr: float
    log_prefactor: float
    r_squared: float
    n_points: int


class Regime(str, enum.Enum):
    SNL_OR_BELOW = "SNL_OR_BELOW"
    SUPER_SNL = "SUPER_SNL"
    HEISENBERG_LIKE = "HEISENBERG_LIKE"


def fit_scaling_exponent(points: Iterable[tuple[int, float]]) -> ScalingFit:
    """OLS of log I on log N; ``I ~ exp(log_prefactor) N^alpha``."""
    pts = sorted((int(n), float(q)) for n, q in points)
    if len(pts) < 3:
        raise ValueError("need at least 3 (N, qfi) points")
    n = np.array([p[0] for p in pts], dtype=float)
    q = np.array([p[1] for p in pts])
    if len(set(n)) != len(n):
        raise ValueError("chain lengths must be distinct")
    if np.any(n <= 0):
        raise ValueError("chain lengths must be positive")
    if np.any(~np.isfinite(q)) or np.any(q <= 0):
        raise ValueError("qfi values must be positive and finite")
    res = stats.linregress(np.log(n), np.log(q))
    r2 = min(max(res.rvalue**2, 0.0), 1.0)
    stderr = res.stderr if math.isfinite(res.stderr) else 0.0
    return ScalingFit(float(res.slope), float(abs(stderr)), float(res.intercept), float(r2), len(pts))


def classify(fit: ScalingFit, margin: float = CLASSIFY_MARGIN) -> Regime:
    if fit.alpha <= 1.0 + 2.0 * fit.alpha_stderr + margin:
        return Regime.SNL_OR_BELOW
    if fit.alpha >= 2.0 - 2.0 * fit.alpha_stderr - margin:
        return Regime.HEISENBERG_LIKE
    return Regime.SUPER_SNL
