"""Built-in configurations for the figure-level experiments.

Couplings per family: TFI J=2, lambda=5, phi=0; CI J=h=lambda=1; LRI J=1,
lambda=0.5, alpha=3.  The per-figure theta and time values are choices
documented alongside each preset, not recovered facts.
"""
from __future__ import annotations

import copy
import math

LATE_T = 5e4
N_ED = list(range(4, 13))

_TFI = {"family": "TFI_PERIODIC", "J": 2.0, "lambda": 5.0, "phi": 0.0}
_CI = {"family": "CHAOTIC_ISING_OPEN", "J": 1.0, "h": 1.0, "lambda": 1.0, "phi": 0.0}
_LRI = {"family": "LONG_RANGE_ISING", "J": 1.0, "lambda": 0.5, "alpha_exponent": 3.0, "phi": 0.0}

PRESETS: dict[str, tuple[str, dict]] = {
    "fig2a": (
        "TFI covariance map, N=10, theta=pi/2, early and late time",
        {"experiment": "HEATMAP", **_TFI, "theta": math.pi / 2, "t_grid": [0.5, LATE_T], "n_grid": [10]},
    ),
    "fig2b": (
        "TFI eta coefficients, N=64, t=5e4",
        {"experiment": "ETA_TABLE", **_TFI, "t_grid": [LATE_T], "n_grid": [64], "engine": "FREE_FERMION"},
    ),
    "fig2c": (
        "TFI QFI vs N, theta=pi/2, t=0.5 and late time (ED)",
        {"experiment": "SCALING_SWEEP", **_TFI, "theta": math.pi / 2, "t_grid": [0.5, LATE_T], "n_grid": N_ED},
    ),
    "fig2d": (
        "TFI QFI vs N from the all-up state, late time, ED and free fermions",
        {
            "experiment": "SCALING_SWEEP", **_TFI, "theta": 0.0, "t_grid": [LATE_T],
            "n_grid": [4, 6, 8, 10, 12], "engine": "BOTH",
        },
    ),
    "fig3c": (
        "CI QFI vs N, theta=pi/2, t=0.5 and late time",
        {"experiment": "SCALING_SWEEP", **_CI, "theta": math.pi / 2, "t_grid": [0.5, LATE_T], "n_grid": N_ED},
    ),
    "fig3g": (
        "LRI QFI vs N from the all-up state, late time",
        {"experiment": "SCALING_SWEEP", **_LRI, "theta": 0.0, "t_grid": [LATE_T], "n_grid": N_ED},
    ),
    "fig3h": (
        "LRI QFI vs N, theta=pi/4, late time",
        {"experiment": "SCALING_SWEEP", **_LRI, "theta": math.pi / 4, "t_grid": [LATE_T], "n_grid": N_ED},
    ),
    "eq14": (
        "TFI quench asymptote from the all-up state, J=2, lambda=5",
        {"experiment": "ASYMPTOTE", "J": 2.0, "lambda": 5.0, "lambda_star": "inf"},
    ),
    "bound": (
        "growth bound on 100 random local models, N<=6",
        {
            "experiment": "BOUND_CHECK", "family": "CUSTOM", "seed": 1, "n_instances": 100,
            "n_grid": [2, 3, 4, 5, 6], "t_grid": {"start": 0.0, "stop": 5.0, "num": 50},
        },
    ),
}


def names() -> list[str]:
    return list(PRESETS)


def get(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    return copy.deepcopy(PRESETS[name][1])


def describe(name: str) -> str:
    return PRESETS[name][0]
