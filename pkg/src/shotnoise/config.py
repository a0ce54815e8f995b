"""Experiment configuration: a single flat JSON document."""
from __future__ import annotations

import enum
import json
import math
import numbers
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .freefermion import FF_MAX_SITES
from .operators import MAX_ED_SITES, Family, ModelSpec, validate_model


class Experiment(str, enum.Enum):
    QFI_TIMESERIES = "QFI_TIMESERIES"
    SCALING_SWEEP = "SCALING_SWEEP"
    HEATMAP = "HEATMAP"
    ETA_TABLE = "ETA_TABLE"
    ASYMPTOTE = "ASYMPTOTE"
    BOUND_CHECK = "BOUND_CHECK"


class Engine(str, enum.Enum):
    ED = "ED"
    FREE_FERMION = "FREE_FERMION"
    BOTH = "BOTH"

    @property
    def uses_ed(self) -> bool:
        return self is not Engine.FREE_FERMION

    @property
    def uses_ff(self) -> bool:
        return self is not Engine.ED


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class ExperimentConfig:
    experiment: Experiment
    family: Family = Family.TFI_PERIODIC
    J: Optional[float] = None
    h: Optional[float] = None
    lam: Optional[float] = None
    alpha_exponent: Optional[float] = None
    lambda_star: Optional[float] = None  # None means +infinity
    theta: float = 0.0
    phi: float = 0.0
    t_grid: list[float] = field(default_factory=list)
    n_grid: list[int] = field(default_factory=list)
    engine: Engine = Engine.ED
    output_dir: str = "results"
    seed: int = 0
    n_instances: int = 1
    eta_kind: str = "instantaneous"

    def couplings(self) -> dict[str, float]:
        out = {"J": self.J, "h": self.h, "lambda": self.lam, "alpha_exponent": self.alpha_exponent}
        return {k: float(v) for k, v in out.items() if v is not None}

    def model(self, n: int) -> ModelSpec:
        return ModelSpec(self.family, n, self.couplings())

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["experiment"] = self.experiment.value
        d["family"] = self.family.value
        d["engine"] = self.engine.value
        d["lambda_star"] = "inf" if self.lambda_star is None else self.lambda_star
        out = {key: d[attr] for key, attr in _KEYS.items()}
        return {k: v for k, v in out.items() if v is not None}


# json key -> dataclass attribute
_KEYS = {
    "experiment": "experiment",
    "family": "family",
    "J": "J",
    "h": "h",
    "lambda": "lam",
    "alpha_exponent": "alpha_exponent",
    "lambda_star": "lambda_star",
    "theta": "theta",
    "phi": "phi",
    "t_grid": "t_grid",
    "n_grid": "n_grid",
    "engine": "engine",
    "output_dir": "output_dir",
    "seed": "seed",
    "n_instances": "n_instances",
    "eta_kind": "eta_kind",
}
ETA_KINDS = ("instantaneous", "averaged")


def _is_real(x) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


def _t_grid(value, diags: list[str]) -> list[float]:
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra or not {"start", "stop", "num"} <= set(value):
            diags.append("t_grid: range form needs exactly start, stop, num")
            return []
        if not (_is_real(value["start"]) and _is_real(value["stop"]) and _is_int(value["num"])):
            diags.append("t_grid: start/stop must be finite numbers and num an integer")
            return []
        if value["num"] < 1:
            diags.append("t_grid: num must be >= 1")
            return []
        return [float(x) for x in np.linspace(value["start"], value["stop"], value["num"])]
    if not isinstance(value, list) or not value:
        diags.append("t_grid: must be a nonempty list of times or {start, stop, num}")
        return []
    if not all(_is_real(x) for x in value):
        diags.append("t_grid: entries must be finite numbers")
        return []
    return [float(x) for x in value]


def _parse(raw: Any) -> tuple[Optional[ExperimentConfig], list[str]]:
    diags: list[str] = []
    if not isinstance(raw, dict):
        return None, ["config: top level must be a JSON object"]
    for key in sorted(set(raw) - set(_KEYS)):
        diags.append(f"{key}: unknown key")

    def enum_field(key, cls, default=None):
        if key not in raw:
            if default is None:
                diags.append(f"{key}: required")
            return default
        try:
            return cls(raw[key])
        except ValueError:
            names = ", ".join(m.value for m in cls)
            diags.append(f"{key}: {raw[key]!r} is not one of {names}")
            return None

    experiment = enum_field("experiment", Experiment)
    family = enum_field("family", Family, Family.TFI_PERIODIC)
    engine = enum_field("engine", Engine, Engine.ED)

    kwargs: dict[str, Any] = {}
    for key in ("J", "h", "lambda", "alpha_exponent", "theta", "phi"):
        if key in raw:
            if _is_real(raw[key]):
                kwargs[_KEYS[key]] = float(raw[key])
            else:
                diags.append(f"{key}: must be a finite number")

    if "lambda_star" in raw:
        s = raw["lambda_star"]
        if s is None or (isinstance(s, str) and s.lower() in ("inf", "infinity")):
            kwargs["lambda_star"] = None
        elif _is_real(s) and s > 0:
            kwargs["lambda_star"] = float(s)
        else:
            diags.append("lambda_star: must be a positive number, \"inf\" or null")

    if "t_grid" in raw:
        kwargs["t_grid"] = _t_grid(raw["t_grid"], diags)
    if "n_grid" in raw:
        ns = raw["n_grid"]
        if isinstance(ns, list) and ns and all(_is_int(n) for n in ns):
            kwargs["n_grid"] = [int(n) for n in ns]
        else:
            diags.append("n_grid: must be a nonempty list of integers")
    for key in ("seed", "n_instances"):
        if key in raw:
            if _is_int(raw[key]):
                kwargs[key] = int(raw[key])
            else:
                diags.append(f"{key}: must be an integer")
    if "output_dir" in raw:
        if isinstance(raw["output_dir"], str) and raw["output_dir"]:
            kwargs["output_dir"] = raw["output_dir"]
        else:
            diags.append("output_dir: must be a nonempty string")
    if "eta_kind" in raw:
        if raw["eta_kind"] in ETA_KINDS:
            kwargs["eta_kind"] = raw["eta_kind"]
        else:
            diags.append(f"eta_kind: must be one of {', '.join(ETA_KINDS)}")

    if experiment is None or family is None or engine is None:
        return None, diags
    cfg = ExperimentConfig(experiment=experiment, family=family, engine=engine, **kwargs)
    return cfg, diags


def _rules(cfg: ExperimentConfig, raw_keys: set[str]) -> list[str]:
    """Cross-field rules on a parsed config."""
    d: list[str] = []
    exp, eng = cfg.experiment, cfg.engine
    ts, ns = cfg.t_grid, cfg.n_grid

    if exp is Experiment.ASYMPTOTE:
        for key, val in (("J", cfg.J), ("lambda", cfg.lam)):
            if val is None:
                d.append(f"{key}: required for ASYMPTOTE")
            elif val <= 0:
                d.append(f"{key}: must be > 0")
        if "lambda_star" not in raw_keys:
            d.append("lambda_star: required for ASYMPTOTE (use \"inf\" for the product state)")
        if cfg.J is not None and cfg.lam is not None:
            if cfg.J == cfg.lam or (cfg.lambda_star is not None and cfg.lambda_star == cfg.J):
                d.append("lambda: critical point lambda = J or lambda_star = J is excluded")
        return d

    if not ts:
        d.append("t_grid: required")
    elif any(t < 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        d.append("t_grid: times must be >= 0 and strictly increasing")
    if not ns:
        d.append("n_grid: required")
        return d
    if len(set(ns)) != len(ns):
        d.append("n_grid: sizes must be distinct")
    if any(n < 1 for n in ns):
        d.append("n_grid: sizes must be positive")

    if exp is Experiment.BOUND_CHECK and cfg.family is Family.CUSTOM:
        # random instances; couplings are drawn, not configured
        if eng is not Engine.ED:
            d.append("engine: BOUND_CHECK needs the ED engine")
        if cfg.n_instances < 1:
            d.append("n_instances: must be >= 1")
        if any(n > MAX_ED_SITES for n in ns):
            d.append(f"n_grid: ED engine is capped at N <= {MAX_ED_SITES}")
        return d
    if cfg.family is Family.CUSTOM:
        d.append("family: CUSTOM is only available for randomized BOUND_CHECK runs")
        return d

    for n in sorted(set(ns)):
        if n >= 1:
            d.extend(p for p in validate_model(cfg.model(n)) if p not in d)
            break

    if eng.uses_ed and any(n > MAX_ED_SITES for n in ns):
        d.append(f"n_grid: ED engine is capped at N <= {MAX_ED_SITES}")
    if eng.uses_ff:
        if cfg.family is not Family.TFI_PERIODIC:
            d.append(f"engine: {eng.value} requires family TFI_PERIODIC, got {cfg.family.value}")
        if any(n % 2 or n < 4 for n in ns):
            d.append("n_grid: free-fermion engine needs even N >= 4")
        if any(n > FF_MAX_SITES for n in ns):
            d.append(f"n_grid: free-fermion engine is capped at N <= {FF_MAX_SITES}")

    single_n = (Experiment.QFI_TIMESERIES, Experiment.HEATMAP, Experiment.ETA_TABLE)
    if exp in single_n and len(ns) != 1:
        d.append(f"n_grid: {exp.value} takes exactly one chain length")
    if exp is Experiment.SCALING_SWEEP and len(ns) < 3:
        d.append("n_grid: SCALING_SWEEP needs at least 3 sizes for the fit")
    if exp in (Experiment.QFI_TIMESERIES, Experiment.HEATMAP, Experiment.BOUND_CHECK) and not eng.uses_ed:
        d.append(f"engine: {exp.value} needs the ED engine (or BOTH)")
    if exp is Experiment.HEATMAP and eng is not Engine.ED:
        d.append("engine: HEATMAP is ED-only")
    if exp is Experiment.ETA_TABLE:
        if eng is not Engine.FREE_FERMION:
            d.append("engine: ETA_TABLE needs the FREE_FERMION engine")
        if len(ts) != 1:
            d.append("t_grid: ETA_TABLE takes exactly one time")
    return d


def validate(raw: Any) -> list[str]:
    """Diagnostics ``"field: rule"``; empty iff ``run`` would accept the config."""
    try:
        cfg, diags = _parse(raw)
        if cfg is not None:
            diags = diags + _rules(cfg, set(raw))
        return diags
    except Exception as exc:  # validation never throws
        return [f"config: {type(exc).__name__}: {exc}"]


def from_dict(raw: Any) -> ExperimentConfig:
    diags = validate(raw)
    if diags:
        raise ConfigError(diags)
    cfg, _ = _parse(raw)
    return cfg


def load(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
