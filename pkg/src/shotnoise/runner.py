"""Executes an :class:`ExperimentConfig` and writes CSV results plus a manifest."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy

from . import __version__, _kernels
from . import freefermion as ff
from .config import Engine, Experiment, ExperimentConfig
from .ed import Probe, RATE_TOL, eigendecompose
from .operators import (
    Family,
    ProductStateSpec,
    build_hamiltonian,
    local_sensing_terms,
    random_local_model,
    random_product_state,
    realize_product_state,
)
from .scaling import classify, fit_scaling_exponent

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2

CROSS_TOL = 1e-8
PRNG_NAME = "numpy.random.PCG64"


class InvariantViolation(ArithmeticError):
    pass


@dataclass
class RunResult:
    exit_code: int
    output_dir: Path
    files: list[Path] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def parity_exact(theta: float) -> bool:
    """Product states with sin(theta) = 0 lie in one fermion-parity sector."""
    return abs(math.sin(theta)) < 1e-12


def _pool_map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _ed_probe(cfg: ExperimentConfig, n: int, with_terms: bool = False) -> Probe:
    model = cfg.model(n)
    H, dH = build_hamiltonian(model)
    psi = realize_product_state(ProductStateSpec(n, cfg.theta, cfg.phi))
    terms = local_sensing_terms(model) if with_terms else None
    return Probe(eigendecompose(H), dH, psi, terms)


def _ff_qfi(cfg: ExperimentConfig, n: int, t: float) -> float:
    return ff.qfi_product_state_ff(cfg.J, cfg.lam, t, n, cfg.theta, cfg.phi)


# --- experiments ----------------------------------------------------------

def _scaling_sweep(cfg, out, threads, res):
    ts = cfg.t_grid

    def per_n(n):
        ed = [_ed_probe(cfg, n).qfi(t) for t in ts] if cfg.engine.uses_ed else None
        fq = [_ff_qfi(cfg, n, t) for t in ts] if cfg.engine.uses_ff else None
        return n, ed, fq

    results = _pool_map(per_n, sorted(cfg.n_grid), threads)
    both = cfg.engine is Engine.BOTH
    engines = [e for e, on in (("ED", cfg.engine.uses_ed), ("FREE_FERMION", cfg.engine.uses_ff)) if on]

    rows, series, worst = [], {}, 0.0
    for it, t in enumerate(ts):
        for n, ed, fq in results:
            vals = {"ED": ed[it] if ed else None, "FREE_FERMION": fq[it] if fq else None}
            delta = abs(vals["ED"] - vals["FREE_FERMION"]) if both else None
            if both:
                worst = max(worst, delta / max(1.0, abs(vals["ED"])))
            for e in engines:
                row = [t, n, vals[e], vals[e] / n, e]
                if both:
                    row.append(delta)
                rows.append(row)
                series.setdefault((t, e), []).append((n, vals[e]))
    header = ["t", "n", "qfi", "qfi_over_n", "engine"] + (["abs_delta_qfi"] if both else [])
    res.files.append(write_csv(out / "qfi_scaling.csv", header, rows))

    fits = []
    for (t, e), pts in series.items():
        try:
            fit = fit_scaling_exponent(pts)
        except ValueError as exc:
            res.messages.append(f"fit skipped at t={fmt(t)} ({e}): {exc}")
            continue
        fits.append([t, e, fit.alpha, fit.alpha_stderr, fit.log_prefactor, fit.r_squared,
                     fit.n_points, classify(fit).value])
    res.files.append(write_csv(
        out / "qfi_scaling_fit.csv",
        ["t", "engine", "alpha", "alpha_stderr", "log_prefactor", "r_squared", "n_points", "regime"],
        fits,
    ))
    if both:
        if parity_exact(cfg.theta):
            if worst > CROSS_TOL:
                raise InvariantViolation(f"cross-engine QFI mismatch {worst:.3e} > {CROSS_TOL:g} (relative)")
        else:
            res.messages.append(
                "cross-engine check not enforced: theta mixes fermion-parity sectors, "
                "the free-fermion value is the antiperiodic-sector approximation"
            )


def _timeseries(cfg, out, threads, res):
    n = cfg.n_grid[0]
    probe = _ed_probe(cfg, n)
    records = _pool_map(probe.record, cfg.t_grid, threads)
    both = cfg.engine is Engine.BOTH
    rows, bad, worst = [], [], 0.0
    for r in records:
        row = [r.t, r.qfi, r.gamma, r.sqrt_qfi_rate, r.bound_slack]
        if both:
            q = _ff_qfi(cfg, n, r.t)
            row += [q, abs(q - r.qfi)]
            worst = max(worst, abs(q - r.qfi) / max(1.0, r.qfi))
        if r.violated:
            bad.append(r.t)
        rows.append(row)
    header = ["t", "qfi", "gamma", "sqrt_qfi_rate", "bound_slack"] + (["qfi_ff", "abs_delta_qfi"] if both else [])
    res.files.append(write_csv(out / "qfi_timeseries.csv", header, rows))
    if bad:
        raise InvariantViolation(f"growth bound violated beyond {RATE_TOL:g} at t={bad}")
    if both and parity_exact(cfg.theta) and worst > CROSS_TOL:
        raise InvariantViolation(f"cross-engine QFI mismatch {worst:.3e} > {CROSS_TOL:g} (relative)")


def _heatmap(cfg, out, threads, res):
    n = cfg.n_grid[0]
    probe = _ed_probe(cfg, n, with_terms=True)
    maps = _pool_map(probe.covariance, cfg.t_grid, threads)
    rows = []
    for m in maps:
        for j in range(n):
            for k in range(n):
                rows.append([m.t, j + 1, k + 1, m.matrix[j, k]])
    res.files.append(write_csv(out / "heatmap.csv", ["t", "j", "k", "cov"], rows))


def _eta(cfg, out, threads, res):
    n, t = cfg.n_grid[0], cfg.t_grid[0]
    table = ff.eta_table(cfg.J, cfg.lam, t, n, averaged=cfg.eta_kind == "averaged")
    rows = []
    for a in range(4):
        for i in range(n):
            for j in range(i, n):
                rows.append([a + 1, i + 1, j + 1, table.eta[a, i, j]])
    res.files.append(write_csv(out / "eta.csv", ["family", "i", "j", "eta"], rows))


def _asymptote(cfg, out, threads, res):
    q = ff.QuenchSpec(cfg.J, cfg.lam, cfg.lambda_star)
    row = [q.J, q.lam, "inf" if q.infinite else q.lambda_star, ff.quench_branch(q), ff.quench_asymptote_closed(q)]
    res.files.append(write_csv(out / "asymptote.csv", ["J", "lambda", "lambda_star", "branch", "value"], [row]))


def _bound_check(cfg, out, threads, res):
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if cfg.family is Family.CUSTOM:
        # draw every instance up front so results do not depend on scheduling
        jobs = []
        for i in range(cfg.n_instances):
            n = int(rng.choice(cfg.n_grid))
            jobs.append((i, random_local_model(n, rng), random_product_state(n, rng)))
    else:
        jobs = [(i, cfg.model(n), ProductStateSpec(n, cfg.theta, cfg.phi)) for i, n in enumerate(cfg.n_grid)]

    def one(job):
        i, model, state = job
        H, dH = build_hamiltonian(model)
        probe = Probe(eigendecompose(H), dH, realize_product_state(state))
        return i, model.n_sites, [probe.record(t) for t in cfg.t_grid]

    rows, bad = [], 0
    for i, n, recs in _pool_map(one, jobs, threads):
        for r in recs:
            rows.append([i, n, r.t, r.qfi, r.gamma, r.sqrt_qfi_rate, r.bound_slack])
            bad += r.violated
    res.files.append(write_csv(
        out / "bound_check.csv",
        ["instance", "n", "t", "qfi", "gamma", "sqrt_qfi_rate", "bound_slack"],
        rows,
    ))
    if bad:
        raise InvariantViolation(f"growth bound violated beyond {RATE_TOL:g} at {bad} grid points")


_DISPATCH = {
    Experiment.SCALING_SWEEP: _scaling_sweep,
    Experiment.QFI_TIMESERIES: _timeseries,
    Experiment.HEATMAP: _heatmap,
    Experiment.ETA_TABLE: _eta,
    Experiment.ASYMPTOTE: _asymptote,
    Experiment.BOUND_CHECK: _bound_check,
}


def versions() -> dict[str, str]:
    return {
        "shotnoise": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def run(cfg: ExperimentConfig, threads: int = 1, log: Callable[[str], None] | None = None) -> RunResult:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = RunResult(EXIT_OK, out)
    started = _dt.datetime.now(_dt.timezone.utc)
    t0 = time.perf_counter()
    try:
        _DISPATCH[cfg.experiment](cfg, out, max(1, threads), res)
    except ArithmeticError as exc:
        res.exit_code = EXIT_NUMERIC
        res.messages.append(f"numerical invariant violated: {exc}")
    wall = time.perf_counter() - t0

    manifest = {
        "config": cfg.to_dict(),
        "versions": versions(),
        "string_kernel_backend": _kernels.BACKEND,
        "prng": {"generator": PRNG_NAME, "seed": cfg.seed},
        "threads": threads,
        "started_utc": started.isoformat(),
        "wall_time_s": wall,
        "exit_code": res.exit_code,
        "files": [p.name for p in res.files],
        "messages": res.messages,
    }
    path = out / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    res.files.append(path)
    if log is not None:
        for m in res.messages:
            log(m)
    return res
