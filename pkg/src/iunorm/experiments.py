"""Batch experiments behind the ``iunorm`` subcommands.

Each ``cmd_*`` takes a :class:`RunConfig` and returns a :class:`Report` whose
rows are plain dicts with a fixed column order. Every stochastic quantity is
seeded per trial, so a report depends only on its config.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ._parallel import pmap, trial_rng
from .norm_core import m_norm_exact, m_norm_mc, m_norms_of_values, read_discrete_csv
from .random_ensemble import EnsembleSpec, FunctionSystem, salem_zygmund_ratio, sandwich
from .sign_select import DEFAULT_DELTA, Certificate18, search_signs
from .trig_poly import (DISCRETIZATION_SLACK, analytic_derivative, discretization_gap, kernel,
                        random_real_poly, sample_values)

BERNSTEIN_SLACK = 1.02
SZ_SPREAD = 2.0
MC_BAND = 4.0


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: List[int] = field(default_factory=list)
    m: List[int] = field(default_factory=list)
    dist: str = "rademacher"
    trials: Optional[int] = None
    seed: Optional[int] = None
    net_factor: Optional[int] = None
    c0: float = 0.05
    beta: float = 0.0
    kind: str = "both"
    input: Optional[str] = None
    mc: Optional[int] = None
    count: int = 10
    attempts: int = 200
    refine: bool = False
    delta: float = DEFAULT_DELTA
    system: str = "cos"
    threads: Optional[int] = None

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError(f"{self.command}: --seed is required for stochastic commands")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        return self.seed

    def update_from_json(self, path: str | Path) -> None:
        """Merge an experiment grid file: ``{system, n_list, m_list, dist, trials, seed, net_factor}``."""
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        renames = {"n_list": "n", "m_list": "m"}
        known = {f.name for f in fields(self)}
        for key, value in data.items():
            key = renames.get(key, key)
            if key not in known or key == "command":
                raise ConfigError(f"unknown config key {key!r}")
            if key in ("n", "m") and not isinstance(value, list):
                value = [value]
            setattr(self, key, value)


@dataclass
class Report:
    columns: List[str]
    rows: List[Dict[str, Any]]
    document: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return all(bool(r["pass"]) for r in self.rows if "pass" in r)


def cmd_norm(cfg: RunConfig) -> Report:
    if not cfg.input:
        raise ConfigError("norm: --input CSV is required")
    f = read_discrete_csv(cfg.input)
    ms = cfg.m or [1]
    if cfg.mc is None:
        return Report(["m", "norm"], [{"m": m, "norm": m_norm_exact(f, m)} for m in ms])
    seed = cfg.require_seed()
    rows = []
    for m in ms:
        est = m_norm_mc(f, m, cfg.mc, seed, cfg.threads)
        exact = m_norm_exact(f, m)
        rows.append({"m": m, "norm": est.mean, "std_error": est.std_error, "trials": est.trials,
                     "exact": exact, "pass": abs(est.mean - exact) <= MC_BAND * est.std_error + 1e-12})
    return Report(["m", "norm", "std_error", "trials", "exact", "pass"], rows)


def _kernel_norms(kind: str, n: int, ms: Sequence[int], net_factor: int) -> np.ndarray:
    vals = sample_values(kernel(kind, n), net_factor * n).real
    return m_norms_of_values(vals, ms)


def cmd_kernel_sweep(cfg: RunConfig) -> Report:
    if len(cfg.n) != 1 or cfg.n[0] < 1:
        raise ConfigError("kernel-sweep: exactly one --n >= 1 is required")
    n = cfg.n[0]
    ms = cfg.m or [2 ** i for i in range(int(math.log2(n)) + 1)]
    if any(m > n or m < 1 for m in ms):
        raise ConfigError("kernel-sweep: every m must satisfy 1 <= m <= n")
    kinds = ["fejer", "dirichlet"] if cfg.kind == "both" else [cfg.kind]
    net_factor = cfg.net_factor or 64
    rows = []
    for kind in kinds:
        for m, v in zip(ms, _kernel_norms(kind, n, ms, net_factor)):
            rows.append({"kind": kind, "n": n, "m": m, "norm": float(v), "norm_over_m": float(v) / m,
                         "norm_over_mlog": float(v) / (m * (1 + math.log(n / m)))})
    return Report(["kind", "n", "m", "norm", "norm_over_m", "norm_over_mlog"], rows)


def cmd_sandwich(cfg: RunConfig) -> Report:
    seed = cfg.require_seed()
    if not cfg.n or not cfg.m:
        raise ConfigError("sandwich: --n and --m lists are required")
    if cfg.system != "cos":
        raise ConfigError(f"sandwich: unknown function system {cfg.system!r}")
    try:
        spec = EnsembleSpec(cfg.dist)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    trials = cfg.trials or 200
    rows = []
    for n in cfg.n:
        fs = FunctionSystem.cosine(n, cfg.net_factor or 8)
        gate = fs.satisfies_condition_a(spec.moment_bound)
        for rep in sandwich(spec, np.ones(n), fs, cfg.m, trials, seed, cfg.threads):
            rows.append({"n": n, "m": rep.m, "R": rep.R, "P": rep.P, "lhs": rep.lhs.mean,
                         "std_error": rep.lhs.std_error, "trials": rep.lhs.trials,
                         "rhs_low": rep.rhs_low, "ratio_low": rep.ratio_low,
                         "rhs_high": rep.rhs_high, "ratio_high": rep.ratio_high,
                         "gate": gate, "seed": seed, "pass": gate and rep.ok})
    return Report(["n", "m", "R", "P", "lhs", "std_error", "trials", "rhs_low", "ratio_low",
                   "rhs_high", "ratio_high", "gate", "seed", "pass"], rows)


def bernstein_row(n: int, m: int, index: int, seed: int, net_factor: int = 64) -> Dict[str, Any]:
    p = random_real_poly(n, trial_rng(seed, index))
    N = net_factor * n
    lhs = m_norms_of_values(sample_values(analytic_derivative(p, 1), N).real, [m])[0]
    base = m_norms_of_values(sample_values(p, N).real, [m])[0]
    rhs = n * base
    return {"index": index, "n": n, "m": m, "deriv_norm": float(lhs), "n_times_norm": float(rhs),
            "ratio": float(lhs / rhs), "pass": bool(lhs <= BERNSTEIN_SLACK * rhs)}


def _poly_jobs(cfg: RunConfig):
    if not cfg.n or not cfg.m:
        raise ConfigError(f"{cfg.command}: --n and --m lists are required")
    if any(n < 1 for n in cfg.n):
        raise ConfigError("n must be positive")
    jobs, index = [], 0
    for n in cfg.n:
        for _ in range(cfg.count):
            for m in cfg.m:
                jobs.append((n, m, index))
            index += 1
    return jobs


def cmd_bernstein(cfg: RunConfig) -> Report:
    seed = cfg.require_seed()
    nf = cfg.net_factor or 64
    rows = pmap(lambda j: bernstein_row(j[0], j[1], j[2], seed, nf), _poly_jobs(cfg), cfg.threads)
    return Report(["index", "n", "m", "deriv_norm", "n_times_norm", "ratio", "pass"], rows)


def discretize_row(n: int, m: int, index: int, seed: int, fine_factor: int = 64) -> Dict[str, Any]:
    gap = discretization_gap(random_real_poly(n, trial_rng(seed, index)), m, fine_factor)
    return {"index": index, "n": n, "m": m, "continuous": gap.continuous_approx, "net8n": gap.net8n,
            "rel_gap": gap.rel_gap, "pass": gap.ok}


def cmd_discretize(cfg: RunConfig) -> Report:
    seed = cfg.require_seed()
    ff = cfg.net_factor or 64
    rows = pmap(lambda j: discretize_row(j[0], j[1], j[2], seed, ff), _poly_jobs(cfg), cfg.threads)
    return Report(["index", "n", "m", "continuous", "net8n", "rel_gap", "pass"], rows)


def cmd_salem_zygmund(cfg: RunConfig) -> Report:
    seed = cfg.require_seed()
    if not cfg.n or any(n < 2 for n in cfg.n):
        raise ConfigError("salem-zygmund: --n values must be >= 2")
    trials = cfg.trials or 200
    ests = [salem_zygmund_ratio(n, trials, seed, net_factor=cfg.net_factor or 8, threads=cfg.threads)
            for n in cfg.n]
    floor = min(e.mean for e in ests)
    rows = [{"n": n, "trials": e.trials, "ratio": e.mean, "std_error": e.std_error, "sweep_min": floor,
             "pass": e.mean <= SZ_SPREAD * floor} for n, e in zip(cfg.n, ests)]
    return Report(["n", "trials", "ratio", "std_error", "sweep_min", "pass"], rows)


def sign_system(n: int, net_factor: int = 8) -> FunctionSystem:
    """``cos(i x)`` rows normalized to unit ``L^1`` norm on the net."""
    return FunctionSystem.cosine(n, net_factor).l1_normalized()


def cmd_sign_search(cfg: RunConfig) -> Report:
    seed = cfg.require_seed()
    if len(cfg.n) != 1 or cfg.n[0] < 1:
        raise ConfigError("sign-search: exactly one --n is required")
    n = cfg.n[0]
    cert: Certificate18 = search_signs(sign_system(n, cfg.net_factor or 8), cfg.attempts, cfg.c0, seed,
                                       refine=cfg.refine, delta=cfg.delta, threads=cfg.threads)
    rows = [{"n": n, "k": r.k, "lhs": r.lhs, "target": r.target, "ratio": r.lhs / math.sqrt(n * r.k),
             "bridge_norm": r.bridge_norm, "bridge_ok": r.bridge_ok, "attempt": cert.attempt,
             "pass": r.passed and r.bridge_ok} for r in cert.rows]
    return Report(["n", "k", "lhs", "target", "ratio", "bridge_norm", "bridge_ok", "attempt", "pass"],
                  rows, cert.to_json())


COMMANDS = {
    "norm": cmd_norm,
    "kernel-sweep": cmd_kernel_sweep,
    "sandwich": cmd_sandwich,
    "bernstein": cmd_bernstein,
    "discretize": cmd_discretize,
    "salem-zygmund": cmd_salem_zygmund,
    "sign-search": cmd_sign_search,
}


def run(cfg: RunConfig) -> Report:
    try:
        fn = COMMANDS[cfg.command]
    except KeyError:
        raise ConfigError(f"unknown command {cfg.command!r}") from None
    return fn(cfg)


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ValueError("non-finite value in report")
        return repr(float(v))
    return str(v)


def render(report: Report, fmt: str = "csv") -> str:
    if fmt == "csv":
        lines = [",".join(report.columns)]
        lines += [",".join(_fmt(r[c]) for c in report.columns) for r in report.rows]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        if report.document is not None:
            return json.dumps(report.document, indent=2) + "\n"
        rows = [{c: _jsonable(r[c]) for c in report.columns} for r in report.rows]
        return json.dumps(rows, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _jsonable(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v
