"""Sign selection for dyadic tail averages, and the sign-sum to coefficient lemma.

For ``F = sum theta_i f_i`` the quantity ``2^k sup_{mu e = 2^-k} int_e |F|`` is
the average of ``|F|`` over its top ``2^-k`` mass, so it is computed exactly
by a rearrangement instead of a subset search.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Sequence, Tuple

import numpy as np

from ._parallel import pmap, trial_rng
from .norm_core import DiscreteFunction, avg_top_quantile, m_norm_exact
from .random_ensemble import FunctionSystem
from .trig_poly import NetVector

BRIDGE_TOL = 1e-12
L1_GATE_TOL = 0.02
DEFAULT_DELTA = 0.25

Seminorm = Callable[[np.ndarray], float]


def _as_discrete(F) -> DiscreteFunction:
    if isinstance(F, DiscreteFunction):
        return F
    if isinstance(F, NetVector):
        return F.as_discrete()
    return DiscreteFunction.uniform(F)


def problem18_lhs(F, k: int) -> float:
    """``2^k int_{e*} |F|`` for the best set ``e*`` of measure ``2^-k``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    f = _as_discrete(F)
    p = 2.0 ** -k
    if p < float(np.min(f.masses)) * (1 - 1e-12):
        raise ValueError(f"2^-{k} is below the finest atom mass {np.min(f.masses):.3g}; use a finer net")
    return avg_top_quantile(f, p)


@dataclass(frozen=True)
class CertificateRow:
    k: int
    lhs: float
    target: float
    passed: bool
    bridge_norm: float
    bridge_ok: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.target if self.target > 0 else math.inf


@dataclass(frozen=True)
class Certificate18:
    theta: Tuple[int, ...]
    rows: Tuple[CertificateRow, ...]
    n: int
    l1_norm: float = 0.0
    l1_branch: bool = False
    attempt: int = -1
    attempts_bridge_ok: bool = True

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def bridge_ok(self) -> bool:
        return all(r.bridge_ok for r in self.rows)

    def min_ratio(self) -> float:
        """``min_k lhs_k / sqrt(n k)``, independent of the target constant."""
        return min(r.lhs / math.sqrt(self.n * r.k) for r in self.rows)

    def to_json(self) -> dict:
        return {
            "theta": list(self.theta),
            "rows": [{"k": r.k, "lhs": r.lhs, "target": r.target, "pass": r.passed} for r in self.rows],
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def verify_18(F, n: int, k_max: int, c0: float, theta: Sequence[int] = (),
              delta: float = DEFAULT_DELTA) -> Certificate18:
    """Check ``lhs_k >= c0 sqrt(n k)`` and ``||F||_{2^k,inf} <= 2 lhs_k`` for ``k = 1..k_max``."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    f = _as_discrete(F)
    rows = []
    for k in range(1, k_max + 1):
        lhs = problem18_lhs(f, k)
        target = c0 * math.sqrt(n * k)
        bridge = m_norm_exact(f, 2 ** k)
        rows.append(CertificateRow(k, lhs, target, lhs >= target, bridge,
                                   bridge <= 2 * lhs + BRIDGE_TOL * max(1.0, bridge)))
    l1 = f.l1()
    return Certificate18(tuple(int(t) for t in theta), tuple(rows), n, l1, l1 >= n ** (0.5 + delta))


def _min_ratio(values: np.ndarray, n: int, k_max: int) -> float:
    x = np.sort(np.abs(values))[::-1]
    csum = np.cumsum(x)
    N = x.size
    best = math.inf
    for k in range(1, k_max + 1):
        cnt = N / 2 ** k
        whole = int(math.floor(cnt))
        top = (csum[whole - 1] if whole else 0.0) + (cnt - whole) * (x[whole] if whole < N else 0.0)
        best = min(best, top / cnt / math.sqrt(n * k))
    return best


def search_signs(fs: FunctionSystem, attempts: int, c0: float, seed: int, k_max: int | None = None,
                 refine: bool = False, delta: float = DEFAULT_DELTA,
                 threads: int | None = None) -> Certificate18:
    """Random sign search maximizing ``min_k lhs_k / sqrt(n k)``.

    Attempt ``i`` draws its signs from ``trial_rng(seed, i)``; ties go to the
    smallest attempt index. The bridge inequality is checked on every attempt
    and the conjunction is reported as ``attempts_bridge_ok``. With
    ``refine=True`` one greedy pass of single-sign flips is applied to the
    winner.
    """
    if attempts < 1:
        raise ValueError("attempts must be at least 1")
    l1 = fs.lp_norms(1)
    if np.any(np.abs(l1 - 1.0) > L1_GATE_TOL):
        raise ValueError("every function needs ||f_i||_1 = 1 (within 2%); try fs.l1_normalized()")
    n = fs.n
    if k_max is None:
        k_max = max(1, int(math.floor(math.log2(n)))) if n > 1 else 1
    if 2 ** k_max > fs.net_size:
        raise ValueError("net too coarse for k_max; use a finer net")

    def one(i: int):
        theta = trial_rng(seed, i).choice(np.array([-1.0, 1.0]), size=n)
        F = fs.combine(theta)
        cert = verify_18(F, n, k_max, c0, theta, delta)
        return cert.min_ratio(), cert.bridge_ok, theta

    results = pmap(one, range(attempts), threads)
    scores = [r[0] for r in results]
    best = int(np.argmax(scores))  # first maximum
    theta = results[best][2]
    if refine:
        theta = _greedy_flip(fs, theta, k_max)
    cert = verify_18(fs.combine(theta), n, k_max, c0, theta, delta)
    return Certificate18(cert.theta, cert.rows, n, cert.l1_norm, cert.l1_branch, best,
                         all(r[1] for r in results) and cert.bridge_ok)


def _greedy_flip(fs: FunctionSystem, theta: np.ndarray, k_max: int) -> np.ndarray:
    theta = theta.copy()
    F = fs.combine(theta)
    score = _min_ratio(F, fs.n, k_max)
    for i in range(fs.n):
        trial = F - 2 * theta[i] * fs.values[i]
        s = _min_ratio(trial, fs.n, k_max)
        if s > score:
            theta[i] = -theta[i]
            F, score = trial, s
    return theta


# ---------------------------------------------------------------------------
# lemma: sign-sum bound -> bound for arbitrary coefficients
# ---------------------------------------------------------------------------

@dataclass
class LemmaInstance:
    """Unit vectors ``w_i`` (the coordinate basis) under ``seminorm`` with
    ``||sum theta_i w_i|| <= c11 n^{1/2+beta}`` for all signs."""

    beta: float
    c11: float
    n: int
    seminorm: Seminorm

    def __post_init__(self):
        if not 0 <= self.beta < 0.5:
            raise ValueError("beta must lie in [0, 1/2)")
        if self.c11 <= 0 or self.n < 1:
            raise ValueError("need c11 > 0 and n >= 1")

    def sign_bound(self) -> float:
        return self.c11 * self.n ** (0.5 + self.beta)

    def check_probes(self, rng: np.random.Generator | None = None, probes: int = 64, tol: float = 1e-9) -> bool:
        """Unit basis norms, the sign-sum bound, homogeneity and subadditivity on probes.

        For ``n <= 12`` every sign vector is checked.
        """
        rng = np.random.default_rng(0) if rng is None else rng
        n = self.n
        eye = np.eye(n)
        if any(abs(self.seminorm(eye[i]) - 1.0) > tol for i in range(n)):
            return False
        if n <= 12:
            signs = 1.0 - 2.0 * ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1)
        else:
            signs = rng.choice(np.array([-1.0, 1.0]), size=(probes, n))
            signs = np.vstack([signs, np.ones(n)])
        bound = self.sign_bound()
        if any(self.seminorm(s) > bound * (1 + tol) for s in signs):
            return False
        for _ in range(probes):
            x, y = rng.standard_normal(n), rng.standard_normal(n)
            c = rng.standard_normal()
            nx, ny = self.seminorm(x), self.seminorm(y)
            if abs(self.seminorm(c * x) - abs(c) * nx) > tol * (1 + abs(c) * nx):
                return False
            if self.seminorm(x + y) > (nx + ny) * (1 + tol) + tol:
                return False
        return True

    def c12(self) -> float:
        """Constant with ``bound <= c12 * n^{1/4+beta/2} * ||a||_2`` for the rounded ``K``."""
        return math.sqrt(2.0) * (4.0 + self.c11) + 1.0


@dataclass
class DyadicBound:
    bound: float
    groups: List[List[int]]
    residual: List[int]
    peeled: List[int]
    K: int
    scale: float = 1.0
    group_sizes_ok: bool = field(init=False)

    def __post_init__(self):
        self.group_sizes_ok = all(len(g) <= 4 ** (k + 1) for k, g in enumerate(self.groups))


def dyadic_level(n: int, beta: float) -> int:
    """``K = (1/4 + beta/2) log2 n`` rounded half up."""
    return max(0, int(math.floor((0.25 + beta / 2) * math.log2(n) + 0.5))) if n > 1 else 0


def dyadic_bound(inst: LemmaInstance, a: Sequence[float] | np.ndarray) -> DyadicBound:
    """Constructive upper bound on ``||sum a_i w_i||`` by magnitude bands.

    Coefficients are rescaled to ``sum a^2 = n``. Band ``k`` (``1 <= k <= K``)
    holds indices with ``2^-k sqrt(n) <= |a_j| < 2^{-k+1} sqrt(n)`` and costs
    at most ``2^{k+1} sqrt(n)``; the rest lies in ``2^-K sqrt(n)`` times the
    hull of sign sums. Indices with ``|a_j| >= sqrt(n)`` are peeled off by the
    triangle inequality. ``bound`` is returned in the scale of ``a``.
    """
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("empty coefficient vector")
    if a.size != inst.n:
        raise ValueError(f"{a.size} coefficients for dimension {inst.n}")
    n = inst.n
    norm = float(np.linalg.norm(a))
    if norm == 0:
        return DyadicBound(0.0, [], [], [], dyadic_level(n, inst.beta), 0.0)
    s = math.sqrt(n) / norm
    b = np.abs(a) * s
    root = math.sqrt(n)
    K = dyadic_level(n, inst.beta)
    # the largest entry can sit at sqrt(n) up to rounding
    peel = b >= root * (1 - 1e-12)
    peeled = [int(i) for i in np.flatnonzero(peel)]
    groups: List[List[int]] = []
    for k in range(1, K + 1):
        band = (~peel) & (b >= root * 2.0 ** -k) & (b < root * 2.0 ** (-k + 1))
        groups.append([int(i) for i in np.flatnonzero(band)])
    residual_mask = (~peel) & (b < root * 2.0 ** -K)
    residual = [int(i) for i in np.flatnonzero(residual_mask)]
    bound = root * (2.0 ** (K + 2) + inst.c11 * 2.0 ** -K * n ** (0.5 + inst.beta))
    bound += float(np.sum(b[peel]))
    return DyadicBound(bound / s, groups, residual, peeled, K, s)


def sharpness_seminorm(beta: float, n: int, a: Sequence[float] | np.ndarray) -> float:
    """``max(sum_{k <= L} |a_k|, max_{k > L} |a_k|)`` with ``L = floor(n^{1/2+beta})``."""
    if not 0 <= beta < 0.5:
        raise ValueError("beta must lie in [0, 1/2)")
    a = np.abs(np.asarray(a, dtype=float).ravel())
    if a.size != n:
        raise ValueError(f"{a.size} coefficients for dimension {n}")
    L = sharpness_block(beta, n)
    head = float(np.sum(a[:L]))
    tail = float(np.max(a[L:])) if L < n else 0.0
    return max(head, tail)


def sharpness_block(beta: float, n: int) -> int:
    # guard floor against n**x landing just below an integer
    return min(n, int(math.floor(n ** (0.5 + beta) * (1 + 1e-12))))


def sharpness_witness(beta: float, n: int) -> Tuple[np.ndarray, float]:
    """Witness coefficients (ones on the first block) and ``||W|| / (n^{1/4+beta/2} ||a||_2)``."""
    L = sharpness_block(beta, n)
    a = np.zeros(n)
    a[:L] = 1.0
    return a, sharpness_seminorm(beta, n, a) / (n ** (0.25 + beta / 2) * math.sqrt(L))
