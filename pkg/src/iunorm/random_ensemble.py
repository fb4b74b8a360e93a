"""Random polynomials ``sum_i a_i xi_i f_i`` and the bounds on their m-norms.

Function systems live on a uniform net; the continuous ``||.||_{m,inf}`` of a
realization is replaced by the exact m-norm of its net samples. Constants in
the lower and upper bounds are unknown, so the bound helpers return the
constant-free right-hand sides and callers report ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ._parallel import pmap, trial_rng
from .norm_core import NormEstimate, m_norm_of_values, m_norms_of_values
from .trig_poly import NetVector

XI_KINDS = ("rademacher", "gaussian")
THIRD_ABS_MOMENT = {"rademacher": 1.0, "gaussian": 2.0 * math.sqrt(2.0 / math.pi)}
CONDITION_A_TOL = 0.02


@dataclass(frozen=True)
class EnsembleSpec:
    """Centered, unit-variance coefficient law with ``E|xi|^3 <= M^3``.

    Only Rademacher and Gaussian laws are admitted; both satisfy the
    sub-Gaussian tail estimate needed by the upper bound.
    """

    xi_kind: str = "rademacher"
    moment_bound: float = 2.0

    def __post_init__(self):
        if self.xi_kind not in XI_KINDS:
            raise ValueError(f"unsupported xi distribution {self.xi_kind!r}; choose from {XI_KINDS}")
        if self.moment_bound < 1:
            raise ValueError("moment bound M must be >= 1")
        if THIRD_ABS_MOMENT[self.xi_kind] > self.moment_bound ** 3 + 1e-12:
            raise ValueError(f"E|xi|^3 = {THIRD_ABS_MOMENT[self.xi_kind]:.4f} exceeds M^3")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.xi_kind == "rademacher":
            return rng.choice(np.array([-1.0, 1.0]), size=n)
        return rng.standard_normal(n)


def sample_xi(spec: EnsembleSpec, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    return spec.draw(np.random.default_rng(seed), n)


def r_statistic(a: Sequence[float] | np.ndarray) -> float:
    """``(sum a^2)^2 / sum a^4``; lies in ``[1, n]``, equals ``n`` for flat coefficients."""
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("coefficient vector must be nonzero")
    # rescale first: a^4 under/overflows long before a does
    b = a / np.max(np.abs(a))
    b2 = b * b
    return float(np.sum(b2) ** 2 / np.sum(b2 * b2))


@dataclass(frozen=True, eq=False)
class FunctionSystem:
    """``n`` functions sampled on a common uniform net (rows = functions)."""

    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.size == 0:
            raise ValueError("empty function system")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def net_size(self) -> int:
        return self.values.shape[1]

    def lp_norms(self, p: float) -> np.ndarray:
        return np.mean(np.abs(self.values) ** p, axis=1) ** (1.0 / p)

    @property
    def l2_norms(self) -> np.ndarray:
        return self.lp_norms(2)

    @property
    def l3_bound(self) -> float:
        return float(np.max(self.lp_norms(3)))

    def sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.values), axis=1)

    def satisfies_condition_a(self, M: float, tol: float = CONDITION_A_TOL) -> bool:
        """``||f_i||_2 = 1`` (within ``tol``) and ``||f_i||_3 <= M`` for every row."""
        return bool(np.all(np.abs(self.l2_norms - 1.0) <= tol) and self.l3_bound <= M)

    def l1_normalized(self) -> "FunctionSystem":
        return FunctionSystem(self.values / self.lp_norms(1)[:, None], self.name + "/l1")

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        return np.asarray(coeffs, dtype=float) @ self.values

    @classmethod
    def cosine(cls, n: int, net_factor: int = 8) -> "FunctionSystem":
        """``sqrt(2) cos(i x)``, ``i = 1..n``, on a ``net_factor * n`` net."""
        if n < 1:
            raise ValueError("n must be positive")
        N = net_factor * n
        t = 2 * math.pi * np.arange(N) / N
        return cls(math.sqrt(2.0) * np.cos(np.outer(np.arange(1, n + 1), t)), f"sqrt2cos(n={n},N={N})")


def random_poly_net(spec: EnsembleSpec, a: np.ndarray, fs: FunctionSystem, seed: int) -> NetVector:
    """One realization ``sum_i a_i xi_i f_i`` at the net points of ``fs``."""
    return NetVector(_realize(spec, a, fs, np.random.default_rng(seed)))


def _realize(spec: EnsembleSpec, a: np.ndarray, fs: FunctionSystem, rng: np.random.Generator) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (fs.n,):
        raise ValueError(f"{a.size} coefficients for a system of {fs.n} functions")
    return fs.combine(a * spec.draw(rng, fs.n))


def realization_norms(spec: EnsembleSpec, a: np.ndarray, fs: FunctionSystem, ms: Sequence[int],
                      trials: int, seed: int, threads: int | None = None) -> np.ndarray:
    """``trials x len(ms)`` array of net m-norms; trial ``t`` uses ``trial_rng(seed, t)``."""
    if trials < 2:
        raise ValueError("trials must be at least 2")
    ms = list(ms)

    def one(t: int) -> np.ndarray:
        return m_norms_of_values(_realize(spec, a, fs, trial_rng(seed, t)), ms)

    return np.array(pmap(one, range(trials), threads)).reshape(trials, len(ms))


def expected_m_norm(spec: EnsembleSpec, a: np.ndarray, fs: FunctionSystem, m: int,
                    trials: int, seed: int, threads: int | None = None) -> NormEstimate:
    """Monte Carlo ``E ||sum a_i xi_i f_i||_{m,inf}`` with exact per-trial net norms."""
    return NormEstimate.from_samples(realization_norms(spec, a, fs, [m], trials, seed, threads)[:, 0], seed)


def theorem1_rhs(a: np.ndarray, m: int) -> float:
    """``sqrt(sum a^2 * ln P)`` with ``P = min(m, R) + 1`` (constant omitted)."""
    if m < 1:
        raise ValueError("m must be positive")
    a = np.asarray(a, dtype=float)
    P = min(m, r_statistic(a)) + 1.0
    return math.sqrt(float(np.sum(a * a)) * math.log(P))


def theorem2_rhs(fs: FunctionSystem, a: np.ndarray, m: int) -> float:
    """``||(sum a_i^2 f_i^2)^{1/2}||_{m,inf} * sqrt(1 + ln m)`` on the net."""
    if m < 1:
        raise ValueError("m must be positive")
    a = np.asarray(a, dtype=float)
    g = np.sqrt((a * a) @ (fs.values ** 2))
    return m_norm_of_values(g, m) * math.sqrt(1.0 + math.log(m))


def corollary2_rhs(fs: FunctionSystem, a: np.ndarray, m: int) -> float:
    """``max_i ||f_i||_inf * (sum a^2)^{1/2} * sqrt(1 + ln m)``."""
    if m < 1:
        raise ValueError("m must be positive")
    a = np.asarray(a, dtype=float)
    return float(np.max(fs.sup_norms())) * math.sqrt(float(np.sum(a * a))) * math.sqrt(1.0 + math.log(m))


@dataclass(frozen=True)
class BoundReport:
    n: int
    m: int
    R: float
    P: float
    lhs: NormEstimate
    rhs_low: float
    rhs_high: float
    seed: int

    @property
    def ratio_low(self) -> float:
        return self.lhs.mean / self.rhs_low

    @property
    def ratio_high(self) -> float:
        return self.lhs.mean / self.rhs_high

    @property
    def ok(self) -> bool:
        return self.ratio_low > 0 and self.ratio_high <= 1.0


def sandwich(spec: EnsembleSpec, a: np.ndarray, fs: FunctionSystem, ms: Sequence[int],
             trials: int, seed: int, threads: int | None = None) -> List[BoundReport]:
    """Lower (constant-free) and Corollary-2 upper bound ratios for each ``m``."""
    a = np.asarray(a, dtype=float)
    norms = realization_norms(spec, a, fs, ms, trials, seed, threads)
    R = r_statistic(a)
    out = []
    for i, m in enumerate(ms):
        out.append(BoundReport(
            n=fs.n, m=int(m), R=R, P=min(m, R) + 1.0,
            lhs=NormEstimate.from_samples(norms[:, i], seed),
            rhs_low=theorem1_rhs(a, m), rhs_high=corollary2_rhs(fs, a, m), seed=seed,
        ))
    return out


def salem_zygmund_ratio(n: int, trials: int, seed: int, diagnostic: bool = False,
                        net_factor: int = 8, threads: int | None = None) -> NormEstimate:
    """``max |sum_{|k|<=n} r_k e^{ikt}|`` on a ``net_factor*n`` net over ``sqrt(n ln n)``.

    With ``diagnostic=True`` every sign is +1 (the Dirichlet kernel) and all
    trials coincide.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if trials < 2:
        raise ValueError("trials must be at least 2")
    N = net_factor * n
    idx = np.arange(-n, n + 1) % N
    scale = math.sqrt(n * math.log(n))

    def one(t: int) -> float:
        if diagnostic:
            r = np.ones(2 * n + 1)
        else:
            r = trial_rng(seed, t).choice(np.array([-1.0, 1.0]), size=2 * n + 1)
        folded = np.zeros(N, dtype=complex)
        np.add.at(folded, idx, r)
        return float(np.max(np.abs(np.fft.ifft(folded) * N))) / scale

    return NormEstimate.from_samples(pmap(one, range(trials), threads), seed)
