"""Trigonometric polynomials on the circle and their values on uniform nets.

The circle ``[0, 2pi)`` carries the normalized measure ``dt / (2pi)``, so a
net of ``N`` equispaced points is a discrete function with masses ``1/N``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from .norm_core import DiscreteFunction, FormatError, m_norm_exact

CONJ_TOL = 1e-12
# half a net step times Bernstein's factor: sup <= net_max / (1 - pi/4) on a 4n net
UNIFORM_NET_FACTOR = 1.0 / (1.0 - math.pi / 4.0)
DISCRETIZATION_SLACK = 0.01


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """``P(x) = sum_{j=-n}^{n} c_j e^{ijx}``; ``coeffs[j + n]`` holds ``c_j``."""

    coeffs: np.ndarray
    real_valued: bool = True

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise ValueError("coefficient array must have odd length 2n+1")
        if self.real_valued:
            scale = max(1.0, float(np.max(np.abs(c))))
            if np.max(np.abs(c - np.conj(c[::-1]))) > CONJ_TOL * scale:
                raise ValueError("real-valued polynomial needs c_{-j} = conj(c_j)")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def from_cos_sin(cls, a: np.ndarray, b: np.ndarray | None = None) -> "TrigPoly":
        """``a_0 + sum_{j>=1} a_j cos(jx) + b_j sin(jx)`` with ``b_0`` ignored."""
        a = np.asarray(a, dtype=float)
        b = np.zeros_like(a) if b is None else np.asarray(b, dtype=float)
        n = a.size - 1
        c = np.zeros(2 * n + 1, dtype=complex)
        c[n] = a[0]
        pos = (a[1:] - 1j * b[1:]) / 2
        c[n + 1:] = pos
        c[:n] = np.conj(pos)[::-1]
        return cls(c, real_valued=True)

    def coeff(self, j: int) -> complex:
        n = self.order
        return complex(self.coeffs[j + n]) if abs(j) <= n else 0j

    def __call__(self, x):
        return eval_poly(self, x)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        n = max(self.order, other.order)
        return TrigPoly(_pad(self.coeffs, n) + _pad(other.coeffs, n),
                        real_valued=self.real_valued and other.real_valued)

    def __rmul__(self, c: float) -> "TrigPoly":
        real = self.real_valued and np.isreal(c)
        return TrigPoly(c * self.coeffs, real_valued=bool(real))


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    k = (c.size - 1) // 2
    return np.pad(c, (n - k, n - k))


def eval_poly(p: TrigPoly, x):
    """Direct summation ``sum_j c_j exp(ijx)``; real output for real-valued ``p``."""
    x = np.asarray(x, dtype=float)
    n = p.order
    j = np.arange(-n, n + 1)
    vals = np.exp(1j * np.multiply.outer(x, j)) @ p.coeffs
    if p.real_valued:
        vals = vals.real
    return vals if vals.ndim else vals.item()


def kernel(kind: str, n: int) -> TrigPoly:
    """Fejer (``1 - |j|/(n+1)``) or Dirichlet (all ones) kernel of order ``n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    j = np.arange(-n, n + 1)
    if kind == "fejer":
        c = 1.0 - np.abs(j) / (n + 1.0)
    elif kind == "dirichlet":
        c = np.ones(2 * n + 1)
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    return TrigPoly(c.astype(complex))


def random_real_poly(n: int, rng: np.random.Generator) -> TrigPoly:
    """Real polynomial of order ``n`` with i.i.d. standard normal cos/sin coefficients."""
    return TrigPoly.from_cos_sin(rng.standard_normal(n + 1), rng.standard_normal(n + 1))


def analytic_derivative(p: TrigPoly, r: int = 1) -> TrigPoly:
    """``r``-th derivative: ``c_j -> (ij)^r c_j``."""
    if r < 1:
        raise ValueError("r must be a positive integer")
    n = p.order
    j = np.arange(-n, n + 1)
    return TrigPoly((1j * j) ** r * p.coeffs, real_valued=p.real_valued)


def riesz_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes ``x_k = (2k-1)pi/(2n)`` and weights ``1/(4n sin^2(x_k/2))``, k = 1..2n."""
    if n < 1:
        raise ValueError("the interpolation formula needs n >= 1")
    k = np.arange(1, 2 * n + 1)
    x = (2 * k - 1) * math.pi / (2 * n)
    return x, 1.0 / (4 * n * np.sin(x / 2) ** 2)


def riesz_derivative(p: TrigPoly, x, n: int | None = None):
    """``P'(x)`` from ``2n`` shifted values of ``P`` (M. Riesz interpolation).

    ``n`` is the order of the polynomial space and defaults to ``p.order``;
    it must be at least ``max(p.order, 1)``.
    """
    if not p.real_valued:
        raise ValueError("the interpolation formula is stated for real polynomials")
    n = p.order if n is None else int(n)
    if n < max(p.order, 1):
        raise ValueError("n must be >= max(order, 1)")
    nodes, lam = riesz_nodes(n)
    signs = np.where(np.arange(2 * n) % 2 == 0, 1.0, -1.0)
    x = np.asarray(x, dtype=float)
    shifted = eval_poly(p, np.add.outer(x, nodes))
    out = shifted @ (signs * lam)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True, eq=False)
class NetVector:
    """Samples at ``t_k = origin + k * 2pi/N``, ``k = 0..N-1``."""

    samples: np.ndarray
    origin: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size == 0:
            raise ValueError("empty net")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def net_size(self) -> int:
        return int(self.samples.size)

    @property
    def points(self) -> np.ndarray:
        return self.origin + 2 * math.pi * np.arange(self.net_size) / self.net_size

    def as_discrete(self) -> DiscreteFunction:
        return DiscreteFunction.uniform(self.samples)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "t_k", "value"])
            for k, (t, v) in enumerate(zip(self.points, self.samples), start=1):
                w.writerow([k, repr(float(t)), repr(float(v))])


def sample_values(p: TrigPoly, N: int) -> np.ndarray:
    """Complex values of ``p`` at ``2pi k/N``, ``k = 0..N-1``, by one inverse FFT.

    Frequencies are folded modulo ``N``, which is exact for any ``N``.
    """
    if N < 1:
        raise ValueError("net size must be positive")
    n = p.order
    folded = np.zeros(N, dtype=complex)
    np.add.at(folded, np.arange(-n, n + 1) % N, p.coeffs)
    return np.fft.ifft(folded) * N


def sample_on_net(p: TrigPoly, N: int) -> NetVector:
    if not p.real_valued:
        raise ValueError("net vectors hold real samples; use sample_values for complex polynomials")
    return NetVector(sample_values(p, N).real)


def uniform_norm_estimate(p: TrigPoly) -> float:
    """Max ``|P|`` over the ``4n`` net; the true sup is at most ``UNIFORM_NET_FACTOR`` times this."""
    n = p.order
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(np.max(np.abs(sample_values(p, 4 * n))))


def net_m_norm(v: NetVector | np.ndarray, m: int) -> float:
    """``N^{-m} sum_{k_1..k_m} max_j |x_{k_j}|`` evaluated by sorting, not enumeration."""
    if not isinstance(v, NetVector):
        v = NetVector(v)
    return m_norm_exact(v.as_discrete(), m)


@dataclass(frozen=True)
class DiscretizationGap:
    continuous_approx: float
    net8n: float
    rel_gap: float

    @property
    def ok(self) -> bool:
        return self.rel_gap < math.pi / 4 + DISCRETIZATION_SLACK


def discretization_gap(p: TrigPoly, m: int, fine_factor: int = 64) -> DiscretizationGap:
    """Compare the ``m``-norm on the ``8n`` net with that on a ``fine_factor * 8n`` net."""
    n = max(p.order, 1)
    if fine_factor < 8:
        raise ValueError("fine_factor must be at least 8")
    fine = net_m_norm(sample_on_net(p, fine_factor * 8 * n), m)
    coarse = net_m_norm(sample_on_net(p, 8 * n), m)
    gap = abs(fine - coarse) / fine if fine > 0 else abs(fine - coarse)
    return DiscretizationGap(fine, coarse, gap)


def read_poly_csv(path: str | Path, real_valued: bool = True) -> TrigPoly:
    """Parse ``j,re,im`` rows; missing frequencies up to ``max|j|`` are zero."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header != ["j", "re", "im"]:
            raise FormatError("header must be j,re,im", 1)
        for row in reader:
            if not row:
                continue
            try:
                j, re, im = int(row[0]), float(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise FormatError(f"bad row {row!r}", reader.line_num) from None
            if j in rows:
                raise FormatError(f"duplicate frequency {j}", reader.line_num)
            rows[j] = complex(re, im)
    if not rows:
        raise FormatError("no coefficient rows", 1)
    n = max(abs(j) for j in rows)
    c = np.zeros(2 * n + 1, dtype=complex)
    for j, v in rows.items():
        c[j + n] = v
    return TrigPoly(c, real_valued=real_valued)


def write_poly_csv(p: TrigPoly, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "re", "im"])
        n = p.order
        for j in range(-n, n + 1):
            c = p.coeffs[j + n]
            w.writerow([j, repr(float(c.real)), repr(float(c.imag))])
