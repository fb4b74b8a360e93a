"""Integral-uniform norms of discrete functions.

For a function ``f`` on a probability space the integral-uniform norm is

    ||f||_{m,inf} = E max(|f(x_1)|, ..., |f(x_m)|),   x_j i.i.d. ~ mu.

On a finite atom set this is an order-statistic expectation with a closed
form. With ``u_1 > u_2 > ... > u_r`` the distinct absolute values and
``S_k = mu{|f| >= u_k}``,

    ||f||_{m,inf} = sum_k u_k [(1 - S_{k-1})^m - (1 - S_k)^m],   S_0 = 0,

and the layer-cake form ``int_0^inf 1 - (1 - lambda_f(t))^m dt`` collapses to
a finite sum over the steps of the distribution function ``lambda_f``.
Powers ``(1 - S)^m`` are taken as ``exp(m * log1p(-S))`` so ``m`` up to
``1e9`` stays accurate.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np

from ._parallel import pmap, trial_rng

MASS_TOL = 1e-12

Sampler = Callable[[np.random.Generator, int], np.ndarray]


class FormatError(ValueError):
    """Malformed input file; ``line`` is the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Finitely many atoms ``(value, mass)`` with masses summing to one."""

    values: np.ndarray
    masses: np.ndarray
    description: str = ""
    _canon: Tuple[np.ndarray, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        masses = np.asarray(self.masses, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("a discrete function needs at least one atom")
        if values.shape != masses.shape:
            raise ValueError("values and masses must have the same length")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if np.any(masses <= 0) or np.any(masses > 1) or not np.all(np.isfinite(masses)):
            raise ValueError("masses must lie in (0, 1]")
        total = float(np.sum(masses))
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total!r}, expected 1")
        values.flags.writeable = False
        masses.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_canon", _canonicalize(values, masses))

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[float, float]], description: str = "") -> "DiscreteFunction":
        atoms = list(atoms)
        if not atoms:
            raise ValueError("a discrete function needs at least one atom")
        values, masses = zip(*atoms)
        return cls(np.array(values, dtype=float), np.array(masses, dtype=float), description)

    @classmethod
    def uniform(cls, values: Sequence[float] | np.ndarray, description: str = "") -> "DiscreteFunction":
        """Uniform masses ``1/N`` over the given values (a vector under counting measure)."""
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("a discrete function needs at least one atom")
        return cls(values, np.full(values.size, 1.0 / values.size), description)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def canonical(self) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct absolute values in descending order and their merged masses."""
        return self._canon

    def l1(self) -> float:
        return float(np.dot(np.abs(self.values), self.masses))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def scaled(self, c: float) -> "DiscreteFunction":
        return DiscreteFunction(c * self.values, self.masses, self.description)

    def with_values(self, values: Sequence[float] | np.ndarray) -> "DiscreteFunction":
        """Another function on the same atoms (same masses)."""
        return DiscreteFunction(np.asarray(values, dtype=float), self.masses, self.description)

    def __add__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        if not isinstance(other, DiscreteFunction):
            return NotImplemented
        if other.masses.shape != self.masses.shape or not np.array_equal(other.masses, self.masses):
            raise ValueError("functions must share the same atom set to be added")
        return self.with_values(self.values + other.values)

    def sampler(self) -> Sampler:
        """A sampler drawing i.i.d. values distributed according to the masses."""
        values, masses = self.values, self.masses / self.masses.sum()

        def draw(rng: np.random.Generator, size: int) -> np.ndarray:
            return values[rng.choice(values.size, size=size, p=masses)]

        return draw


def _canonicalize(values: np.ndarray, masses: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # merge equal |value| atoms so superlevel masses are strictly increasing
    u, inverse = np.unique(np.abs(values), return_inverse=True)
    w = np.bincount(inverse.ravel(), weights=masses, minlength=u.size)
    u, w = u[::-1].copy(), w[::-1].copy()
    u.flags.writeable = False
    w.flags.writeable = False
    return u, w


def _superlevel_masses(w: np.ndarray) -> np.ndarray:
    s = np.minimum(np.cumsum(w), 1.0)
    if abs(s[-1] - 1.0) <= MASS_TOL:
        s[-1] = 1.0
    return s


def _pow_complement(s: np.ndarray, m: int) -> np.ndarray:
    """``(1 - s)^m`` evaluated as ``exp(m log1p(-s))``; exactly 0 where s == 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    live = s < 1.0
    out[live] = np.exp(m * np.log1p(-s[live]))
    return out


def _one_minus_pow_complement(s: np.ndarray, m: int) -> np.ndarray:
    """``1 - (1 - s)^m`` without cancellation for small ``s``."""
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    live = s < 1.0
    out[live] = -np.expm1(m * np.log1p(-s[live]))
    return out


def _check_m(m: int) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def lambda_value(f: DiscreteFunction, t: float) -> float:
    """Distribution function ``mu{|f| > t}`` (strict inequality)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return float(np.sum(f.masses[np.abs(f.values) > t]))


def m_norm_exact(f: DiscreteFunction, m: int) -> float:
    """Exact ``||f||_{m,inf}`` via the sorted-atom order-statistic sum."""
    m = _check_m(m)
    u, w = f.canonical()
    q = _pow_complement(_superlevel_masses(w), m)
    q_prev = np.concatenate(([1.0], q[:-1]))
    return float(np.dot(u, q_prev - q))


def m_norm_from_lambda(f: DiscreteFunction, m: int) -> float:
    """``int_0^inf 1 - (1 - lambda_f(t))^m dt`` summed over the steps of ``lambda_f``."""
    m = _check_m(m)
    u, w = f.canonical()
    widths = u - np.concatenate((u[1:], [0.0]))
    return float(np.dot(widths, _one_minus_pow_complement(_superlevel_masses(w), m)))


def m_norm_of_values(values: Sequence[float] | np.ndarray, m: int) -> float:
    """``||x||_{m,inf}`` of a vector under the uniform measure on its indices.

    Sorting replaces the ``N**m`` index sum; equal entries need no merging
    here because their terms telescope.
    """
    m = _check_m(m)
    x = np.sort(np.abs(np.asarray(values, dtype=float).ravel()))[::-1]
    n = x.size
    if n == 0:
        raise ValueError("empty vector")
    s = np.arange(n + 1) / n
    q = _pow_complement(s, m)
    return float(np.dot(x, q[:-1] - q[1:]))


def m_norms_of_values(values: Sequence[float] | np.ndarray, ms: Sequence[int]) -> np.ndarray:
    """``m_norm_of_values`` for several ``m`` sharing one sort."""
    x = np.sort(np.abs(np.asarray(values, dtype=float).ravel()))[::-1]
    n = x.size
    if n == 0:
        raise ValueError("empty vector")
    s = np.arange(n + 1) / n
    out = np.empty(len(ms))
    for i, m in enumerate(ms):
        q = _pow_complement(s, _check_m(m))
        out[i] = np.dot(x, q[:-1] - q[1:])
    return out


@dataclass(frozen=True)
class NormEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    @classmethod
    def from_samples(cls, samples: Sequence[float] | np.ndarray, seed: int) -> "NormEstimate":
        x = np.asarray(samples, dtype=float)
        if x.size < 2:
            raise ValueError("need at least two trials for a standard error")
        return cls(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)), int(x.size), int(seed))


def m_norm_mc(sampler: Sampler | DiscreteFunction, m: int, trials: int, seed: int,
              threads: int | None = None) -> NormEstimate:
    """Monte Carlo estimate of ``E max(|f(x_1)|, ..., |f(x_m)|)``.

    Parameters
    ----------
    sampler : callable or DiscreteFunction
        ``sampler(rng, size)`` returns ``size`` i.i.d. values of ``f``.
    m : int
        Number of points in each maximum.
    trials : int
        Number of independent maxima averaged; at least 2.
    seed : int
        Master seed. Trial ``t`` uses a generator derived from ``(seed, t)``.
    """
    m = _check_m(m)
    if trials < 2:
        raise ValueError("trials must be at least 2")
    if isinstance(sampler, DiscreteFunction):
        sampler = sampler.sampler()

    def one(t: int) -> float:
        return float(np.max(np.abs(sampler(trial_rng(seed, t), m))))

    return NormEstimate.from_samples(pmap(one, range(trials), threads), seed)


def indicator_norm(p: float, m: int) -> float:
    """``||chi_A||_{m,inf} = 1 - (1 - mu A)^m``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    m = _check_m(m)
    return float(_one_minus_pow_complement(np.array([p]), m)[0])


def avg_top_quantile(f: DiscreteFunction, p: float) -> float:
    """Average of ``|f|`` over the top-``p`` mass, splitting the boundary atom.

    This is the supremum of ``(1/mu e) int_e |f|`` over (fractional) sets of
    measure exactly ``p``.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    u, w = f.canonical()
    before = np.concatenate(([0.0], np.cumsum(w)[:-1]))
    taken = np.clip(np.minimum(w, p - before), 0.0, None)
    return float(np.dot(u, taken) / p)


def set_average(f: DiscreteFunction, membership: Sequence[float] | np.ndarray) -> Tuple[float, float]:
    """Mass and ``|f|``-average of a set holding fraction ``membership[i]`` of atom ``i``."""
    phi = np.asarray(membership, dtype=float)
    if phi.shape != f.values.shape or np.any(phi < 0) or np.any(phi > 1):
        raise ValueError("membership must be one fraction in [0, 1] per atom")
    mass = float(np.dot(phi, f.masses))
    if mass <= 0:
        raise ValueError("set has zero mass")
    return mass, float(np.dot(phi * f.masses, np.abs(f.values)) / mass)


def theorem3_bound(f: DiscreteFunction, p: float, m: int) -> Tuple[float, float]:
    """``(||f||_{m,inf}, (1 - (1-p)^m) * avg_top_quantile(f, p))``; first >= second."""
    return m_norm_exact(f, m), indicator_norm(p, m) * avg_top_quantile(f, p)


def read_discrete_csv(source: str | Path | io.TextIOBase) -> DiscreteFunction:
    """Parse a ``value,mass`` CSV; without a ``mass`` column masses are uniform."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return _parse_discrete(fh, str(source))
    return _parse_discrete(source, getattr(source, "name", "<stream>"))


def _parse_discrete(fh, name: str) -> DiscreteFunction:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file", 1) from None
    header = [h.strip().lower() for h in header]
    if "value" not in header:
        raise FormatError("header must contain a 'value' column", 1)
    vi = header.index("value")
    mi = header.index("mass") if "mass" in header else None
    values, masses = [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} fields, got {len(row)}", line)
        try:
            values.append(float(row[vi]))
            if mi is not None:
                masses.append(float(row[mi]))
        except ValueError:
            raise FormatError(f"non-numeric field in {row!r}", line) from None
        if not math.isfinite(values[-1]) or (mi is not None and not masses[-1] > 0):
            raise FormatError("values must be finite and masses positive", line)
    if not values:
        raise FormatError("no data rows", reader.line_num or 1)
    if mi is None:
        return DiscreteFunction.uniform(values, description=name)
    try:
        return DiscreteFunction(np.array(values), np.array(masses), description=name)
    except ValueError as exc:
        raise FormatError(str(exc), reader.line_num) from None


def write_discrete_csv(f: DiscreteFunction, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "mass"])
        for v, p in zip(f.values, f.masses):
            w.writerow([repr(float(v)), repr(float(p))])
