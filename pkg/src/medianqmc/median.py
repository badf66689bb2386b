"""The construction-free median QMC estimator.

Draw r generating vectors independently and uniformly, compute the plain QMC
average for each, return the median. Draw ``l`` of a run seeded with
``master_seed`` always uses the stream ``spawn_rng(master_seed, l)``, so the
result does not depend on evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from ._parallel import pmap, spawn_rng
from .gfpoly import PolyGF, is_irreducible
from .lattice import LatticeRule, lattice_blocks, sample_generating_vector
from .numtheory import binomial
from .polylattice import HoplRule, hopl_array, sample_generating_vector_poly

__all__ = [
    "MedianConfig",
    "MedianEstimate",
    "qmc_estimate",
    "median_of",
    "median_lattice_estimate",
    "median_hopl_estimate",
    "p_plus",
]

DEFAULT_R = 11


@dataclass(frozen=True)
class MedianConfig:
    r: int = DEFAULT_R
    master_seed: int = 0
    allow_even: bool = False

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be positive")
        if self.r % 2 == 0 and not self.allow_even:
            raise ValueError("r must be odd (pass allow_even=True for the mean-of-middle-two median)")


@dataclass(frozen=True)
class MedianEstimate:
    estimate: float
    rules: tuple
    estimates: tuple[float, ...]


_SPLIT = 134217729.0  # 2^27 + 1


def _two_product(a: float, b: float) -> tuple[float, float]:
    """p + e == a * b exactly (Dekker), barring overflow."""
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def qmc_estimate(f: Callable[[np.ndarray], np.ndarray], points) -> float:
    """Equal-weight average of f over the points.

    ``points`` is either an (N, s) array or an iterable of such blocks, which
    are consumed one at a time. Each block sum is kept as an exactly rounded
    pair (``math.fsum`` of the values, then of the values minus that sum), and
    the final quotient gets one residual correction, so the result is the
    mean to within rounding of the last step; a constant integrand returns
    exactly its constant.
    """
    blocks: Iterable[np.ndarray] = [points] if isinstance(points, np.ndarray) else points
    parts: list[float] = []
    count = 0
    for blk in blocks:
        vals = np.asarray(f(blk), dtype=float).ravel()
        if not np.all(np.isfinite(vals)):
            raise ValueError("integrand returned a non-finite value")
        hi = math.fsum(vals)
        parts += [hi, math.fsum(np.append(vals, -hi))]
        count += len(vals)
    if count == 0:
        raise ValueError("empty point set")
    mean = math.fsum(parts) / count
    p, e = _two_product(mean, float(count))
    return mean + math.fsum(parts + [-p, -e]) / count


def median_of(values: Sequence[float], allow_even: bool = False) -> float:
    """Middle order statistic of an odd-length sample.

    Even lengths are rejected unless ``allow_even``, in which case the mean of
    the two middle values is returned.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("median of an empty sequence")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("median inputs must be finite")
    vals.sort()
    k = len(vals)
    if k % 2:
        return vals[k // 2]
    if not allow_even:
        raise ValueError("median of an even number of values is not unique")
    return 0.5 * (vals[k // 2 - 1] + vals[k // 2])


def median_lattice_estimate(f, N: int, s: int, config: MedianConfig, threads: int | None = None) -> MedianEstimate:
    def one(ell: int):
        rule = sample_generating_vector(N, s, spawn_rng(config.master_seed, ell))
        return rule, qmc_estimate(f, lattice_blocks(rule))

    out = pmap(one, range(config.r), threads)
    rules = tuple(r for r, _ in out)
    ests = tuple(e for _, e in out)
    return MedianEstimate(median_of(ests, config.allow_even), rules, ests)


def median_hopl_estimate(f, b: int, m: int, n: int, p: PolyGF, s: int, config: MedianConfig,
                         threads: int | None = None) -> MedianEstimate:
    if p.degree != n:
        raise ValueError(f"modulus degree {p.degree} differs from precision n = {n}")
    if not is_irreducible(p):
        raise ValueError(f"modulus {p} is reducible")

    def one(ell: int):
        q = sample_generating_vector_poly(n, s, b, spawn_rng(config.master_seed, ell))
        rule = HoplRule(b, m, n, p, q)
        return rule, qmc_estimate(f, hopl_array(rule))

    out = pmap(one, range(config.r), threads)
    rules = tuple(r for r, _ in out)
    ests = tuple(e for _, e in out)
    return MedianEstimate(median_of(ests, config.allow_even), rules, ests)


_EXACT_R_LIMIT = 401


def p_plus(r: int, q: float) -> float:
    """Probability that the median of r draws exceeds the q-quantile of one draw.

    Exact rational summation with exact binomials for moderate r; a
    log-domain sum beyond that.
    """
    if r < 1 or r % 2 == 0:
        raise ValueError("r must be a positive odd integer")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    lo = (r + 1) // 2
    if r <= _EXACT_R_LIMIT:
        qf = Fraction(q)
        pf = 1 - qf
        return float(sum(binomial(r, i) * pf ** i * qf ** (r - i) for i in range(lo, r + 1)))
    logs = [
        math.log(binomial(r, i)) + i * math.log1p(-q) + (r - i) * math.log(q)
        for i in range(lo, r + 1)
    ]
    top = max(logs)
    return min(1.0, math.exp(top) * math.fsum(math.exp(v - top) for v in logs))
