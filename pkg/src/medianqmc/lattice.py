"""Rank-1 lattice point sets.

Point ``n`` of the rule (N, z) has integer numerators ``n * z_j mod N`` over
the common denominator N. Points are streamed in blocks; floats appear only
at the integrand boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "LatticeRule",
    "LatticePoint",
    "parse_lattice_rule",
    "sample_generating_vector",
    "sample_generating_vectors",
    "lattice_points",
    "lattice_blocks",
    "lattice_array",
    "is_dual",
    "character_sum",
    "character_sums",
    "dual_mask",
    "tent_transform",
    "cbc_construct",
]

DEFAULT_BLOCK = 1 << 14


@dataclass(frozen=True)
class LatticeRule:
    N: int
    z: tuple[int, ...]

    def __post_init__(self):
        z = tuple(int(v) for v in self.z)
        object.__setattr__(self, "z", z)
        if self.N < 2:
            raise ValueError("a lattice rule needs N >= 2")
        if not z:
            raise ValueError("generating vector must have at least one component")
        for j, zj in enumerate(z):
            if not 1 <= zj <= self.N - 1 or math.gcd(zj, self.N) != 1:
                raise ValueError(f"z[{j}] = {zj} is not a unit modulo {self.N}")

    @property
    def s(self) -> int:
        return len(self.z)

    def __str__(self) -> str:
        return f"{self.N};" + ",".join(map(str, self.z))


@dataclass(frozen=True)
class LatticePoint:
    numerators: tuple[int, ...]
    denominator: int

    def as_floats(self) -> tuple[float, ...]:
        return tuple(k / self.denominator for k in self.numerators)


def parse_lattice_rule(text: str) -> LatticeRule:
    """Inverse of ``str(LatticeRule)``: ``"N;z_1,z_2,...,z_s"``."""
    try:
        n_part, z_part = text.strip().split(";")
        return LatticeRule(int(n_part), tuple(int(v) for v in z_part.split(",")))
    except ValueError as exc:
        raise ValueError(f"bad lattice rule {text!r}: {exc}") from None


def _draw_units(N: int, shape, rng: np.random.Generator) -> np.ndarray:
    # rejection sampling: uniform on [1, N-1], redraw anything sharing a factor with N
    z = rng.integers(1, N, size=shape, dtype=np.int64)
    bad = np.gcd(z, N) != 1
    while bad.any():
        z[bad] = rng.integers(1, N, size=int(bad.sum()), dtype=np.int64)
        bad = np.gcd(z, N) != 1
    return z


def sample_generating_vector(N: int, s: int, rng: np.random.Generator) -> LatticeRule:
    """Generating vector with independent components uniform on U_N."""
    if N < 2 or s < 1:
        raise ValueError("need N >= 2 and s >= 1")
    return LatticeRule(N, tuple(_draw_units(N, s, rng).tolist()))


def sample_generating_vectors(N: int, s: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent generating vectors as an int64 array of shape (count, s)."""
    if N < 2 or s < 1:
        raise ValueError("need N >= 2 and s >= 1")
    return _draw_units(N, (count, s), rng)


def lattice_points(rule: LatticeRule) -> Iterator[LatticePoint]:
    N, z = rule.N, rule.z
    for n in range(N):
        yield LatticePoint(tuple(n * zj % N for zj in z), N)


def lattice_blocks(rule: LatticeRule, block: int = DEFAULT_BLOCK, tent: bool = False) -> Iterator[np.ndarray]:
    """Float point coordinates in consecutive blocks of at most ``block`` rows."""
    z = np.asarray(rule.z, dtype=np.int64)
    for start in range(0, rule.N, block):
        n = np.arange(start, min(start + block, rule.N), dtype=np.int64)
        x = (n[:, None] * z[None, :]) % rule.N / rule.N
        yield tent_transform(x) if tent else x


def lattice_array(rule: LatticeRule, tent: bool = False) -> np.ndarray:
    return np.concatenate(list(lattice_blocks(rule, tent=tent)))


def is_dual(k: Sequence[int], rule: LatticeRule) -> bool:
    if len(k) != rule.s:
        raise ValueError("frequency vector length does not match dimension")
    return sum(int(kj) * zj for kj, zj in zip(k, rule.z)) % rule.N == 0


def character_sum(k: Sequence[int], rule: LatticeRule) -> complex:
    """(1/N) sum over the points of exp(2 pi i k.x); a test oracle."""
    if len(k) != rule.s:
        raise ValueError("frequency vector length does not match dimension")
    kz = sum(int(kj) * zj for kj, zj in zip(k, rule.z)) % rule.N
    n = np.arange(rule.N)
    phase = (n * kz) % rule.N / rule.N
    return complex(np.exp(2j * np.pi * phase).mean())


def character_sums(K: np.ndarray, rule: LatticeRule) -> np.ndarray:
    """Character sums for every row of the (count, s) integer array ``K``.

    Evaluated straight from the point set, (1/N) sum_n exp(2 pi i k.x_n),
    rather than through k.z mod N as ``character_sum`` does.
    """
    K = np.atleast_2d(np.asarray(K, dtype=np.int64))
    if K.shape[1] != rule.s:
        raise ValueError("frequency vectors do not match dimension")
    num = (np.arange(rule.N, dtype=np.int64)[:, None] * np.asarray(rule.z, dtype=np.int64)) % rule.N
    phase = (num @ K.T) % rule.N / rule.N
    return np.exp(2j * np.pi * phase).mean(axis=0)


def dual_mask(K: np.ndarray, rule: LatticeRule) -> np.ndarray:
    """``is_dual`` for every row of ``K``."""
    K = np.atleast_2d(np.asarray(K, dtype=np.int64))
    if K.shape[1] != rule.s:
        raise ValueError("frequency vectors do not match dimension")
    return (K @ np.asarray(rule.z, dtype=np.int64)) % rule.N == 0


def tent_transform(x):
    """pi(x) = 1 - |2x - 1|, elementwise."""
    if isinstance(x, np.ndarray):
        return 1.0 - np.abs(2.0 * x - 1.0)
    return 1.0 - abs(2.0 * x - 1.0)


def cbc_construct(N: int, s: int, alpha: int, weights, candidate_block: int = 512) -> LatticeRule:
    """Component-by-component generating vector for the closed-form Korobov error.

    z_1 = 1; every later z_j minimises the squared worst-case error with the
    earlier components frozen. Only candidates up to N/2 are scanned: z and
    N - z give bit-identical criteria because the kernel table is mirrored,
    so this both halves the work and makes ties resolve to the smaller z.
    """
    from .korobov import ProductWeights, kernel_table

    weights = weights if isinstance(weights, ProductWeights) else ProductWeights(weights)
    if len(weights.gammas) < s:
        raise ValueError("need one weight per coordinate")
    table = kernel_table(N, alpha)
    g2 = np.asarray(weights.gammas[:s], dtype=float) ** 2
    n = np.arange(N, dtype=np.int64)
    prod = 1.0 + g2[0] * table[n]
    z = [1]
    cands = np.array([c for c in range(1, N // 2 + 1) if math.gcd(c, N) == 1], dtype=np.int64)
    for j in range(1, s):
        crit = np.empty(len(cands))
        for lo in range(0, len(cands), candidate_block):
            c = cands[lo : lo + candidate_block]
            vals = prod[None, :] * (1.0 + g2[j] * table[(c[:, None] * n[None, :]) % N])
            crit[lo : lo + len(c)] = vals.sum(axis=1)
        best = int(cands[int(np.argmin(crit))])
        z.append(best)
        prod = prod * (1.0 + g2[j] * table[(best * n) % N])
    return LatticeRule(N, tuple(z))
