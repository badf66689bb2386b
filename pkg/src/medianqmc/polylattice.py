"""High-order polynomial lattice point sets over F_b and their Walsh-side error bound.

Coordinate j of point h is nu_n(h(x) q_j(x) / p(x)), the first n digits of the
Laurent expansion, stored as an exact integer numerator over b^n. With b = 2
and n <= 52 the conversion to binary64 is exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .gfpoly import (
    PolyGF,
    gf2_laurent_numerator,
    gf2_mod,
    int_to_poly,
    is_irreducible,
    laurent_digits,
    parse_poly,
    poly_add,
    poly_mod,
    poly_mulmod,
)
from .korobov import ProductWeights, minimize_over_lambda

__all__ = [
    "HoplRule",
    "HoplPoint",
    "parse_hopl_rule",
    "sample_generating_vector_poly",
    "hopl_points",
    "hopl_numerators",
    "hopl_array",
    "is_dual_net",
    "walsh",
    "walsh_multi",
    "digits_of",
    "walsh_character_sum",
    "mu_alpha",
    "c_alpha",
    "a_alpha_lambda",
    "sobolev_bound_at",
    "error_bound_sobolev",
]


@dataclass(frozen=True)
class HoplRule:
    b: int
    m: int
    n: int
    p: PolyGF
    q: tuple[PolyGF, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(self.q))
        if not 1 <= self.m <= self.n:
            raise ValueError("need 1 <= m <= n")
        if self.p.b != self.b or self.p.degree != self.n:
            raise ValueError(f"modulus must be a degree-{self.n} polynomial over F_{self.b}")
        if not is_irreducible(self.p):
            raise ValueError(f"modulus {self.p} is reducible")
        if not self.q:
            raise ValueError("generating vector must be nonempty")
        for j, qj in enumerate(self.q):
            if qj.b != self.b or qj.is_zero() or qj.degree >= self.n:
                raise ValueError(f"q[{j}] = {qj} is not a nonzero polynomial of degree < {self.n}")

    @property
    def s(self) -> int:
        return len(self.q)

    @property
    def N(self) -> int:
        return self.b ** self.m

    @property
    def order(self) -> int:
        return self.n // self.m

    def __str__(self) -> str:
        return f"{self.b};{self.m};{self.n};p={self.p};q=" + ",".join(str(v) for v in self.q)


@dataclass(frozen=True)
class HoplPoint:
    numerators: tuple[int, ...]
    denominator: int


def parse_hopl_rule(text: str) -> HoplRule:
    """Inverse of ``str(HoplRule)``: ``b;m;n;p=<poly>;q=<poly>,<poly>,...``."""
    parts = text.strip().split(";")
    if len(parts) != 5 or not parts[3].startswith("p=") or not parts[4].startswith("q="):
        raise ValueError(f"bad polynomial lattice rule {text!r}")
    b, m, n = (int(v) for v in parts[:3])
    p = parse_poly(parts[3][2:], b)
    q = tuple(parse_poly(v, b) for v in parts[4][2:].split(","))
    return HoplRule(b, m, n, p, q)


def sample_generating_vector_poly(n: int, s: int, b: int, rng: np.random.Generator) -> tuple[PolyGF, ...]:
    """s independent polynomials, each uniform over the b^n - 1 nonzero ones of degree < n."""
    if n < 1:
        raise ValueError("need n >= 1")
    size = b ** n
    if size <= 1 << 62:
        ks = rng.integers(1, size, size=s, dtype=np.int64).tolist()
    else:
        ks = []
        while len(ks) < s:
            digits = rng.integers(0, b, size=n)
            k = int(sum(int(d) * b ** i for i, d in enumerate(digits)))
            if k:
                ks.append(k)
    return tuple(int_to_poly(k, b) for k in ks)


def _numerator(digits: Sequence[int], b: int) -> int:
    v = 0
    for a in digits:
        v = v * b + a
    return v


def hopl_points(rule: HoplRule) -> Iterator[HoplPoint]:
    """Points in index order h = 0..b^m-1, one Laurent long division per coordinate."""
    den = rule.b ** rule.n
    for h in range(rule.N):
        hp = int_to_poly(h, rule.b)
        yield HoplPoint(
            tuple(_numerator(laurent_digits(hp, qj, rule.p, rule.n), rule.b) for qj in rule.q),
            den,
        )


def hopl_numerators(rule: HoplRule) -> np.ndarray:
    """All point numerators as an int64 array of shape (b^m, s), in index order.

    Uses linearity in h: the digits of point h are the F_b-combination of the
    digits of the points x^i, i < m, with the base-b digits of h as
    coefficients. Bit-identical to ``hopl_points``.
    """
    b, m, n = rule.b, rule.m, rule.n
    if b ** n > 1 << 62:
        raise ValueError("numerators exceed int64; use hopl_points")
    if b == 2:
        pb = rule.p.to_bits()
        basis = np.empty((m, rule.s), dtype=np.int64)
        for j, qj in enumerate(rule.q):
            w = gf2_mod(qj.to_bits(), pb)
            for i in range(m):
                basis[i, j] = gf2_laurent_numerator(w, pb, n)
                w = gf2_mod(w << 1, pb)
        out = np.zeros((1 << m, rule.s), dtype=np.int64)
        for i in range(m):
            half = 1 << i
            out[half : 2 * half] = out[:half] ^ basis[i]
        return out
    # generic base: work on digit arrays (points, s, n), digit a_1 first
    x = PolyGF.monomial(b, 1)
    basis = np.empty((m, rule.s, n), dtype=np.int64)
    for j, qj in enumerate(rule.q):
        w = poly_mod(qj, rule.p)
        for i in range(m):
            basis[i, j] = laurent_digits(PolyGF.one(b), w, rule.p, n)
            w = poly_mulmod(w, x, rule.p)
    dig = np.zeros((1, rule.s, n), dtype=np.int64)
    for i in range(m):
        dig = np.concatenate([(dig + c * basis[i]) % b for c in range(b)])
    weights = np.array([b ** (n - 1 - t) for t in range(n)], dtype=np.int64)
    return dig @ weights


def hopl_array(rule: HoplRule) -> np.ndarray:
    return hopl_numerators(rule) / float(rule.b ** rule.n)


def is_dual_net(k: Sequence[int], rule: HoplRule) -> bool:
    """Whether sum_j tr_n(k_j) q_j mod p has degree < n - m."""
    if len(k) != rule.s:
        raise ValueError("frequency vector length does not match dimension")
    acc = PolyGF.zero(rule.b)
    for kj, qj in zip(k, rule.q):
        if kj < 0:
            raise ValueError("dual-net frequencies are nonnegative")
        acc = poly_add(acc, poly_mulmod(int_to_poly(kj, rule.b, rule.n), qj, rule.p))
    return acc.degree < rule.n - rule.m


def digits_of(numerator: int, b: int, n: int) -> list[int]:
    """Digits xi_1..xi_n of numerator / b^n."""
    return [numerator // b ** (n - i) % b for i in range(1, n + 1)]


def walsh(k: int, digits: Sequence[int], b: int) -> complex:
    """k-th Walsh function at the point with base-b digits xi_1, xi_2, ..."""
    e = 0
    for xi in digits:
        if not k:
            break
        k, kappa = divmod(k, b)
        e += kappa * xi
    e %= b
    if b == 2:
        return complex(1 - 2 * e)
    return cmath.exp(2j * math.pi * e / b)


def walsh_multi(k: Sequence[int], digit_rows: Sequence[Sequence[int]], b: int) -> complex:
    out = complex(1)
    for kj, dj in zip(k, digit_rows):
        out *= walsh(kj, dj, b)
    return out


def walsh_character_sum(k: Sequence[int], rule: HoplRule) -> complex:
    """(1/b^m) sum over the points of wal_k(x); equals the dual-net indicator."""
    if len(k) != rule.s:
        raise ValueError("frequency vector length does not match dimension")
    total = complex(0)
    for pt in hopl_points(rule):
        rows = [digits_of(v, rule.b, rule.n) for v in pt.numerators]
        total += walsh_multi(k, rows, rule.b)
    return total / rule.N


def mu_alpha(k: int, alpha: int, b: int) -> int:
    """Sum of the positions of the alpha most significant nonzero base-b digits of k."""
    if k < 1:
        raise ValueError("mu_alpha is defined for k >= 1")
    positions = []
    pos = 1
    while k:
        k, d = divmod(k, b)
        if d:
            positions.append(pos)
        pos += 1
    positions.reverse()
    return sum(positions[:alpha])


def c_alpha(alpha: int, b: int) -> float:
    """Walsh-coefficient decay constant for the Sobolev space of smoothness alpha."""
    if alpha < 2:
        raise ValueError("C_alpha needs alpha >= 2")
    s = 2.0 * math.sin(math.pi / b)
    first = (1.0 + 1.0 / b + 1.0 / (b * (b + 1))) ** (alpha - 2)
    second = 3.0 + 2.0 / b + (2.0 * b + 1.0) / (b - 1.0)
    third = max(2.0 / s ** alpha, max(1.0 / s ** tau for tau in range(1, alpha)))
    return first * second * third


def a_alpha_lambda(alpha: int, lam: float, b: int) -> float:
    if alpha < 2:
        raise ValueError("A_{alpha,lambda} needs alpha >= 2")
    if not lam > 1.0 / alpha:
        raise ValueError("lambda must exceed 1/alpha")
    prods = []
    acc = 1.0
    for i in range(1, alpha + 1):
        acc *= (b - 1.0) / (b ** (lam * i) - 1.0)
        prods.append(acc)
    bl = b ** (lam * alpha)
    return math.fsum(prods[: alpha - 1]) + (bl - 1.0) / (bl - b) * prods[alpha - 1]


def _log_sobolev_bound(lam, m, n, alpha, weights: ProductWeights, eta, b) -> float:
    ca = c_alpha(alpha, b) ** lam
    aa = a_alpha_lambda(alpha, lam, b)
    log_prod = math.fsum(math.log1p(g ** lam * ca * aa) for g in weights.gammas)
    inner = math.expm1(log_prod)
    e = min(m, lam * n)
    log_denom = math.log(eta) + e * math.log(b) + math.log1p(-float(b) ** -e)
    return (math.log(2.0) + math.log(inner) - log_denom) / lam


def sobolev_bound_at(lam, m, n, alpha, weights: ProductWeights, eta, b=2) -> float:
    """The bound before the infimum at one lambda in (1/alpha, 1]."""
    return math.exp(_log_sobolev_bound(lam, m, n, alpha, weights, eta, b))


def error_bound_sobolev(m, n, s, alpha, weights: ProductWeights, eta, b=2) -> float:
    """Probabilistic worst-case error bound of the median polynomial lattice rule."""
    if weights.s != s:
        raise ValueError("weights and dimension differ")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if int(alpha) != alpha or alpha < 2:
        raise ValueError("Sobolev smoothness must be an integer >= 2")
    lo = 1.0 / alpha + 1e-4
    hi = 1.0 - 1e-4
    _, logb = minimize_over_lambda(lambda lam: _log_sobolev_bound(lam, m, n, alpha, weights, eta, b), lo, hi)
    return math.exp(logb)
