"""Integer and special-function primitives used by the error formulas and bounds."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "gcd",
    "euler_totient",
    "is_prime",
    "prev_prime",
    "binomial",
    "bernoulli_numbers",
    "bernoulli_poly_coeffs",
    "bernoulli_poly",
    "riemann_zeta",
]

MAX_BERNOULLI_DEGREE = 12


def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise ValueError("gcd expects nonnegative integers")
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def euler_totient(n: int) -> int:
    """Number of integers in [1, n] coprime to n, by trial-division factorisation.

    ``euler_totient(1) == 1`` by convention.
    """
    if n < 1:
        raise ValueError("totient needs n >= 1")
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


# Deterministic for every n < 3.3e24, which covers the 64-bit range.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for 64-bit integers."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prev_prime(n: int) -> int:
    """Largest prime <= n."""
    if n < 2:
        raise ValueError("no prime below 2")
    while not is_prime(n):
        n -= 1
    return n


def binomial(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be nonnegative")
    if k > n:
        raise ValueError(f"binomial({n}, {k}): k > n")
    return math.comb(n, k)


@lru_cache(maxsize=None)
def bernoulli_numbers(nmax: int = MAX_BERNOULLI_DEGREE) -> tuple[Fraction, ...]:
    """Exact Bernoulli numbers B_0..B_nmax (convention B_1 = -1/2)."""
    B = [Fraction(1)]
    for n in range(1, nmax + 1):
        acc = sum((math.comb(n + 1, k) * B[k] for k in range(n)), Fraction(0))
        B.append(-acc / (n + 1))
    return tuple(B)


@lru_cache(maxsize=None)
def bernoulli_poly_coeffs(degree: int) -> tuple[Fraction, ...]:
    """Exact coefficients of B_degree(x), highest power first."""
    if degree < 0 or degree > MAX_BERNOULLI_DEGREE:
        raise ValueError(f"Bernoulli polynomials supported up to degree {MAX_BERNOULLI_DEGREE}")
    B = bernoulli_numbers()
    # B_n(x) = sum_k C(n, k) B_k x^(n-k); index k runs from the leading term down
    return tuple(math.comb(degree, k) * B[k] for k in range(degree + 1))


# precomputed once so float coefficients never drift between call sites
for _d in range(0, MAX_BERNOULLI_DEGREE + 1):
    bernoulli_poly_coeffs(_d)


def bernoulli_poly(degree: int, x):
    """Evaluate the Bernoulli polynomial B_degree at x by Horner's scheme.

    Only even degrees 2..12 are accepted, matching the smoothness range
    alpha = 1..6 of the closed-form worst-case error. ``x`` may be a float
    or a numpy array.
    """
    if degree % 2 or not 2 <= degree <= MAX_BERNOULLI_DEGREE:
        raise ValueError(f"unsupported Bernoulli degree {degree}; need even 2..12")
    coeffs = [float(c) for c in bernoulli_poly_coeffs(degree)]
    if isinstance(x, np.ndarray):
        acc = np.full_like(x, coeffs[0], dtype=float)
    else:
        acc = coeffs[0]
    for c in coeffs[1:]:
        acc = acc * x + c
    return acc


_ZETA_DIRECT_TERMS = 10_000


def riemann_zeta(t: float) -> float:
    """Riemann zeta for real t > 1.

    Direct summation of the first 10^4 terms followed by an Euler-Maclaurin
    tail with six Bernoulli corrections. The tail is exact in its leading
    1/(t-1) behaviour, so arguments as close to 1 as the Korobov bound needs
    (2 alpha lambda = 1 + 4e-4) stay at full accuracy.
    """
    if not t > 1.0:
        raise ValueError(f"riemann_zeta needs t > 1, got {t}")
    M = _ZETA_DIRECT_TERMS
    k = np.arange(M - 1, 0, -1, dtype=float)  # smallest terms first
    head = math.fsum(k ** (-t))
    tail = M ** (1.0 - t) / (t - 1.0) + 0.5 * M ** (-t)
    B = bernoulli_numbers()
    rising = t  # t (t+1) ... (t+2j-2)
    for j in range(1, 7):
        term = float(B[2 * j]) / math.factorial(2 * j) * rising * M ** (-t - 2 * j + 1)
        tail += term
        rising *= (t + 2 * j - 1) * (t + 2 * j)
    return head + tail
