"""Polynomials over the prime field F_b.

Polynomials are dense and stored lowest degree first. For b = 2 the hot
operations (multiplication, reduction, irreducibility, Laurent digits) also
have a bit-packed route where a polynomial is a Python int whose bit i is the
coefficient of x^i; the two routes are cross-checked in the tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

__all__ = [
    "PolyGF",
    "SUPPORTED_BASES",
    "poly_add",
    "poly_sub",
    "poly_mul",
    "poly_divmod",
    "poly_mod",
    "poly_mulmod",
    "poly_powmod",
    "poly_gcd",
    "is_irreducible",
    "int_to_poly",
    "poly_to_int",
    "laurent_digits",
    "parse_poly",
    "gf2_mul",
    "gf2_mod",
    "gf2_divmod",
    "gf2_laurent_numerator",
]

SUPPORTED_BASES = (2, 3, 5, 7)


@dataclass(frozen=True)
class PolyGF:
    """Polynomial over F_b; ``coeffs[i]`` is the coefficient of x^i.

    The zero polynomial has empty ``coeffs``. Construction reduces the
    coefficients mod b and strips leading zeros, so two equal polynomials
    always compare and hash equal.
    """

    b: int
    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        if self.b not in SUPPORTED_BASES:
            raise ValueError(f"base {self.b} not supported; use one of {SUPPORTED_BASES}")
        c = [int(v) % self.b for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def zero(cls, b: int) -> "PolyGF":
        return cls(b, ())

    @classmethod
    def one(cls, b: int) -> "PolyGF":
        return cls(b, (1,))

    @classmethod
    def monomial(cls, b: int, degree: int, coeff: int = 1) -> "PolyGF":
        return cls(b, (0,) * degree + (coeff,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __add__(self, other: "PolyGF") -> "PolyGF":
        return poly_add(self, other)

    def __sub__(self, other: "PolyGF") -> "PolyGF":
        return poly_sub(self, other)

    def __mul__(self, other: "PolyGF") -> "PolyGF":
        return poly_mul(self, other)

    def __divmod__(self, other: "PolyGF"):
        return poly_divmod(self, other)

    def __mod__(self, other: "PolyGF") -> "PolyGF":
        return poly_mod(self, other)

    def to_int(self) -> int:
        return poly_to_int(self)

    def to_bits(self) -> int:
        """Bit-packed form for b = 2."""
        if self.b != 2:
            raise ValueError("bit-packed form only exists for b = 2")
        return poly_to_int(self)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
                continue
            mono = "x" if i == 1 else f"x^{i}"
            terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(terms)

    def __repr__(self) -> str:
        return f"PolyGF({self.b}, {str(self)!r})"


_TERM = re.compile(r"^(\d*)(x(?:\^(\d+))?)?$")


def parse_poly(text: str, b: int) -> PolyGF:
    """Parse the textual form produced by ``str(PolyGF)``, e.g. ``x^52+x^3+1``."""
    text = text.replace(" ", "")
    if text in ("", "0"):
        return PolyGF.zero(b)
    coeffs: dict[int, int] = {}
    for term in text.split("+"):
        mt = _TERM.match(term)
        if not term or mt is None:
            raise ValueError(f"cannot parse polynomial term {term!r} in {text!r}")
        cstr, xpart, estr = mt.groups()
        if xpart is None:
            if not cstr:
                raise ValueError(f"empty term in {text!r}")
            e = 0
        else:
            e = int(estr) if estr else 1
        c = int(cstr) if cstr else 1
        coeffs[e] = coeffs.get(e, 0) + c
    top = max(coeffs)
    return PolyGF(b, tuple(coeffs.get(i, 0) for i in range(top + 1)))


def _check_base(f: PolyGF, g: PolyGF) -> int:
    if f.b != g.b:
        raise ValueError(f"base mismatch: F_{f.b} vs F_{g.b}")
    return f.b


def poly_add(f: PolyGF, g: PolyGF) -> PolyGF:
    b = _check_base(f, g)
    n = max(len(f.coeffs), len(g.coeffs))
    fc = f.coeffs + (0,) * (n - len(f.coeffs))
    gc = g.coeffs + (0,) * (n - len(g.coeffs))
    return PolyGF(b, tuple((x + y) % b for x, y in zip(fc, gc)))


def poly_sub(f: PolyGF, g: PolyGF) -> PolyGF:
    b = _check_base(f, g)
    return poly_add(f, PolyGF(b, tuple(-c for c in g.coeffs)))


def poly_mul(f: PolyGF, g: PolyGF) -> PolyGF:
    b = _check_base(f, g)
    if not f or not g:
        return PolyGF.zero(b)
    if b == 2:
        return int_to_poly(gf2_mul(f.to_bits(), g.to_bits()), 2)
    out = [0] * (len(f.coeffs) + len(g.coeffs) - 1)
    for i, x in enumerate(f.coeffs):
        if x:
            for j, y in enumerate(g.coeffs):
                out[i + j] += x * y
    return PolyGF(b, tuple(out))


def poly_divmod(f: PolyGF, g: PolyGF) -> tuple[PolyGF, PolyGF]:
    """Schoolbook long division: f = quot * g + rem with deg(rem) < deg(g)."""
    b = _check_base(f, g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    if f.degree < g.degree:
        return PolyGF.zero(b), f
    rem = list(f.coeffs)
    dg = g.degree
    inv = pow(g.lead, -1, b)
    quot = [0] * (f.degree - dg + 1)
    for shift in range(f.degree - dg, -1, -1):
        c = rem[shift + dg] * inv % b
        if c:
            quot[shift] = c
            for i, gi in enumerate(g.coeffs):
                rem[shift + i] = (rem[shift + i] - c * gi) % b
    return PolyGF(b, tuple(quot)), PolyGF(b, tuple(rem[:dg]))


def poly_mod(f: PolyGF, g: PolyGF) -> PolyGF:
    if f.b == 2 and g.b == 2:
        if not g:
            raise ZeroDivisionError("polynomial division by zero")
        return int_to_poly(gf2_mod(f.to_bits(), g.to_bits()), 2)
    return poly_divmod(f, g)[1]


def poly_mulmod(f: PolyGF, g: PolyGF, p: PolyGF) -> PolyGF:
    """(f * g) mod p."""
    _check_base(f, g)
    _check_base(f, p)
    if not p:
        raise ZeroDivisionError("zero modulus")
    return poly_mod(poly_mul(f, g), p)


def poly_powmod(f: PolyGF, e: int, p: PolyGF) -> PolyGF:
    if e < 0:
        raise ValueError("negative exponent")
    result = poly_mod(PolyGF.one(f.b), p)
    base = poly_mod(f, p)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, p)
        base = poly_mulmod(base, base, p)
        e >>= 1
    return result


def poly_gcd(f: PolyGF, g: PolyGF) -> PolyGF:
    """Monic greatest common divisor (zero only if both inputs are zero)."""
    b = _check_base(f, g)
    while g:
        f, g = g, poly_divmod(f, g)[1]
    if not f:
        return f
    inv = pow(f.lead, -1, b)
    return PolyGF(b, tuple(c * inv for c in f.coeffs))


@lru_cache(maxsize=4096)
def is_irreducible(p: PolyGF, fast: bool = True) -> bool:
    """Irreducibility over F_b via gcd(x^(b^i) - x, p) = 1 for i <= deg(p)/2.

    Powers x^(b^i) are built by repeated b-th powering mod p, so degree 52
    and beyond is cheap. ``fast=False`` forces the generic dense route for
    b = 2 (used to cross-check the bit-packed one).
    """
    if p.degree < 1:
        raise ValueError("irreducibility is undefined for constant polynomials")
    if p.b == 2 and fast:
        return _gf2_is_irreducible(p.to_bits())
    b = p.b
    x = PolyGF.monomial(b, 1)
    h = poly_mod(x, p)
    for _ in range(p.degree // 2):
        h = poly_powmod(h, b, p)
        if poly_gcd(poly_sub(h, x), p).degree > 0:
            return False
    return True


def int_to_poly(k: int, b: int, n: int | None = None) -> PolyGF:
    """Polynomial whose i-th coefficient is the i-th base-b digit of k.

    With ``n`` given, terms of degree >= n are dropped (truncation to n digits).
    """
    if k < 0:
        raise ValueError("int_to_poly expects a nonnegative integer")
    digits = []
    while k and (n is None or len(digits) < n):
        k, d = divmod(k, b)
        digits.append(d)
    return PolyGF(b, tuple(digits))


def poly_to_int(f: PolyGF) -> int:
    value = 0
    for c in reversed(f.coeffs):
        value = value * f.b + c
    return value


def laurent_digits(h: PolyGF, q: PolyGF, p: PolyGF, n: int) -> list[int]:
    """First n digits a_1..a_n of the Laurent expansion of h*q/p in x^-1.

    The polynomial part of h*q/p is discarded first by reducing h*q mod p;
    then each step multiplies the remainder by x and takes one quotient digit.
    """
    _check_base(h, q)
    _check_base(h, p)
    if not p:
        raise ZeroDivisionError("zero modulus")
    if n < 1:
        raise ValueError("need at least one digit")
    b = p.b
    dp = p.degree
    inv = pow(p.lead, -1, b)
    rem = list(poly_mulmod(h, q, p).coeffs)
    rem += [0] * (dp - len(rem))
    digits = []
    for _ in range(n):
        # rem * x: its coefficient at x^dp decides the next digit
        top = rem[dp - 1] if dp >= 1 else 0
        rem = [0] + rem[: dp - 1] if dp >= 1 else []
        a = top * inv % b
        digits.append(a)
        if a:
            # subtract a * p (the x^dp term cancels with `top`)
            for i in range(dp):
                rem[i] = (rem[i] - a * p.coeffs[i]) % b
    return digits


# ---- bit-packed F_2 route -------------------------------------------------


def gf2_mul(a: int, b: int) -> int:
    """Carry-less product of two bit-packed F_2 polynomials."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf2_divmod(a: int, p: int) -> tuple[int, int]:
    if p == 0:
        raise ZeroDivisionError("polynomial division by zero")
    dp = p.bit_length() - 1
    q = 0
    while a.bit_length() - 1 >= dp:
        shift = a.bit_length() - 1 - dp
        q |= 1 << shift
        a ^= p << shift
    return q, a


def gf2_mod(a: int, p: int) -> int:
    return gf2_divmod(a, p)[1]


def _gf2_mulmod(a: int, b: int, p: int) -> int:
    return gf2_mod(gf2_mul(a, b), p)


def _gf2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, gf2_mod(a, b)
    return a


def _gf2_is_irreducible(p: int) -> bool:
    d = p.bit_length() - 1
    h = gf2_mod(0b10, p)
    for _ in range(d // 2):
        h = _gf2_mulmod(h, h, p)
        if _gf2_gcd(h ^ 0b10, p).bit_length() > 1:
            return False
    return True


def gf2_laurent_numerator(w: int, p: int, n: int) -> int:
    """Integer sum_i a_i 2^(n-i) for the first n Laurent digits of w/p.

    ``w`` must already be reduced mod p. The digit string a_1..a_n is the
    quotient of w * x^n by p read as a binary number.
    """
    return gf2_divmod(w << n, p)[0] & ((1 << n) - 1)
