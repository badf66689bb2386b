"""Unrandomised Sobol' points and digit interlacing.

Direction numbers are read from the Joe-Kuo text format (header line, then
``d s a m_1 ... m_s`` per dimension). The bundled table holds dimensions
1..128 of ``new-joe-kuo-6.21201``.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import TextIO

import numpy as np

__all__ = [
    "DirectionTable",
    "DigitalPointSet",
    "load_direction_numbers",
    "default_table",
    "sobol_points",
    "interlace",
    "BITS",
    "MAX_PRECISION",
]

BITS = 32
MAX_PRECISION = 52


@dataclass(frozen=True)
class DirectionTable:
    degrees: tuple[int, ...]  # per dimension; 0 for dimension 1
    polys: tuple[int, ...]  # the Joe-Kuo code a (interior coefficients)
    initial: tuple[tuple[int, ...], ...]
    directions: np.ndarray  # (dims, BITS) uint64, V[j, i] = m_{j,i+1} << (BITS - i - 1)

    @property
    def dims(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True)
class DigitalPointSet:
    m: int
    dims: int
    numerators: np.ndarray  # (2^m, dims) uint64, coordinate = numerator / 2^precision
    precision: int

    def as_floats(self) -> np.ndarray:
        return self.numerators.astype(np.float64) * 2.0 ** -self.precision


def _expand(s: int, a: int, ms: list[int]) -> list[int]:
    V = [ms[i] << (BITS - 1 - i) for i in range(s)]
    for i in range(s, BITS):
        v = V[i - s] ^ (V[i - s] >> s)
        for k in range(1, s):
            if (a >> (s - 1 - k)) & 1:
                v ^= V[i - k]
        V.append(v)
    return V


def load_direction_numbers(source: TextIO) -> DirectionTable:
    lines = [ln for ln in source.read().splitlines() if ln.strip()]
    degrees, polys, initial = [0], [0], [()]
    V = [[1 << (BITS - 1 - i) for i in range(BITS)]]
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            vals = [int(v) for v in line.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field in {line!r}") from None
        if len(vals) < 4:
            raise ValueError(f"line {lineno}: expected 'd s a m_1 ... m_s'")
        d, s, a, ms = vals[0], vals[1], vals[2], vals[3:]
        if d != len(degrees) + 1:
            raise ValueError(f"line {lineno}: dimension {d} out of sequence (expected {len(degrees) + 1})")
        if s < 1 or len(ms) != s:
            raise ValueError(f"line {lineno}: degree {s} but {len(ms)} initial numbers")
        if not 0 <= a < 1 << max(s - 1, 0):
            raise ValueError(f"line {lineno}: polynomial code {a} out of range for degree {s}")
        for i, mi in enumerate(ms, start=1):
            if mi % 2 == 0 or not 0 < mi < 1 << i:
                raise ValueError(f"line {lineno}: m_{i} = {mi} must be odd and below 2^{i}")
        degrees.append(s)
        polys.append(a)
        initial.append(tuple(ms))
        V.append(_expand(s, a, ms))
    return DirectionTable(tuple(degrees), tuple(polys), tuple(initial), np.array(V, dtype=np.uint64))


_DEFAULT: DirectionTable | None = None


def default_table() -> DirectionTable:
    global _DEFAULT
    if _DEFAULT is None:
        ref = resources.files("medianqmc") / "data" / "new-joe-kuo-6.128.txt"
        with ref.open("r") as fh:
            _DEFAULT = load_direction_numbers(fh)
    return _DEFAULT


def sobol_points(m: int, dims: int, table: DirectionTable | None = None) -> DigitalPointSet:
    """First 2^m Sobol' points in plain binary index order, 32 digits each."""
    table = default_table() if table is None else table
    if dims > table.dims:
        raise ValueError(f"direction table supports {table.dims} dimensions, {dims} requested")
    if not 0 <= m <= BITS:
        raise ValueError(f"m must lie in 0..{BITS}")
    V = table.directions[:dims]
    X = np.zeros((1 << m, dims), dtype=np.uint64)
    for i in range(m):
        half = 1 << i
        X[half : 2 * half] = X[:half] ^ V[:, i]
    return DigitalPointSet(m, dims, X, BITS)


def interlace(points: DigitalPointSet, d: int) -> DigitalPointSet:
    """Interlace groups of d coordinates digit by digit.

    Output coordinate j takes digit a of input coordinate (j-1)d + l as its
    digit (a-1)d + l, for a = 1..m and l = 1..d. Output precision is d*m,
    truncated to 52 digits.
    """
    if d < 1 or points.dims % d:
        raise ValueError(f"{points.dims} dimensions are not divisible by d = {d}")
    m = points.m
    if points.precision < m:
        raise ValueError("input precision below m digits")
    s = points.dims // d
    full = d * m
    prec = min(full, MAX_PRECISION)
    top = (points.numerators >> np.uint64(points.precision - m)).astype(np.uint64)
    out = np.zeros((points.numerators.shape[0], s), dtype=np.uint64)
    for a in range(1, m + 1):
        for l in range(1, d + 1):
            pos = (a - 1) * d + l
            if pos > prec:
                continue
            bit = (top[:, l - 1 :: d] >> np.uint64(m - a)) & np.uint64(1)
            out |= bit << np.uint64(prec - pos)
    return DigitalPointSet(m, s, out, prec)
