"""Test integrands with closed-form integrals.

Every function takes points as an array of shape (N, s) and returns N values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

__all__ = [
    "Integrand",
    "g_beta",
    "f_per",
    "f_per_cyc",
    "f_per_mod",
    "f_nonper1",
    "f_nonper2",
    "f_nonper3",
    "f_nonper3_flip",
    "make_f_per",
    "make_f_per_cyc",
    "make_f_per_mod",
    "make_f_nonper1",
    "make_f_nonper2",
    "make_f_nonper3",
    "make_constant",
    "PRESETS",
    "preset",
]


@dataclass(frozen=True)
class Integrand:
    dims: int
    func: Callable[[np.ndarray], np.ndarray]
    exact_integral: float
    label: str
    smoothness: str = ""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, self.dims)
        return self.func(x)


def g_beta(beta: int, x):
    """(2 beta + 1) C(2 beta, beta) x^beta (1 - x)^beta; integrates to 1 on [0, 1]."""
    if not 1 <= beta <= 8:
        raise ValueError("beta must lie in 1..8")
    c = (2 * beta + 1) * math.comb(2 * beta, beta)
    return c * (x * (1.0 - x)) ** beta


def f_per(beta: int, omegas, x: np.ndarray) -> np.ndarray:
    om = np.asarray(omegas, dtype=float)
    if x.shape[-1] != len(om):
        raise ValueError("omega length does not match dimension")
    return np.prod(1.0 + om * (g_beta(beta, x) - 1.0), axis=-1)


def _blocks_of_five(s: int) -> int:
    if s % 5:
        raise ValueError(f"dimension {s} is not divisible by 5")
    return s // 5


def f_per_cyc(beta: int, x: np.ndarray) -> np.ndarray:
    """Mean of 5 products of g_beta over contiguous blocks of s/5 coordinates."""
    w = _blocks_of_five(x.shape[-1])
    g = g_beta(beta, x).reshape(x.shape[:-1] + (5, w))
    return g.prod(axis=-1).mean(axis=-1)


def f_per_mod(beta: int, x: np.ndarray) -> np.ndarray:
    """Mean of 5 products of g_beta over stride-5 coordinate classes."""
    w = _blocks_of_five(x.shape[-1])
    g = g_beta(beta, x).reshape(x.shape[:-1] + (w, 5))
    return g.prod(axis=-2).mean(axis=-1)


def f_nonper1(x):
    """x^3 (1/4 + log x), set to its limit 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, safe ** 3 * (0.25 + np.log(safe)), 0.0)


def f_nonper2(x):
    x = np.asarray(x, dtype=float)
    return x * np.exp(x / 4.0)


def f_nonper3(omegas, x: np.ndarray) -> np.ndarray:
    return np.exp(-(x @ np.asarray(omegas, dtype=float)))


def f_nonper3_flip(omegas, x: np.ndarray) -> np.ndarray:
    return f_nonper3(omegas, x[..., ::-1])


def _exp_factor(w: float) -> float:
    # integral of exp(-w x) over [0, 1]
    return 1.0 if w == 0 else -math.expm1(-w) / w


def make_f_per(beta: int, omegas, label: str | None = None) -> Integrand:
    om = tuple(float(v) for v in omegas)
    return Integrand(len(om), partial(f_per, beta, om), 1.0,
                     label or f"f_per(beta={beta})", f"periodic, Korobov alpha={beta}")


def make_f_per_cyc(beta: int, s: int) -> Integrand:
    _blocks_of_five(s)
    return Integrand(s, partial(f_per_cyc, beta), 1.0, f"f_per_cyc(beta={beta})",
                     f"periodic, Korobov alpha={beta}")


def make_f_per_mod(beta: int, s: int) -> Integrand:
    _blocks_of_five(s)
    return Integrand(s, partial(f_per_mod, beta), 1.0, f"f_per_mod(beta={beta})",
                     f"periodic, Korobov alpha={beta}")


def make_f_nonper1() -> Integrand:
    return Integrand(1, lambda x: f_nonper1(x[:, 0]), 0.0, "f_nonper1",
                     "third derivative in L_q, fourth not in L_1")


def make_f_nonper2() -> Integrand:
    return Integrand(1, lambda x: f_nonper2(x[:, 0]), 16.0 - 12.0 * math.exp(0.25), "f_nonper2",
                     "infinitely smooth")


def make_f_nonper3(omegas, flip: bool = False) -> Integrand:
    om = tuple(float(v) for v in omegas)
    exact = math.prod(_exp_factor(w) for w in om)
    fn = f_nonper3_flip if flip else f_nonper3
    return Integrand(len(om), partial(fn, om), exact,
                     "f_nonper3_flip" if flip else "f_nonper3", "infinitely smooth")


def make_constant(s: int, c: float = 1.0) -> Integrand:
    return Integrand(s, lambda x: np.full(x.shape[0], c), c, f"constant({c})", "constant")


def _dec(s, p):
    return [j ** -p for j in range(1, s + 1)]


def _inc(s, p):
    return [(s - j + 1) ** -p for j in range(1, s + 1)]


def _np3_omegas(s):
    return [1.0 / (4.0 * j ** 4) for j in range(1, s + 1)]


# name -> (default dimension, factory taking s)
PRESETS: dict[str, tuple[int, Callable[[int], Integrand]]] = {
    "per-b2-dec": (50, lambda s: make_f_per(2, _dec(s, 3), "per-b2-dec")),
    "per-b2-inc": (50, lambda s: make_f_per(2, _inc(s, 3), "per-b2-inc")),
    "per-b5-dec": (50, lambda s: make_f_per(5, _dec(s, 6), "per-b5-dec")),
    "per-b5-inc": (50, lambda s: make_f_per(5, _inc(s, 6), "per-b5-inc")),
    "per-cyc-b5": (20, lambda s: make_f_per_cyc(5, s)),
    "per-mod-b5": (20, lambda s: make_f_per_mod(5, s)),
    "np1": (1, lambda s: make_f_nonper1()),
    "np2": (1, lambda s: make_f_nonper2()),
    "np3": (10, lambda s: make_f_nonper3(_np3_omegas(s))),
    "np3-flip": (10, lambda s: make_f_nonper3(_np3_omegas(s), flip=True)),
    "const": (1, lambda s: make_constant(s)),
}

_FIXED_DIM = {"np1", "np2"}


def preset(name: str, s: int | None = None) -> Integrand:
    try:
        default_s, factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    if s is None:
        s = default_s
    if name in _FIXED_DIM and s != 1:
        raise ValueError(f"preset {name} is one-dimensional")
    return factory(s)
