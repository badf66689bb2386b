"""Worst-case error machinery for rank-1 lattice rules in weighted Korobov spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .lattice import LatticeRule
from .numtheory import bernoulli_poly, binomial, euler_totient, riemann_zeta

__all__ = [
    "ProductWeights",
    "KorobovParams",
    "r_decay",
    "kernel_table",
    "wce_closed_form",
    "wce_closed_form_batch",
    "OracleResult",
    "wce_spectral_oracle",
    "korobov_bound_at",
    "error_bound_korobov",
    "median_failure_probability",
    "minimize_over_lambda",
]

RADICAND_TOL = 1e-10


@dataclass(frozen=True)
class ProductWeights:
    """Coordinate weights gamma_j; the weight of a subset u is the product over u."""

    gammas: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in self.gammas)
        if not g:
            raise ValueError("need at least one weight")
        if any(not (v > 0 and math.isfinite(v)) for v in g):
            raise ValueError("weights must be positive and finite")
        object.__setattr__(self, "gammas", g)

    @property
    def s(self) -> int:
        return len(self.gammas)

    @classmethod
    def decreasing(cls, s: int, power: float) -> "ProductWeights":
        """gamma_j = j^-power."""
        return cls(tuple(j ** -power for j in range(1, s + 1)))

    @classmethod
    def increasing(cls, s: int, power: float) -> "ProductWeights":
        """gamma_j = (s - j + 1)^-power."""
        return cls(tuple((s - j + 1) ** -power for j in range(1, s + 1)))

    @classmethod
    def constant(cls, s: int, value: float = 1.0) -> "ProductWeights":
        return cls((value,) * s)

    @classmethod
    def parse(cls, text: str, s: int) -> "ProductWeights":
        """``ones``, ``dec:<p>`` (j^-p), ``inc:<p>`` ((s-j+1)^-p) or a comma list."""
        text = text.strip()
        if text == "ones":
            return cls.constant(s)
        if text.startswith("dec:"):
            return cls.decreasing(s, float(text[4:]))
        if text.startswith("inc:"):
            return cls.increasing(s, float(text[4:]))
        vals = tuple(float(v) for v in text.split(","))
        if len(vals) != s:
            raise ValueError(f"weight list has {len(vals)} entries, expected {s}")
        return cls(vals)

    def subset_weight(self, u: Sequence[int]) -> float:
        return math.prod(self.gammas[j] for j in u)


@dataclass(frozen=True)
class KorobovParams:
    alpha: float
    weights: ProductWeights

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise ValueError("Korobov smoothness needs alpha > 1/2")


def r_decay(params: KorobovParams, k: Sequence[int]) -> float:
    """gamma_u prod_{j in u} |k_j|^-alpha over the support u of k; 1 for k = 0."""
    if len(k) > params.weights.s:
        raise ValueError("frequency vector longer than the weight vector")
    out = 1.0
    for j, kj in enumerate(k):
        if kj:
            out *= params.weights.gammas[j] * abs(kj) ** -params.alpha
    return out


def _integer_alpha(alpha) -> int:
    a = int(alpha)
    if a != alpha or not 1 <= a <= 6:
        raise ValueError("closed form needs integer alpha in 1..6")
    return a


def kernel_table(N: int, alpha) -> np.ndarray:
    """omega(k/N) for k = 0..N-1, where omega(x) = sum_{h != 0} e^{2 pi i h x} |h|^{-2 alpha}.

    Evaluated through the Bernoulli polynomial of degree 2 alpha and mirrored
    so that entries k and N - k are bit-identical.
    """
    a = _integer_alpha(alpha)
    scale = (-1) ** (a + 1) * (2 * math.pi) ** (2 * a) / math.factorial(2 * a)
    half = np.arange(N // 2 + 1)
    vals = scale * bernoulli_poly(2 * a, half / N)
    table = np.empty(N)
    table[: len(half)] = vals
    table[len(half) :] = vals[1 : N - len(half) + 1][::-1]
    return table


def _finish(radicand: float) -> float:
    if radicand < 0:
        if radicand < -RADICAND_TOL:
            raise ArithmeticError(f"squared worst-case error {radicand} is negative beyond rounding")
        return 0.0
    return math.sqrt(radicand)


def wce_closed_form_batch(N: int, Z: np.ndarray, params: KorobovParams, table: np.ndarray | None = None) -> np.ndarray:
    """Closed-form worst-case error for every row of the (count, s) vector array ``Z``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=np.int64))
    s = Z.shape[1]
    if params.weights.s != s:
        raise ValueError(f"{params.weights.s} weights for {s} dimensions")
    if table is None:
        table = kernel_table(N, params.alpha)
    g2 = np.asarray(params.weights.gammas, dtype=float) ** 2
    n = np.arange(N, dtype=np.int64)
    prod = np.ones((Z.shape[0], N))
    for j in range(s):
        prod *= 1.0 + g2[j] * table[(Z[:, j, None] * n[None, :]) % N]
    prod -= 1.0
    out = np.empty(Z.shape[0])
    for i, row in enumerate(prod):
        out[i] = _finish(math.fsum(row) / N)
    return out


def wce_closed_form(rule: LatticeRule, params: KorobovParams) -> float:
    """Worst-case error of the lattice rule for product weights and integer alpha."""
    return float(wce_closed_form_batch(rule.N, np.asarray([rule.z]), params)[0])


class OracleResult(NamedTuple):
    value: float
    tail: float  # the untruncated error lies in [value, value + tail]


def wce_spectral_oracle(rule: LatticeRule, params: KorobovParams, K: int) -> OracleResult:
    """Worst-case error from the dual-lattice sum truncated to |k_j| <= K.

    Each coordinate's decay weights are folded into residue classes mod N,
    then the classes are combined by cyclic convolution over Z_N, which is
    exactly the truncated sum over {k : k.z = 0 mod N}. The tail bound adds,
    by a union bound over coordinates, every frequency with some |k_j| > K.
    """
    N, s = rule.N, rule.s
    if params.weights.s != s:
        raise ValueError("weights and rule dimension differ")
    a2 = 2.0 * params.alpha
    ks = np.arange(-K, K + 1, dtype=np.int64)
    absk = np.abs(ks).astype(float)
    with np.errstate(divide="ignore"):
        base = np.where(ks == 0, 0.0, absk ** -a2)
    conv = None
    for j, (zj, gam) in enumerate(zip(rule.z, params.weights.gammas)):
        w = gam ** 2 * base
        w[K] = 1.0
        classes = np.bincount(ks % N, weights=w, minlength=N)
        v = np.zeros(N)
        v[(np.arange(N) * zj) % N] = classes
        if conv is None:
            conv = v
        else:
            idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
            conv = (conv[None, :] * v[idx]).sum(axis=1)
    s2 = max(conv[0] - 1.0, 0.0)
    value = math.sqrt(s2)
    if K >= 1:
        tk = K ** (1.0 - a2) / (a2 - 1.0)
        z2 = riemann_zeta(a2)
        full = [1.0 + 2.0 * g * g * z2 for g in params.weights.gammas]
        total = math.prod(full)
        tail_sq = sum(2.0 * g * g * tk * total / f for g, f in zip(params.weights.gammas, full))
    else:
        tail_sq = math.inf
    return OracleResult(value, math.sqrt(s2 + tail_sq) - value)


def minimize_over_lambda(fn: Callable[[float], float], lo: float, hi: float,
                         grid: int = 64, tol: float = 1e-8) -> tuple[float, float]:
    """Minimise ``fn`` on [lo, hi]: coarse grid scan, then golden section around the best cell."""
    xs = np.linspace(lo, hi, grid)
    vals = [fn(float(x)) for x in xs]
    i = int(np.argmin(vals))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid - 1)])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x, fx = (c, fc) if fc < fd else (d, fd)
    if vals[i] < fx:
        return float(xs[i]), vals[i]
    return x, fx


def _log_korobov_bound(lam: float, N: int, params: KorobovParams, eta: float) -> float:
    z = 2.0 * riemann_zeta(2.0 * params.alpha * lam)
    # prod_j (1 + gamma_j^{2 lam} 2 zeta) - 1, computed without cancellation
    log_prod = math.fsum(math.log1p(g ** (2.0 * lam) * z) for g in params.weights.gammas)
    inner = math.expm1(log_prod)
    return (math.log(inner) - math.log(eta * euler_totient(N))) / (2.0 * lam)


def korobov_bound_at(lam: float, N: int, params: KorobovParams, eta: float) -> float:
    """The bound before the infimum, evaluated at a single lambda in (1/(2 alpha), 1]."""
    if not 1.0 / (2.0 * params.alpha) < lam <= 1.0:
        raise ValueError("lambda must lie in (1/(2 alpha), 1]")
    return math.exp(_log_korobov_bound(lam, N, params, eta))


def error_bound_korobov(N: int, s: int, params: KorobovParams, eta: float) -> float:
    """Probabilistic worst-case error bound of the median lattice rule (product weights).

    Holds with probability at least 1 - median_failure_probability(r, eta).
    """
    if params.weights.s != s:
        raise ValueError("weights and dimension differ")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    lo = 1.0 / (2.0 * params.alpha) + 1e-4
    hi = 1.0 - 1e-4
    _, logb = minimize_over_lambda(lambda lam: _log_korobov_bound(lam, N, params, eta), lo, hi)
    return math.exp(logb)


def median_failure_probability(r: int, eta: float) -> float:
    """binomial(r, (r+1)/2) eta^((r+1)/2), clamped to [0, 1]."""
    if r < 1 or r % 2 == 0:
        raise ValueError("r must be a positive odd integer")
    h = (r + 1) // 2
    return min(1.0, max(0.0, binomial(r, h) * eta ** h))
