"""Experiment harness: every subcommand writes a small versioned CSV.

Layout of every output::

    # median-qmc v1
    col_a,col_b,...
    <rows>
    # key,value          (summary lines, e.g. quantiles or fitted slopes)

Floats are written with 17 significant digits so a file round-trips to the
same binary64 values. Output goes to ``--out`` through a temporary file and an
atomic rename, or to stdout when ``--out`` is omitted.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._parallel import derive_seed, pmap, spawn_rng
from .gfpoly import parse_poly
from .korobov import (
    KorobovParams,
    ProductWeights,
    error_bound_korobov,
    kernel_table,
    wce_closed_form,
    wce_closed_form_batch,
)
from .lattice import cbc_construct, lattice_blocks, parse_lattice_rule, sample_generating_vectors
from .median import MedianConfig, median_hopl_estimate, median_lattice_estimate, median_of, p_plus, qmc_estimate
from .numtheory import prev_prime
from .polylattice import error_bound_sobolev
from .sobol import DirectionTable, default_table, interlace, load_direction_numbers, sobol_points
from .testfns import PRESETS, preset

__all__ = [
    "SCHEMA_VERSION",
    "Table",
    "format_value",
    "render",
    "write_output",
    "fit_slope",
    "default_lattice_grid",
    "cmd_hist_wce",
    "cmd_converge_lattice",
    "cmd_converge_hopl",
    "cmd_prob",
    "cmd_cbc",
    "cmd_wce",
    "cmd_bound",
    "build_parser",
    "main",
]

SCHEMA_VERSION = 1
HIST_CHUNK = 256
REPLICATES = 5
DEFAULT_MODULUS = "x^52+x^3+1"


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    summary: list[tuple[str, object]] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def summary_value(self, key: str):
        for k, v in self.summary:
            if k == key:
                return v
        raise KeyError(key)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    text = str(v)
    if any(c in text for c in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def render(table: Table) -> str:
    lines = [f"# median-qmc v{SCHEMA_VERSION}", ",".join(table.columns)]
    lines += [",".join(format_value(v) for v in row) for row in table.rows]
    lines += [f"# {key},{format_value(value)}" for key, value in table.summary]
    return "\n".join(lines) + "\n"


def write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".medianqmc-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log2(y) against log2(x); nan if any y is not positive."""
    if len(xs) < 2 or any(not (y > 0) for y in ys):
        return math.nan
    return float(np.polyfit(np.log2(np.asarray(xs, dtype=float)), np.log2(np.asarray(ys, dtype=float)), 1)[0])


def default_lattice_grid(k_lo: int = 7, k_hi: int = 13) -> list[int]:
    """Largest prime not exceeding 2^k for each k."""
    return [prev_prime(2 ** k) for k in range(k_lo, k_hi + 1)]


# -- histogram of worst-case errors ------------------------------------------

def _hist_chunk(N, s, params, table, r, seed, pass_id, chunk, count):
    rng = spawn_rng(seed, pass_id, chunk)
    Z = sample_generating_vectors(N, s, count * r, rng)
    wce = wce_closed_form_batch(N, Z, params, table)
    if r == 1:
        return wce
    return np.array([median_of(row) for row in wce.reshape(count, r)])


def _quantile_summary(prefix: str, logs: np.ndarray) -> list[tuple[str, float]]:
    return [
        (f"{prefix}q75", float(np.quantile(logs, 0.75))),
        (f"{prefix}q90", float(np.quantile(logs, 0.9))),
        (f"{prefix}max", float(np.max(logs))),
    ]


def cmd_hist_wce(N: int, s: int, alpha: int, weights: ProductWeights, samples: int, r: int, seed: int,
                 threads: int | None = None) -> Table:
    """One row per sampled generating vector with log2 of its worst-case error.

    Pass 0 draws single vectors; with r > 1 a second pass on an independent
    stream records log2 of the median of r worst-case errors per sample.
    Chunks of ``HIST_CHUNK`` samples are seeded by (seed, pass, chunk).
    """
    if N < 2:
        raise ValueError("hist-wce needs N >= 2")
    if samples < 1:
        raise ValueError("need at least one sample")
    if r < 1 or r % 2 == 0:
        raise ValueError("r must be a positive odd integer")
    params = KorobovParams(alpha, weights)
    table = kernel_table(N, alpha)
    chunks = [(c, min(HIST_CHUNK, samples - c * HIST_CHUNK)) for c in range(-(-samples // HIST_CHUNK))]

    def run(pass_id, rr):
        parts = pmap(lambda ck: _hist_chunk(N, s, params, table, rr, seed, pass_id, ck[0], ck[1]), chunks, threads)
        return np.log2(np.concatenate(parts))

    single = run(0, 1)
    columns = ["sample", "log2_wce"]
    summary = [("N", N), ("s", s), ("alpha", alpha), ("samples", samples), ("r", r), ("seed", seed)]
    summary += _quantile_summary("log2_wce_", single)
    if r > 1:
        med = run(1, r)
        columns.append("log2_median_wce")
        rows = [(i, single[i], med[i]) for i in range(samples)]
        summary += _quantile_summary("log2_median_wce_", med)
    else:
        rows = [(i, single[i]) for i in range(samples)]
    return Table(columns, rows, summary)


# -- convergence studies -----------------------------------------------------

def _sobol_error(f, exact, N_target: int, s: int, table: DirectionTable | None) -> tuple[int, float]:
    m = max(0, int(round(math.log2(N_target))))
    pts = sobol_points(m, s, table).as_floats()
    return 1 << m, abs(qmc_estimate(f, pts) - exact)


def cmd_converge_lattice(preset_name: str, s: int | None, Ns: Sequence[int] | None, r: int, seed: int,
                         with_cbc: bool = False, with_sobol: bool = False, alpha: int = 2,
                         weights: ProductWeights | None = None, sobol_table: DirectionTable | None = None,
                         threads: int | None = None) -> Table:
    """Median lattice rule error per N; replicate k at N uses master seed derive_seed(seed, N, k)."""
    f = preset(preset_name, s)
    s = f.dims
    Ns = list(default_lattice_grid() if Ns is None else Ns)
    if not Ns:
        raise ValueError("empty N grid")
    cbc_weights = ProductWeights.decreasing(s, 3) if weights is None else weights
    if cbc_weights.s != s:
        raise ValueError("CBC weights and dimension differ")

    tasks = [(N, k) for N in Ns for k in range(REPLICATES)]

    def one(task):
        N, k = task
        cfg = MedianConfig(r=r, master_seed=derive_seed(seed, N, k))
        return abs(median_lattice_estimate(f, N, s, cfg, threads=1).estimate - f.exact_integral)

    errs = pmap(one, tasks, threads)
    by_N = {N: errs[i * REPLICATES:(i + 1) * REPLICATES] for i, N in enumerate(Ns)}

    columns = ["N", "err_single", "err_median_reps"]
    extra: dict[str, list] = {}
    if with_cbc:
        columns.append("err_cbc")

        def cbc_err(N):
            rule = cbc_construct(N, s, alpha, cbc_weights)
            return abs(qmc_estimate(f, lattice_blocks(rule)) - f.exact_integral)

        extra["cbc"] = pmap(cbc_err, Ns, threads)
    if with_sobol:
        columns += ["N_sobol", "err_sobol"]
        extra["sobol"] = pmap(lambda N: _sobol_error(f, f.exact_integral, N, s, sobol_table), Ns, threads)

    rows = []
    for i, N in enumerate(Ns):
        row = [N, by_N[N][0], float(np.median(by_N[N]))]
        if with_cbc:
            row.append(extra["cbc"][i])
        if with_sobol:
            row += list(extra["sobol"][i])
        rows.append(tuple(row))
    tab = Table(columns, rows, [("preset", preset_name), ("s", s), ("r", r), ("seed", seed),
                                ("replicates", REPLICATES)])
    tab.summary.append(("slope_single", fit_slope(Ns, tab.column("err_single"))))
    tab.summary.append(("slope_median_reps", fit_slope(Ns, tab.column("err_median_reps"))))
    if with_cbc:
        tab.summary.append(("slope_cbc", fit_slope(Ns, tab.column("err_cbc"))))
    if with_sobol:
        tab.summary.append(("slope_sobol", fit_slope(tab.column("N_sobol"), tab.column("err_sobol"))))
    return tab


def cmd_converge_hopl(preset_name: str, s: int | None, ms: Sequence[int], r: int, seed: int,
                      interlace_orders: Sequence[int] = (2, 3), n: int = 52, modulus: str = DEFAULT_MODULUS,
                      sobol_table: DirectionTable | None = None, threads: int | None = None) -> Table:
    """Median polynomial lattice rule (b = 2) and interlaced Sobol' errors per m."""
    f = preset(preset_name, s)
    s = f.dims
    ms = list(ms)
    if not ms:
        raise ValueError("empty m range")
    if any(not 1 <= m <= 20 for m in ms):
        raise ValueError("m must lie in 1..20")
    if any(m > n for m in ms):
        raise ValueError(f"m must not exceed the precision n = {n}")
    p = parse_poly(modulus, 2)
    if p.degree != n:
        raise ValueError(f"modulus {p} does not have degree n = {n}")
    table = default_table() if sobol_table is None else sobol_table
    for d in interlace_orders:
        if d < 1:
            raise ValueError("interlacing order must be positive")
        if d * s > table.dims:
            raise ValueError(f"order-{d} interlacing needs {d * s} Sobol' dimensions, table has {table.dims}")

    tasks = [(m, k) for m in ms for k in range(REPLICATES)]

    def one(task):
        m, k = task
        cfg = MedianConfig(r=r, master_seed=derive_seed(seed, m, k))
        return abs(median_hopl_estimate(f, 2, m, n, p, s, cfg, threads=1).estimate - f.exact_integral)

    errs = pmap(one, tasks, threads)

    def sobol_errs(m):
        out = []
        for d in interlace_orders:
            pts = interlace(sobol_points(m, d * s, table), d).as_floats()
            out.append(abs(qmc_estimate(f, pts) - f.exact_integral))
        return out

    sob = pmap(sobol_errs, ms, threads)
    columns = ["m", "N", "err_single", "err_median_reps"] + [f"err_sobol_d{d}" for d in interlace_orders]
    rows = []
    for i, m in enumerate(ms):
        reps = errs[i * REPLICATES:(i + 1) * REPLICATES]
        rows.append(tuple([m, 1 << m, reps[0], float(np.median(reps))] + sob[i]))
    tab = Table(columns, rows, [("preset", preset_name), ("s", s), ("r", r), ("seed", seed), ("n", n),
                                ("modulus", str(p)), ("replicates", REPLICATES)])
    Ns = tab.column("N")
    for name in columns[2:]:
        tab.summary.append((name.replace("err_", "slope_"), fit_slope(Ns, tab.column(name))))
    return tab


# -- small computations ------------------------------------------------------

def cmd_prob(rs: Sequence[int], qs: Sequence[float]) -> Table:
    rs = list(rs)
    if any(r < 1 or r % 2 == 0 for r in rs):
        raise ValueError("r values must be positive and odd")
    rows = []
    for q in qs:
        for r in rs:
            pp = p_plus(r, q)
            rows.append((r, q, pp, math.log10(pp)))
    tab = Table(["r", "q", "p_plus", "log10_p_plus"], rows)
    if len(rs) >= 2:
        for q in qs:
            ys = [math.log10(p_plus(r, q)) for r in rs]
            tab.summary.append((f"log10_slope_q{q:g}", float(np.polyfit(rs, ys, 1)[0])))
    return tab


def cmd_cbc(N: int, s: int, alpha: int, weights: ProductWeights) -> Table:
    rule = cbc_construct(N, s, alpha, weights)
    return Table(["N", "s", "alpha", "rule", "wce"],
                 [(N, s, alpha, str(rule), wce_closed_form(rule, KorobovParams(alpha, weights)))])


def cmd_wce(rule_text: str, alpha, weights_text: str) -> Table:
    rule = parse_lattice_rule(rule_text)
    weights = ProductWeights.parse(weights_text, rule.s)
    return Table(["rule", "alpha", "wce"], [(str(rule), alpha, wce_closed_form(rule, KorobovParams(alpha, weights)))])


def cmd_bound(kind: str, *, alpha, weights_text: str, s: int, eta: float, Ns: Sequence[int] = (),
              ms: Sequence[int] = (), n: int = 52, b: int = 2) -> Table:
    weights = ProductWeights.parse(weights_text, s)
    if kind == "korobov":
        params = KorobovParams(alpha, weights)
        rows = [(N, eta, error_bound_korobov(N, s, params, eta)) for N in Ns]
        return Table(["N", "eta", "bound"], rows, [("s", s), ("alpha", alpha)])
    if kind == "sobolev":
        rows = [(m, b ** m, eta, error_bound_sobolev(m, n, s, int(alpha), weights, eta, b)) for m in ms]
        tab = Table(["m", "N", "eta", "bound"], rows, [("s", s), ("alpha", alpha), ("n", n), ("b", b)])
        if len(rows) >= 2:
            tab.summary.append(("slope", fit_slope(tab.column("N"), tab.column("bound"))))
        return tab
    raise ValueError(f"unknown bound kind {kind!r}")


# -- argument parsing --------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_range(text: str) -> list[int]:
    """``a:b`` (inclusive), ``a:b:step`` or a comma list."""
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        if len(parts) == 2:
            return list(range(parts[0], parts[1] + 1))
        if len(parts) == 3:
            return list(range(parts[0], parts[1] + 1, parts[2]))
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return _int_list(text)


def _alpha(text: str):
    v = float(text)
    return int(v) if v.is_integer() else v


def _load_table(path: str | None) -> DirectionTable | None:
    if path is None:
        return None
    with open(path) as fh:
        return load_direction_numbers(fh)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="medianqmc", description="Median QMC experiments (CSV output).")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", default=None, help="output file (atomic write); stdout if omitted")
        if seed:
            p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")

    p = sub.add_parser("hist-wce", help="worst-case errors of random generating vectors")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, default=50)
    p.add_argument("--alpha", type=_alpha, default=2)
    p.add_argument("--weights", default="dec:3", help="ones | dec:p | inc:p | comma list")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--r", type=int, default=1)
    common(p)

    p = sub.add_parser("converge-lattice", help="median lattice rule convergence on a preset")
    p.add_argument("--preset", default="per-b2-dec", choices=sorted(PRESETS))
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--n", type=_int_list, default=None, help="comma list of N (default: primes <= 2^7..2^13)")
    p.add_argument("--r", type=int, default=11)
    p.add_argument("--with-cbc", action="store_true")
    p.add_argument("--with-sobol", action="store_true")
    p.add_argument("--alpha", type=int, default=2, help="smoothness used by the CBC baseline")
    p.add_argument("--weights", default="dec:3", help="weights used by the CBC baseline")
    p.add_argument("--sobol-table", default=None)
    common(p)

    p = sub.add_parser("converge-hopl", help="median polynomial lattice rule convergence on a preset")
    p.add_argument("--preset", default="np1", choices=sorted(PRESETS))
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--m-range", type=_int_range, default=list(range(6, 15)))
    p.add_argument("--r", type=int, default=11)
    p.add_argument("--interlace", type=_int_list, default=[2, 3])
    p.add_argument("--precision", type=int, default=52)
    p.add_argument("--modulus", default=DEFAULT_MODULUS)
    p.add_argument("--sobol-table", default=None)
    common(p)

    p = sub.add_parser("prob", help="probability that the median exceeds a quantile")
    p.add_argument("--r", type=_int_range, default=list(range(1, 50, 2)), help="odd r values, e.g. 1:49:2")
    p.add_argument("--q", type=_float_list, default=[0.5, 0.75, 0.9])
    common(p, seed=False)

    p = sub.add_parser("cbc", help="component-by-component lattice rule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--weights", default="dec:3")
    common(p, seed=False)

    p = sub.add_parser("wce", help="worst-case error of a given lattice rule")
    p.add_argument("--rule", required=True, help="N;z_1,...,z_s")
    p.add_argument("--alpha", type=_alpha, default=2)
    p.add_argument("--weights", default="ones")
    common(p, seed=False)

    p = sub.add_parser("bound", help="probabilistic error bound of the median rule")
    p.add_argument("kind", choices=["korobov", "sobolev"])
    p.add_argument("--n", type=_int_list, default=None, help="korobov: comma list of N")
    p.add_argument("--m-range", type=_int_range, default=None, help="sobolev: m values")
    p.add_argument("--precision", type=int, default=52, help="sobolev: digit precision n")
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--alpha", type=_alpha, default=2)
    p.add_argument("--weights", default="dec:3")
    p.add_argument("--eta", type=float, default=0.25)
    common(p, seed=False)
    return ap


def _dispatch(args) -> Table:
    c = args.command
    if c == "hist-wce":
        weights = ProductWeights.parse(args.weights, args.s)
        return cmd_hist_wce(args.n, args.s, args.alpha, weights, args.samples, args.r, args.seed)
    if c == "converge-lattice":
        s = args.s if args.s is not None else PRESETS[args.preset][0]
        return cmd_converge_lattice(args.preset, s, args.n, args.r, args.seed, args.with_cbc, args.with_sobol,
                                    args.alpha, ProductWeights.parse(args.weights, s),
                                    _load_table(args.sobol_table))
    if c == "converge-hopl":
        return cmd_converge_hopl(args.preset, args.s, args.m_range, args.r, args.seed, args.interlace,
                                 args.precision, args.modulus, _load_table(args.sobol_table))
    if c == "prob":
        return cmd_prob(args.r, args.q)
    if c == "cbc":
        return cmd_cbc(args.n, args.s, args.alpha, ProductWeights.parse(args.weights, args.s))
    if c == "wce":
        return cmd_wce(args.rule, args.alpha, args.weights)
    if c == "bound":
        if args.kind == "korobov" and not args.n:
            raise ValueError("bound korobov needs --n")
        if args.kind == "sobolev" and not args.m_range:
            raise ValueError("bound sobolev needs --m-range")
        return cmd_bound(args.kind, alpha=args.alpha, weights_text=args.weights, s=args.s, eta=args.eta,
                         Ns=args.n or (), ms=args.m_range or (), n=args.precision, b=args.base)
    raise ValueError(f"unknown command {c!r}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        write_output(render(_dispatch(args)), args.out)
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"medianqmc: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
