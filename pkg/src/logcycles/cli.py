"""Command-line interface: ``logcycles <command> [flags]``.

Every command writes a table, either CSV with ``#`` header lines or a JSON
object ``{"config", "meta", "results"}``. Output depends only on the
configuration; ``--workers`` changes wall time and nothing else, so it is
left out of the recorded config.

Exit codes: 0 success, 2 usage error, 3 domain error, 4 numerical failure.
Errors print a single line ``logcycles: error=<kind>: <reason>`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from ._errors import DomainError, LogCyclesError, NumericalError, UsageError
from .weights import WeightKind, WeightModel, constant, log_power

__all__ = ["RunConfig", "main", "run", "build_parser", "parse_grid", "COMMANDS"]

COMMANDS = ("hn", "saddle", "compare", "dist", "tvd", "sample", "shape", "k0n", "l1")
DIST_KINDS = ("l1", "k0n", "types", "joint")
TYPES_MAX_N = 40
SIG_DIGITS = 12


@dataclass
class RunConfig:
    command: str
    k: int = 1
    lower_coeffs: list = field(default_factory=list)
    constant: float | None = None
    n: int | None = None
    n_list: list = field(default_factory=list)
    b: int = 3
    v: float = 1.0
    samples: int = 1000
    seed: int = 0
    grid: str = "0.5,1,2"
    what: str = "l1"
    format: str = "csv"
    out: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def model(self) -> WeightModel:
        if self.constant is not None:
            return constant(self.constant)
        return log_power(self.k, self.lower_coeffs)

    def sizes(self) -> list[int]:
        if self.n_list:
            return list(self.n_list)
        if self.n is None:
            raise UsageError("--n or --n-list is required")
        return [self.n]

    def single_n(self) -> int:
        if self.n is None:
            raise UsageError("--n is required")
        return self.n


# --- number formatting ----------------------------------------------------------


def fmt(x) -> str:
    """Text form used in CSV; floats get 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return fmt(x)
        return float(fmt(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


# --- grid ----------------------------------------------------------------------------


def parse_grid(text: str) -> np.ndarray:
    """``"a,b,c"`` lists points; ``"lo:hi:count"`` is an evenly spaced grid."""
    try:
        if ":" in text:
            lo, hi, cnt = text.split(":")
            xs = np.linspace(float(lo), float(hi), int(cnt))
        else:
            xs = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    if xs.size == 0 or np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise UsageError(f"grid {text!r} must be positive and strictly increasing")
    return xs


# --- commands ---------------------------------------------------------------------------


def _need_log_power(cfg: RunConfig, model: WeightModel):
    if model.kind is not WeightKind.LOG_POWER:
        raise DomainError(f"'{cfg.command}' needs log-power weights (drop --constant)")


def _cmd_hn(cfg, model, workers, meta):
    from .exact import log_h_sequence

    sizes = cfg.sizes()
    h = log_h_sequence(model, max(sizes))
    ns = range(max(sizes) + 1) if cfg.n_list == [] else sizes
    rows = []
    for n in ns:
        s, la = int(h.signs[n]), float(h.logabs[n])
        val = s * math.exp(la) if la < 700 else None
        rows.append({"n": n, "h_exact": val, "h_sign": s, "h_logabs": la})
    return rows


def _cmd_saddle(cfg, model, workers, meta):
    from .asympt import saddle_initial_guess, singular_polynomial, solve_saddle

    _need_log_power(cfg, model)
    P = singular_polynomial(model)
    meta["c"] = list(P.c)
    rows = []
    for n in cfg.sizes():
        sp = solve_saddle(P, n, cfg.v)
        rows.append({
            "n": n, "v": cfg.v, "r": sp.r, "r_initial": saddle_initial_guess(model.k, n, cfg.v),
            "relative_residual": sp.relative_residual, "P_r": sp.P_r, "dP_r": sp.dP_r, "ddP_r": sp.ddP_r,
        })
    if len(rows) == 1:
        meta["r"] = rows[0]["r"]
    return rows


def _cmd_compare(cfg, model, workers, meta):
    from .asympt import hn_asymptotic, singular_polynomial, solve_saddle
    from .exact import log_h_sequence

    _need_log_power(cfg, model)
    P = singular_polynomial(model)
    meta["c"] = list(P.c)
    sizes = cfg.sizes()
    h = log_h_sequence(model, max(sizes))
    rows = []
    for n in sizes:
        ex = float(h.logabs[n])
        asym = hn_asymptotic(P, n, 1.0).logabs
        rows.append({
            "n": n, "r": solve_saddle(P, n, 1.0).r, "h_exact_log": ex, "h_asym_log": asym,
            "ratio": math.exp(asym - ex),
        })
    return rows


def _cmd_dist(cfg, model, workers, meta):
    from .exact import cycle_type_prob, enumerate_cycle_types, joint_counts_distribution, k0n_distribution, l1_distribution

    n = cfg.single_n()
    if cfg.what == "l1":
        t = l1_distribution(model, n)
        return [{"m": m, "prob": p} for m, p in zip(t.support, t.probs) if p > 0]
    if cfg.what == "k0n":
        t = k0n_distribution(model, n)
        meta["deficit"] = t.deficit
        return [{"cycles": j, "prob": p} for j, p in zip(t.support, t.probs) if p > 0]
    if cfg.what == "types":
        if n > TYPES_MAX_N:
            raise UsageError(f"--what types enumerates partitions; needs n <= {TYPES_MAX_N}")
        rows = []
        for ct in sorted(enumerate_cycle_types(n)):
            p = cycle_type_prob(model, ct)
            if p > 0:
                rows.append({"cycle_type": str(ct), "prob": p})
        return rows
    t = joint_counts_distribution(model, n, cfg.b)
    meta["deficit"] = t.deficit
    order = sorted(range(len(t.support)), key=lambda i: t.support[i])
    return [{**{f"c{m + 1}": t.support[i][m] for m in range(cfg.b)}, "prob": t.probs[i]} for i in order]


def _cmd_tvd(cfg, model, workers, meta):
    from .tvd import dtv_via_formula, threshold_c

    if model.kind is WeightKind.LOG_POWER:
        meta["threshold_c"] = threshold_c(model.k)
    return [{"n": n, "b": cfg.b, "dtv": dtv_via_formula(model, n, cfg.b)} for n in cfg.sizes()]


def _cmd_sample(cfg, model, workers, meta):
    from .sampler import make_sampler, sample_batch

    state = make_sampler(model, cfg.single_n(), seed=cfg.seed)
    types = sorted(sample_batch(state, cfg.samples, workers=workers))
    return [{"cycle_type": str(ct)} for ct in types]


def _cmd_shape(cfg, model, workers, meta):
    from .exact import log_h_sequence
    from .observables import fluctuation_reports, shape_scaling, w_infinity
    from .sampler import make_sampler, sample_lengths

    _need_log_power(cfg, model)
    n = cfg.single_n()
    xs = parse_grid(cfg.grid)
    sc = shape_scaling(model, n)
    meta.update({"r": sc.r, "n_star": sc.n_star, "n_bar": sc.n_bar})
    if model.k < 3:
        meta["regime"] = "conjectured (k < 3)"
    h = log_h_sequence(model, n)
    samples = sample_lengths(make_sampler(model, n, seed=cfg.seed, h=h), cfg.samples, workers=workers)
    rows = []
    for rep in fluctuation_reports(samples, xs, sc, model=model, h=h):
        rows.append({
            "x": rep.x, "mean_rescaled": rep.mean_shift + w_infinity(rep.x), "w_infinity": w_infinity(rep.x),
            "mean_shift": rep.mean_shift, "z_n_allowance": rep.z_n_allowance,
            "variance_emp": rep.variance_emp, "variance_exact": rep.variance_exact,
            "variance_theory": rep.variance_theory, "variance_conditioned": rep.variance_conditioned,
        })
    return rows


def _cmd_k0n(cfg, model, workers, meta):
    from .observables import k0n_clt_check

    rep = k0n_clt_check(model, cfg.single_n(), cfg.samples, seed=cfg.seed, workers=workers)
    return [asdict(rep)]


def _cmd_l1(cfg, model, workers, meta):
    from .observables import l1_scaling_check

    _need_log_power(cfg, model)
    rep = l1_scaling_check(model, cfg.single_n(), cfg.samples, seed=cfg.seed, workers=workers)
    meta["r"] = rep.r
    return [asdict(rep)]


_HANDLERS = {
    "hn": _cmd_hn, "saddle": _cmd_saddle, "compare": _cmd_compare, "dist": _cmd_dist, "tvd": _cmd_tvd,
    "sample": _cmd_sample, "shape": _cmd_shape, "k0n": _cmd_k0n, "l1": _cmd_l1,
}


# --- rendering --------------------------------------------------------------------------


def _meta_json(v):
    if isinstance(v, list):
        return [_json_value(x) for x in v]
    return v if isinstance(v, dict) else _json_value(v)


def render(cfg: RunConfig, meta: dict, rows: list[dict]) -> str:
    if cfg.format == "json":
        doc = {
            "config": cfg.to_dict(),
            "meta": {k: _meta_json(v) for k, v in meta.items()},
            "results": [{k: _json_value(v) for k, v in row.items()} for row in rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# logcycles {__version__}\n")
    buf.write(f"# config: {cfg.to_json()}\n")
    for key, val in meta.items():
        if isinstance(val, dict):
            text = json.dumps(val, sort_keys=True, separators=(",", ":"))
        elif isinstance(val, list):
            text = " ".join(fmt(x) for x in val)
        else:
            text = fmt(val)
        buf.write(f"# {key}: {text}\n")
    if cfg.command == "sample":
        for row in rows:
            buf.write(row["cycle_type"] + "\n")
        return buf.getvalue()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([fmt(v) for v in row.values()])
    return buf.getvalue()


def run(cfg: RunConfig, workers: int = 1) -> str:
    """Execute one command and return the rendered output."""
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    if cfg.format not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if cfg.what not in DIST_KINDS:
        raise UsageError(f"--what must be one of {', '.join(DIST_KINDS)}")
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    if cfg.samples < 0:
        raise UsageError("--samples must be >= 0")
    for n in ([cfg.n] if cfg.n is not None else []) + list(cfg.n_list):
        if n < 1:
            raise UsageError("sizes must be >= 1")
    model = cfg.model()
    meta: dict = {"model": model.describe()}
    rows = _HANDLERS[cfg.command](cfg, model, workers, meta)
    return render(cfg, meta, rows)


# --- argument parsing --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--k", type=int, default=1, help="power of log m in theta_m (default 1)")
    common.add_argument("--lower-coeffs", type=_float_list, default=[], help="a_0,a_1,... of the lower log powers")
    common.add_argument("--constant", type=float, default=None, help="use constant weights theta_m = VALUE instead")
    common.add_argument("--n", type=int, default=None, help="permutation size")
    common.add_argument("--n-list", type=_int_list, default=[], help="comma-separated sizes")
    common.add_argument("--b", type=int, default=3, help="number of small cycle counts (tvd, dist --what joint)")
    common.add_argument("--v", type=float, default=1.0, help="saddle parameter v (default 1)")
    common.add_argument("--samples", type=int, default=1000, help="Monte Carlo sample count")
    common.add_argument("--seed", type=int, default=0, help="64-bit seed")
    common.add_argument("--grid", default="0.5,1,2", help="x grid: 'a,b,c' or 'lo:hi:count'")
    common.add_argument("--what", default="l1", choices=DIST_KINDS, help="law printed by 'dist'")
    common.add_argument("--format", default="csv", choices=("csv", "json"))
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--workers", type=int, default=1, help="threads for sampling; never changes output")

    parser = _Parser(prog="logcycles", description="Random permutations with logarithmic cycle weights.")
    parser.add_argument("--version", action="version", version=f"logcycles {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "hn": "normalization constants h_n",
        "saddle": "solve v P'(r) = n e^{-r}",
        "compare": "exact vs saddle-point h_n",
        "dist": "exact laws (L_1, K_0n, cycle types, small counts)",
        "tvd": "total variation distance to independent Poissons",
        "sample": "exact samples of cycle types",
        "shape": "rescaled Young-diagram profile statistics",
        "k0n": "CLT check for the number of cycles",
        "l1": "L_1 r^k / n against Exp(1)",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(args: argparse.Namespace) -> tuple[RunConfig, int]:
    d = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    return RunConfig(**d), args.workers


_EXIT = ((UsageError, 2, "usage"), (DomainError, 3, "domain"), (NumericalError, 4, "numerical"))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg, workers = config_from_args(args)
        text = run(cfg, workers)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except LogCyclesError as exc:
        for cls, code, kind in _EXIT:
            if isinstance(exc, cls):
                break
        else:
            code, kind = 4, "numerical"
        reason = " ".join(str(exc).split())
        print(f"logcycles: error={kind}: {reason}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"logcycles: error=usage: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
