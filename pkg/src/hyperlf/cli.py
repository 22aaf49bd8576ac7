"""Command-line experiment runner.

    python -m hyperlf <command> [options]

Commands: ensemble, lfunction, verify, moments, lowerbound, residue.
Exit codes: 0 success, 1 usage error, 2 a checked inequality or identity failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

FLOAT_FMT = ".17g"


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


# --- config text format ------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Resolved experiment settings; round-trips through `key = value` text."""

    experiment: str
    options: dict[str, Any] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"experiment = {self.experiment}"]
        for k in sorted(self.options):
            v = self.options[k]
            if v is None:
                continue
            lines.append(f"{k} = {_encode_value(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        opts: dict[str, Any] = {}
        experiment = None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw!r}")
            key, val = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key == "experiment":
                experiment = val
            else:
                opts[key] = _decode_value(val)
        if experiment is None:
            raise UsageError("config has no 'experiment' entry")
        return cls(experiment, opts)


def _encode_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, FLOAT_FMT)
    if isinstance(v, (list, tuple)):
        return ",".join(_encode_value(x) for x in v)
    return str(v)


def _decode_value(s: str) -> Any:
    if s in ("true", "false"):
        return s == "true"
    return s


# --- output ------------------------------------------------------------------------------

def _fmt(v: Any, key: str = "") -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v) and key == "c_v":
            return "inf"
        if not math.isfinite(v):
            raise CheckFailed(f"non-finite value in field {key!r}")
        return format(v, FLOAT_FMT)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x, key) for x in v)
    return str(v)


def _json_safe(v: Any, key: str = "") -> Any:
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v) and key == "c_v":
            return "inf"
        if not math.isfinite(v):
            raise CheckFailed(f"non-finite value in field {key!r}")
        return float(format(v, FLOAT_FMT))
    if isinstance(v, (list, tuple)):
        return [_json_safe(x, key) for x in v]
    if isinstance(v, dict):
        return {k: _json_safe(x, k) for k, x in v.items()}
    return v


def render(rows: list[dict], fmt: str, config: ExperimentConfig, ok: bool) -> str:
    if fmt == "json":
        payload = {"config": {"experiment": config.experiment, **config.options},
                   "ok": ok, "rows": [_json_safe(r) for r in rows]}
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(cols or ["ok"])
    if not rows:
        w.writerow([_fmt(ok)])
    for r in rows:
        w.writerow([_fmt(r.get(c), c) for c in cols])
    return buf.getvalue()


# --- argument helpers ----------------------------------------------------------------------

def _ints(s: str | None) -> list[int] | None:
    if s is None or s == "":
        return None
    try:
        return [int(x) for x in str(s).split(",")]
    except ValueError:
        raise UsageError(f"expected a comma list of integers, got {s!r}") from None


def _floats(s: str | None) -> list[float] | None:
    if s is None or s == "":
        return None
    try:
        return [float(x) for x in str(s).split(",")]
    except ValueError:
        raise UsageError(f"expected a comma list of numbers, got {s!r}") from None


def _one_int(opts: dict, key: str, default: int | None = None) -> int:
    v = opts.get(key)
    if v is None:
        if default is None:
            raise UsageError(f"--{key} is required")
        return default
    vals = _ints(v)
    if len(vals) != 1:
        raise UsageError(f"--{key} takes a single integer")
    return vals[0]


def _n_list(opts: dict) -> list[int]:
    if opts.get("n") is not None:
        return _ints(opts["n"])
    if opts.get("nmax") is not None:
        lo = _one_int(opts, "nmin", 2)
        return list(range(lo, _one_int(opts, "nmax") + 1))
    raise UsageError("--n or --nmax is required")


def _shift_cfg(opts: dict, g: int | None = None):
    from .moments import ShiftConfig
    theta = _floats(opts.get("theta"))
    scaled = _floats(opts.get("theta_g"))
    if (theta is None) == (scaled is None):
        raise UsageError("give exactly one of --theta and --theta-g")
    if scaled is not None:
        if g is None or g < 1:
            raise UsageError("--theta-g needs n with g >= 1")
        theta = [c / g for c in scaled]
    k = _ints(opts.get("k")) or [1] * len(theta)
    m = _one_int(opts, "m", len(theta))
    alpha = _floats(opts.get("alpha")) or [0.0] * len(theta)
    if not (m == len(theta) == len(k) == len(alpha)):
        raise UsageError(f"m = {m} does not match the lengths of k, theta, alpha")
    try:
        cfg = ShiftConfig(tuple(k), tuple(theta), tuple(alpha))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.m > 1:
        from .moments import DegenerateConfig
        try:
            cfg.check_distinct()
        except DegenerateConfig as exc:
            raise UsageError(f"degenerate config: {exc}") from None
    return cfg


def _cap(opts: dict) -> int:
    from .charsum import DEFAULT_CAP
    return _one_int(opts, "cap", DEFAULT_CAP)


# --- experiments ---------------------------------------------------------------------------

def exp_ensemble(opts: dict) -> tuple[list[dict], bool]:
    from .fqarith import count_monic, count_primes, count_squarefree, prime_count_check
    q = _one_int(opts, "q")
    rows = []
    for n in _n_list(opts):
        pc = prime_count_check(q, n)
        rows.append({"q": q, "n": n, "monic": count_monic(q, n), "primes": count_primes(q, n),
                     "squarefree": count_squarefree(q, n), "prime_main": float(pc.main_term),
                     "prime_error": float(pc.error), "prime_constant": float(pc.constant)})
    ok = all(r["squarefree"] == (q ** r["n"] - q ** (r["n"] - 1) if r["n"] >= 2 else q ** r["n"]) for r in rows)
    return rows, ok


def exp_lfunction(opts: dict) -> tuple[list[dict], bool]:
    from .fqarith import format_poly, parse_poly
    from .lfunc import build_lpoly, ensemble_lpolys, export_record, sampled_lpolys
    q = _one_int(opts, "q")
    rows = []
    if opts.get("d"):
        L = build_lpoly(parse_poly(opts["d"], q))
        return [{"record": export_record(L)}], True
    mode = opts.get("mode") or "enumerate"
    for n in _n_list(opts):
        if mode == "sample":
            E = sampled_lpolys(q, n, _one_int(opts, "samples"), _one_int(opts, "seed", 0))
        else:
            E = ensemble_lpolys(q, n, "auto", _cap(opts))
        for i in range(len(E)):
            rows.append({"record": export_record(E.lpoly(i))})
    return rows, True


def exp_moments(opts: dict) -> tuple[list[dict], bool]:
    from .lfunc import genus
    from .moments import derivative_moment, mu_sigma, shifted_moment, tail_histogram
    q = _one_int(opts, "q")
    timing = bool(opts.get("timing"))
    rows = []
    ok = True
    for n in _n_list(opts):
        g = genus(n)
        if opts.get("derivative"):
            l = _one_int(opts, "derivative")
            k = _one_int(opts, "k", 1)
            val, pred = derivative_moment(q, n, k, l, _cap(opts))
            rows.append({"q": q, "n": n, "g": g, "k": k, "l": l, "moment": val, "predicted_power": pred,
                         "ratio": val / pred if pred else 0.0})
            continue
        cfg = _shift_cfg(opts, g)
        if opts.get("tail"):
            parts = _floats(opts["tail"].replace(":", ","))
            if parts is None or len(parts) != 3 or parts[2] <= 0:
                raise UsageError("--tail takes start:stop:step")
            grid = np.arange(parts[0], parts[1] + parts[2] / 2, parts[2])
            h = tail_histogram(cfg, q, n, grid, _cap(opts))
            ref = h.reference
            if np.any(np.diff(h.counts) > 0):
                ok = False
            for V, c, r in zip(h.V, h.counts, ref):
                rows.append({"q": q, "n": n, "g": g, "V": float(V), "count": int(c), "fraction": c / h.size,
                             "gaussian_reference": float(r), "zero_count": h.zero_count,
                             "mu": h.mu, "sigma": h.sigma})
            continue
        mode = opts.get("mode") or "enumerate"
        samples = _one_int(opts, "samples") if mode == "sample" else None
        seed = _one_int(opts, "seed", 0) if mode == "sample" else None
        rep = shifted_moment(cfg, q, n, mode, samples, seed, _cap(opts))
        rec = rep.record(timing)
        rec["c_v"] = mu_sigma(cfg, g).c_v if g >= 2 else math.inf
        if rep.imag_residue > 1e-12 * max(1.0, abs(rep.S)):
            ok = False
        rows.append(rec)
    return rows, ok


def exp_lowerbound(opts: dict) -> tuple[list[dict], bool]:
    from .lfunc import genus
    from .moments import lower_bound_pipeline
    q = _one_int(opts, "q")
    rows = []
    for n in _n_list(opts):
        g = genus(n)
        cfg = _shift_cfg(opts, g)
        X = _floats(opts.get("x"))
        try:
            lb = lower_bound_pipeline(cfg, q, n, X[0] if X else None, _cap(opts))
        except ArithmeticError as exc:
            raise CheckFailed(str(exc)) from None
        rows.append({"q": q, "n": n, "g": g, "k": list(cfg.k), "theta": list(cfg.theta), "alpha": list(cfg.alpha),
                     "T": lb.T, "S1": lb.S1, "S2": lb.S2, "S2_form": lb.S2_form, "cauchy_lower": lb.cauchy_lower,
                     "full": lb.full, "lower_fraction": lb.cauchy_lower / lb.full})
    return rows, True


def exp_residue(opts: dict) -> tuple[list[dict], bool]:
    from fractions import Fraction
    from .analytic import geometric_e, residue_main_term
    k = _ints(opts.get("k")) or [1, 1]
    gs = _ints(opts.get("g")) or [50, 100, 200, 400]
    ratio = Fraction(opts.get("e_ratio") or "1/2")
    binomial = opts.get("binomial") or "shifted"
    rows = []
    for g in gs:
        theta = _floats(opts.get("theta"))
        scaled = _floats(opts.get("theta_g"))
        if scaled is not None:
            theta = [c / g for c in scaled]
        if theta is None or len(theta) != 2 or len(k) != 2:
            raise UsageError("residue needs two shifts (--k a,b and --theta or --theta-g)")
        r = residue_main_term(k, theta, g, geometric_e(ratio), binomial=binomial)
        r2, r3 = r.ratios
        rows.append({"g": g, "V": r.V, "leading": r.leading.real, "second": r.second.real, "third": r.third.real,
                     "second_ratio": r2, "third_ratio": r3, "convention": r.convention})
    return rows, True


EXPERIMENTS: dict[str, Callable[[dict], tuple[list[dict], bool]]] = {
    "ensemble": exp_ensemble,
    "lfunction": exp_lfunction,
    "moments": exp_moments,
    "lowerbound": exp_lowerbound,
    "residue": exp_residue,
}


def exp_verify(opts: dict) -> tuple[list[dict], bool]:
    from . import suites
    name = opts.get("suite")
    if name not in suites.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(suites.SUITES)}")
    return suites.SUITES[name](opts)


EXPERIMENTS["verify"] = exp_verify


# --- parser --------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


COMMON = ["q", "n", "nmin", "nmax", "m", "k", "theta", "theta_g", "alpha", "mode", "samples", "seed",
          "threads", "format", "out", "cap"]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperlf", description="Hyperelliptic L-function moment experiments")
    sub = p.add_subparsers(dest="experiment")
    for name in ("ensemble", "lfunction", "verify", "moments", "lowerbound", "residue"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; command-line flags override it")
        sp.add_argument("--q")
        sp.add_argument("--n", help="degree or comma list")
        sp.add_argument("--nmin")
        sp.add_argument("--nmax")
        sp.add_argument("--m")
        sp.add_argument("--k")
        sp.add_argument("--theta")
        sp.add_argument("--theta-g", dest="theta_g", help="shift angles as multiples of 1/g")
        sp.add_argument("--alpha")
        sp.add_argument("--mode", choices=["enumerate", "sample"])
        sp.add_argument("--samples")
        sp.add_argument("--seed")
        sp.add_argument("--threads")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--out")
        sp.add_argument("--cap")
        sp.add_argument("--timing", action="store_true", default=None, help="add wall-clock fields")
        if name == "verify":
            sp.add_argument("--suite")
            sp.add_argument("--s", help="comma list of real s for the afe suite")
            sp.add_argument("--kmax")
            sp.add_argument("--l")
        if name == "lfunction":
            sp.add_argument("--D", dest="d", help="single D, coefficients low to high, e.g. 1,0,1")
        if name == "moments":
            sp.add_argument("--tail", help="start:stop:step grid of V")
            sp.add_argument("--derivative", help="derivative order l (uses --k as the power)")
        if name == "lowerbound":
            sp.add_argument("--X", dest="x")
        if name == "residue":
            sp.add_argument("--g", help="comma list of genera")
            sp.add_argument("--e-ratio", dest="e_ratio", help="synthetic e_n = ratio^n, e.g. 1/2")
            sp.add_argument("--binomial", choices=["shifted", "exact"])
    return p


def resolve(argv: Sequence[str]) -> ExperimentConfig:
    args = build_parser().parse_args(list(argv))
    if not args.experiment:
        raise UsageError("no command given")
    opts: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = ExperimentConfig.from_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if base.experiment != args.experiment:
            raise UsageError(f"config is for {base.experiment!r}, not {args.experiment!r}")
        opts.update(base.options)
    for k, v in vars(args).items():
        if k in ("experiment", "config") or v is None:
            continue
        opts[k] = v
    return ExperimentConfig(args.experiment, opts)


def set_threads(opts: dict) -> None:
    t = opts.get("threads")
    if t is None:
        return
    n = _one_int(opts, "threads")
    if n < 1:
        raise UsageError("--threads must be >= 1")
    import numba
    if n > numba.config.NUMBA_NUM_THREADS:
        raise UsageError(f"--threads {n} exceeds the pool size {numba.config.NUMBA_NUM_THREADS}")
    numba.set_num_threads(n)


def run(config: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    opts = config.options
    fmt = opts.get("format") or "csv"
    set_threads(opts)
    from .charsum import CapExceeded
    try:
        rows, ok = EXPERIMENTS[config.experiment](opts)
    except CapExceeded as exc:
        raise UsageError(str(exc)) from None
    # thread count is an execution detail, not part of the resolved result
    shown = ExperimentConfig(config.experiment, {k: v for k, v in opts.items() if k != "threads"})
    text = render(rows, fmt, shown, ok)
    out = opts.get("out")
    if out:
        try:
            with open(out, "w", newline="") as fh:
                fh.write(text)
            if fmt == "csv":
                with open(out + ".config", "w") as fh:
                    fh.write(shown.to_text())
        except OSError as exc:
            raise UsageError(f"cannot write output: {exc}") from None
    else:
        stdout.write(text)
    return 0 if ok else 2


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = resolve(argv)
        return run(config)
    except UsageError as exc:
        print(f"hyperlf: error: {exc}", file=sys.stderr)
        return 1
    except CheckFailed as exc:
        print(f"hyperlf: check failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"hyperlf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
