"""Command-line front end.

Every subcommand writes one artifact: CSV (header row, LF endings, decimal
strings) or a JSON object with keys ``command``, ``params``, ``results`` and
``provenance``.

Exit codes: 0 success, 1 usage, 2 precision, 3 singularity / on-contour zero,
4 count mismatch or non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import __version__
from .asympt import decay_rate, grad_ratio, sharp_ratio, xi_rows_to_csv, xi_scan
from .errors import DomainError, PinrateError
from .laws import (
    InterArrivalLaw,
    make_basic_law,
    make_geometric_law,
    make_logcorrected_law,
    make_shifted_law,
    make_table_law,
    make_two_point_law,
    tilt,
)
from .pinning import contact_fraction, fe_estimate, partition
from .precision import PrecisionSpec, decimal_string
from .renewal import delta_series, mass_renewal, mc_sample
from .spectral import annulus_bounds, count_zeros, critical_tilt, explicit_b0, find_roots

COMMANDS = ("law", "tilt", "u", "delta", "rate", "ratio", "roots", "b0", "xi-scan", "pinning", "mc")
FAMILY_CHOICES = ("basic", "shifted", "logcorrected", "table", "two-point", "geometric")
NEEDS_B = ("tilt", "u", "delta", "rate", "ratio", "roots")

EXIT_USAGE = 1


class UsageError(PinrateError):
    exit_code = EXIT_USAGE


@dataclass
class RunConfig:
    command: str
    family: str = "basic"
    alpha: float = 0.5
    m: int = 1
    j: int = 1
    table: list | None = None
    tail_ratio: float | None = None
    p: float | None = None
    b: float | None = None
    beta: float | None = None
    n_max: int = 1000
    precision: PrecisionSpec = field(default_factory=PrecisionSpec)
    seed: int = 0
    out_format: str = "json"
    out_path: str | None = None
    window: tuple[int, int] | None = None
    n: list = field(default_factory=list)
    grid: list = field(default_factory=list)
    tol: float = 1e-6
    b_lo: float = 0.01
    b_hi: float = 5.0
    horizon: int = 20
    paths: int = 100_000
    h: float = 1e-4

    def params(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, PrecisionSpec):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def law(self) -> InterArrivalLaw:
        fam = self.family
        if fam == "basic":
            return make_basic_law(self.alpha)
        if fam == "shifted":
            return make_shifted_law(self.alpha, self.m)
        if fam == "logcorrected":
            return make_logcorrected_law(self.alpha, self.j)
        if fam == "two-point":
            return make_two_point_law(self.p)
        if fam == "geometric":
            return make_geometric_law(self.p)
        return make_table_law(self.table, tail_ratio=self.tail_ratio)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _precision(text: str) -> PrecisionSpec:
    try:
        return PrecisionSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"precision must be 'auto' or a bit count >= 53, got {text!r}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="file of key=value lines; flags take precedence")
    p.add_argument("--family", choices=FAMILY_CHOICES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--j", type=int, help="log power of the log-corrected family")
    p.add_argument("--table", type=_floats, help="comma-separated probabilities K(1), K(2), ...")
    p.add_argument("--tail-ratio", dest="tail_ratio", type=float)
    p.add_argument("--p", type=float, help="parameter of the two-point / geometric laws")
    p.add_argument("--b", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--nmax", dest="n_max", type=int)
    p.add_argument("--precision", type=_precision)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="out_format", choices=("csv", "json"))
    p.add_argument("--out-path", dest="out_path")
    p.add_argument("--window", type=_ints, help="n_lo,n_hi")
    p.add_argument("--n", type=_ints, help="comma-separated indices")
    p.add_argument("--grid", type=_floats, help="comma-separated b values")
    p.add_argument("--tol", type=float)
    p.add_argument("--b-lo", dest="b_lo", type=float)
    p.add_argument("--b-hi", dest="b_hi", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--paths", type=int)
    p.add_argument("--N", dest="N_volume", type=int, help="volume for the pinning command")
    p.add_argument("--h", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pinrate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pinrate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    return parser


_CONFIG_TYPES = {
    "family": str, "alpha": float, "m": int, "j": int, "table": _floats, "tail_ratio": float,
    "p": float, "b": float, "beta": float, "n_max": int, "nmax": int, "precision": _precision,
    "seed": int, "out_format": str, "out": str, "out_path": str, "window": _ints, "n": _ints,
    "grid": _floats, "tol": float, "b_lo": float, "b_hi": float, "horizon": int, "paths": int,
    "N": int, "h": float,
}
_CONFIG_ALIASES = {"nmax": "n_max", "out": "out_format", "N": "N_volume"}


def read_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"--config {path}:{lineno}: unknown key {key!r}")
        try:
            out[_CONFIG_ALIASES.get(key, key)] = _CONFIG_TYPES[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"--config {path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def _require(cond: bool, flag: str, message: str) -> None:
    if not cond:
        raise UsageError(f"{flag}: {message}")


def _validate(cfg: RunConfig) -> None:
    _require(cfg.family in FAMILY_CHOICES, "--family", f"unknown family {cfg.family!r}")
    if cfg.family in ("basic", "shifted", "logcorrected"):
        _require(0 < cfg.alpha < 1, "--alpha", "must lie in (0, 1)")
    if cfg.family == "shifted":
        _require(cfg.m >= 0, "--m", "must be a nonnegative integer")
    if cfg.family == "logcorrected":
        _require(cfg.j >= 0, "--j", "must be a nonnegative integer")
    if cfg.family in ("two-point", "geometric"):
        _require(cfg.p is not None and 0 < cfg.p < 1, "--p", "must lie in (0, 1)")
    if cfg.family == "table":
        _require(bool(cfg.table), "--table", "required for the table family")
    table_like = cfg.family in ("table", "two-point", "geometric")
    if cfg.command in NEEDS_B or (cfg.command == "mc" and not table_like):
        _require(cfg.b is not None, "--b", "required for this command")
    if cfg.b is not None:
        if table_like:
            _require(cfg.b >= 0 and math.isfinite(cfg.b), "--b", "must be >= 0")
        else:
            _require(cfg.b > 0 and math.isfinite(cfg.b), "--b", "must be > 0")
    _require(cfg.n_max >= 1, "--nmax", "must be >= 1")
    _require(cfg.tol > 0, "--tol", "must be > 0")
    if cfg.window is not None:
        _require(len(cfg.window) == 2 and 1 <= cfg.window[0] < cfg.window[1] <= cfg.n_max,
                 "--window", "must be n_lo,n_hi with 1 <= n_lo < n_hi <= nmax")
    if cfg.command == "ratio":
        _require(bool(cfg.n) and all(0 <= k <= cfg.n_max for k in cfg.n), "--n", "indices must lie in [0, nmax]")
    if cfg.command == "xi-scan":
        _require(bool(cfg.grid) and all(x > 0 for x in cfg.grid), "--grid", "values must be > 0")
    if cfg.command == "b0":
        _require(0 < cfg.b_lo < cfg.b_hi, "--b-lo/--b-hi", "need 0 < b_lo < b_hi")
    if cfg.command == "pinning":
        _require(cfg.beta is not None and math.isfinite(cfg.beta), "--beta", "required")
        _require(cfg.N_volume >= 1, "--N", "must be >= 1")
        _require(cfg.h > 0, "--h", "must be > 0")
    if cfg.command == "mc":
        _require(cfg.horizon >= 1, "--horizon", "must be >= 1")
        _require(cfg.paths >= 1, "--paths", "must be >= 1")


def parse_args(argv: list[str] | None = None) -> RunConfig:
    """Deterministic parse; config-file values fill in flags that were not given."""
    ns = build_parser().parse_args(argv)
    given = {k: v for k, v in vars(ns).items() if v is not None and k != "config"}
    values = read_config(ns.config) if ns.config else {}
    values.update(given)
    n_volume = values.pop("N_volume", 2000)
    if "window" in values:
        values["window"] = tuple(values["window"])
    cfg = RunConfig(**values)
    cfg.N_volume = n_volume
    if cfg.command == "b0" and "b_hi" not in values:
        cfg.b_hi = 5.0
    _validate(cfg)
    return cfg


# -- dispatch ---------------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _kv_csv(results: dict) -> str:
    return _csv(["key", "value"], [(k, v if isinstance(v, str) else json.dumps(v)) for k, v in results.items()])


def _series_dict(series) -> dict:
    bits = series.precision_bits
    return {
        "n_max": series.n_max,
        "u_inf": decimal_string(series.u_inf, bits),
        "u": [decimal_string(x, bits) for x in series.u],
        "d": [decimal_string(x, bits) for x in series.d],
        "grad_u": [decimal_string(x, bits) for x in series.grad_u],
    }


def run(cfg: RunConfig) -> tuple[dict, str | None, int | None]:
    """Execute ``cfg``; returns (results, csv text or None, precision bits)."""
    law = cfg.law()
    cmd = cfg.command
    if cmd == "law":
        masses = law.masses(min(cfg.n_max, 50))
        res = {"law": law.to_dict(), "support_start": law.support_start, "aperiodic": law.aperiodic,
               "degenerate": law.degenerate,
               "masses": [decimal_string(x, 64) for x in masses[1:]]}
        return res, _csv(["n", "K"], [(n, res["masses"][n - 1]) for n in range(1, len(masses))]), 64
    if cmd == "tilt":
        t = tilt(law, cfg.b, cfg.precision)
        res = t.to_dict()
        return res, None, t.bits
    if cmd in ("u", "delta", "rate", "ratio"):
        t = tilt(law, cfg.b)
        op = mass_renewal if cmd == "u" else delta_series
        series = op(t, cfg.n_max, cfg.precision)
        bits = series.precision_bits
        if cmd in ("u", "delta"):
            return _series_dict(series), series.to_csv(), bits
        if cmd == "rate":
            rep = decay_rate(series, cfg.window)
            return rep.to_dict(), None, bits
        rows = []
        for k in cfg.n:
            rows.append({
                "n": k,
                "sharp_ratio": decimal_string(sharp_ratio(series, None, k), 64),
                "grad_ratio": decimal_string(grad_ratio(series, None, k), 64),
            })
        return {"ratios": rows}, _csv(["n", "sharp_ratio", "grad_ratio"],
                                      [(r["n"], r["sharp_ratio"], r["grad_ratio"]) for r in rows]), bits
    if cmd == "roots":
        t = tilt(law, cfg.b)
        r_in, r_out = annulus_bounds(t)
        count = count_zeros(t, r_in, r_out)
        roots = find_roots(t, r_out, r_in)
        res = {"count": count.to_dict(), "roots": [r.to_dict() for r in roots]}
        rows = [(r.z0.real, r.z0.imag, r.modulus, r.pole_coefficient.real, r.pole_coefficient.imag, r.residual)
                for r in roots]
        return res, _csv(["re", "im", "modulus", "coef_re", "coef_im", "residual"],
                         [[repr(x) for x in row] for row in rows]), 53
    if cmd == "b0":
        b0 = critical_tilt(law, cfg.b_lo, cfg.b_hi, cfg.tol)
        res = {"b0": b0 if math.isfinite(b0) else "inf", "tol": cfg.tol, "b_lo": cfg.b_lo, "b_hi": cfg.b_hi}
        if law.family == "shifted" and law.alpha == 0.5 and law.shift == 1:
            res["closed_form"] = explicit_b0()
            res["closed_form_diff"] = abs(b0 - explicit_b0())
        return res, None, 53
    if cmd == "xi-scan":
        rows = xi_scan(law, cfg.grid, precision=cfg.precision)
        res = {"rows": [r.__dict__ for r in rows]}
        return res, xi_rows_to_csv(rows), None
    if cmd == "pinning":
        table = partition(law, cfg.beta, cfg.N_volume)
        res = {"beta": cfg.beta, "N": cfg.N_volume}
        if cfg.N_volume >= 100:
            res["fe_estimate"] = fe_estimate(table)
            res["contact_fraction"] = contact_fraction(law, cfg.beta, cfg.N_volume, cfg.h)
        return res, table.to_csv(), 53
    if cmd == "mc":
        t = tilt(law, cfg.b if cfg.b is not None else 0.0)
        est = mc_sample(t, cfg.horizon, cfg.paths, cfg.seed)
        res = {"horizon": est.horizon, "n_paths": est.n_paths, "seed": est.seed,
               "u_hat": [repr(float(x)) for x in est.u_hat],
               "std_err": [repr(float(x)) for x in est.std_err]}
        return res, est.to_csv(), 53
    raise UsageError(f"unknown command {cmd!r}")


def _write_atomic(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".pinrate-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dispatch(cfg: RunConfig) -> int:
    results, csv_text, bits = run(cfg)
    if cfg.out_format == "csv":
        text = csv_text if csv_text is not None else _kv_csv(results)
    else:
        doc = {
            "command": cfg.command,
            "params": cfg.params() | {"N": cfg.N_volume},
            "results": results,
            "provenance": {"precision_bits": bits, "seed": cfg.seed, "version": __version__},
        }
        text = json.dumps(doc, indent=2, default=str) + "\n"
    _write_atomic(text, cfg.out_path)
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
        return dispatch(cfg)
    except PinrateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except DomainError as exc:  # pragma: no cover - DomainError is a PinrateError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
