"""Decay rates, sharp-asymptotic ratios and correlation length."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import mpmath
import numpy as np

from .errors import DomainError, InsufficientDataError, PrecisionError, SingularityError
from .laws import InterArrivalLaw, TiltedLaw, mu_values, require_nondegenerate, tilt
from .precision import PrecisionSpec
from .renewal import RenewalSeries, delta_series

MIN_POINTS = 20


@dataclass(frozen=True)
class RateReport:
    rate: float
    window: tuple[int, int]
    fit_r2: float
    oscillatory: bool
    n_sign_changes: int
    n_points: int

    def to_dict(self) -> dict:
        out = asdict(self)
        out["window"] = list(self.window)
        return out


def default_window(n_max: int) -> tuple[int, int]:
    return n_max // 4, (3 * n_max) // 4


def _lobe_maxima(ns: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Largest |value| within each run of constant sign."""
    signs = np.sign(vals)
    breaks = np.flatnonzero(signs[1:] != signs[:-1]) + 1
    runs = np.split(np.arange(len(vals)), breaks)
    if len(runs) > 4:
        runs = runs[1:-1]  # edge runs may be cut by the window
    pick = np.array([r[np.argmax(np.abs(vals[r]))] for r in runs])
    return ns[pick], np.abs(vals[pick])


def decay_rate(series: RenewalSeries, window: tuple[int, int] | None = None) -> RateReport:
    """Exponential decay rate of |d(n)| by least squares on log|d(n)|.

    Only points with |d(n)| above the precision floor enter the fit. When d
    changes sign in the window, the fit runs through the per-lobe maxima of
    |d| (the envelope) instead of every point.
    """
    if window is None:
        window = default_window(series.n_max)
    n_lo, n_hi = window
    if not (1 <= n_lo < n_hi <= series.n_max):
        raise DomainError(f"window {window} not inside [1, {series.n_max}]")
    ns = np.arange(n_lo, n_hi + 1)
    unit = series.unit
    keep = [n for n in ns if abs(series.d[n]) > 1000 * n * unit]
    if not keep:
        raise PrecisionError(f"|d(n)| is below the precision floor throughout {window}")
    if len(keep) < MIN_POINTS:
        raise InsufficientDataError(f"only {len(keep)} usable points in {window}")
    ns = np.array(keep)
    # log|d| and sign in double; the magnitudes may be far below 1e-308
    logs = np.array([float(mpmath.log(abs(series.d[n]))) for n in ns])
    signs = np.array([1.0 if series.d[n] > 0 else -1.0 for n in ns])
    n_changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    if n_changes:
        ns_fit, _ = _lobe_maxima(ns, signs * np.exp(logs - logs.max()))
        logs_fit = np.array([float(mpmath.log(abs(series.d[n]))) for n in ns_fit])
    else:
        ns_fit, logs_fit = ns, logs
    if len(ns_fit) < 3:
        raise InsufficientDataError(f"only {len(ns_fit)} envelope points in {window}")
    slope, intercept = np.polyfit(ns_fit, logs_fit, 1)
    resid = logs_fit - (slope * ns_fit + intercept)
    ss_tot = float(np.sum((logs_fit - logs_fit.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateReport(float(-slope), (int(n_lo), int(n_hi)), r2, n_changes > 0, n_changes, len(ns_fit))


def _matched(series: RenewalSeries, tilted: TiltedLaw | None) -> TiltedLaw:
    if tilted is None:
        return series.tilted
    if tilted.base != series.tilted.base or tilted.b != series.tilted.b:
        raise DomainError("tilted law does not match the series")
    return tilted.with_bits(series.precision_bits)


def _check_n(series: RenewalSeries, n: int) -> None:
    if not (0 <= n <= series.n_max):
        raise DomainError(f"n = {n} outside [0, {series.n_max}]")


def sharp_ratio(series: RenewalSeries, tilted: TiltedLaw | None, n: int) -> mpmath.mpf:
    """d(n) (c(b) - 1)**2 / K_b(n), which tends to 1 for b < b0.

    Returns exactly 0 when d(n) is indistinguishable from zero (e.g. the
    geometric law, whose delta sequence vanishes identically).
    """
    _check_n(series, n)
    t = _matched(series, tilted)
    kb = t.kb(n)[n]
    if kb == 0:
        raise SingularityError(f"K_b({n}) = 0; ratio undefined")
    d = series.d[n]
    if abs(d) <= 1000 * max(n, 1) * series.unit:
        return mpmath.mpf(0)
    with mpmath.workprec(series.precision_bits):
        return d * (t.c_b - 1) ** 2 / kb


def muhat_at_radius(tilted: TiltedLaw) -> mpmath.mpf:
    """mu_b-hat(e^b) = (c(b) - 1) / (m_b (e^b - 1))."""
    with mpmath.workprec(tilted.bits + 32):
        return (tilted.c_b - 1) / (tilted.m_b * mpmath.expm1(mpmath.mpf(tilted.b)))


def grad_ratio(series: RenewalSeries, tilted: TiltedLaw | None, n: int) -> mpmath.mpf:
    """grad u_b(n) / [-mu_b(n) / (mu_b-hat(e^b)**2 m_b)], which tends to 1 for b < b0."""
    _check_n(series, n)
    t = _matched(series, tilted)
    mu = mu_values(t, n)[n]
    if mu <= 1000 * max(n, 1) * series.unit:
        raise PrecisionError(f"mu_b({n}) is below the precision floor")
    with mpmath.workprec(series.precision_bits):
        predicted = -mu / (muhat_at_radius(t) ** 2 * t.m_b)
        return series.grad_u[n] / predicted


@dataclass(frozen=True)
class CNWCheck:
    n: int
    mu_ratio: float
    mu_ratio_target: float
    conv_ratio: float
    conv_ratio_target: float

    @property
    def mu_ratio_rel_err(self) -> float:
        return abs(self.mu_ratio / self.mu_ratio_target - 1)

    @property
    def conv_ratio_rel_err(self) -> float:
        return abs(self.conv_ratio / self.conv_ratio_target - 1)


def cnw_hypotheses(tilted: TiltedLaw, n: int, precision: PrecisionSpec = PrecisionSpec()) -> CNWCheck:
    """mu_b(n+1)/mu_b(n) against e^{-b}, and sum_j mu(j) mu(n-j) / mu(n) against 2 mu_b-hat(e^b)."""
    if n < 1:
        raise DomainError("n must be positive")
    t = tilted.with_bits(precision.resolve(float(tilted.b), n + 1))
    mu = mu_values(t, n + 1)
    with mpmath.workprec(t.bits + 32):
        ratio = mu[n + 1] / mu[n]
        conv = mpmath.fsum(mu[j] * mu[n - j] for j in range(n + 1)) / mu[n]
        return CNWCheck(
            n,
            float(ratio),
            float(mpmath.exp(-mpmath.mpf(t.b))),
            float(conv),
            float(2 * muhat_at_radius(t)),
        )


def correlation_fn(series: RenewalSeries, tilted: TiltedLaw | None, n: int) -> mpmath.mpf:
    """c(n) = m_b / (m_b - 1) (u(n) - 1/m_b)."""
    _check_n(series, n)
    t = _matched(series, tilted)
    require_nondegenerate(t)
    with mpmath.workprec(series.precision_bits + 32):
        m = t.m_b
        return m / (m - 1) * series.d[n]


def correlation_length(
    law: InterArrivalLaw,
    b: float,
    n_max: int,
    precision: PrecisionSpec = PrecisionSpec(),
    window: tuple[int, int] | None = None,
) -> float:
    """xi(b) = 1 / decay rate of the delta sequence."""
    report = _rate_for(law, b, n_max, precision, window)
    return 1.0 / report.rate


def _rate_for(law, b, n_max, precision, window=None) -> RateReport:
    if b < 0 or (b == 0 and not law.finite_mean):
        raise DomainError(f"b must be > 0, got {b}")
    t = tilt(law, b)
    require_nondegenerate(t)
    series = delta_series(t, n_max, precision)
    return decay_rate(series, window)


def default_n_max_rule(b: float) -> int:
    """n_max growing like b**-1.5, i.e. faster than the correlation length 1/b."""
    return max(200, math.ceil(80 / b**1.5))


@dataclass(frozen=True)
class XiRow:
    b: float
    xi: float
    b_times_xi: float
    rate: float
    fit_r2: float
    oscillatory: bool
    n_max: int


def xi_scan(
    law: InterArrivalLaw,
    b_grid: Iterable[float],
    n_max_rule: Callable[[float], int] = default_n_max_rule,
    precision: PrecisionSpec = PrecisionSpec(),
) -> list[XiRow]:
    rows = []
    for b in b_grid:
        if not b > 0:
            raise DomainError(f"grid values must be > 0, got {b}")
        n_max = int(n_max_rule(b))
        rep = _rate_for(law, b, n_max, precision)
        xi = 1.0 / rep.rate
        rows.append(XiRow(float(b), xi, b * xi, rep.rate, rep.fit_r2, rep.oscillatory, n_max))
    return rows


XI_COLUMNS = ("b", "xi", "b_times_xi", "rate", "fit_r2", "oscillatory")


def xi_rows_to_csv(rows: list[XiRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(XI_COLUMNS)
    for r in rows:
        writer.writerow([repr(r.b), repr(r.xi), repr(r.b_times_xi), repr(r.rate), repr(r.fit_r2),
                         str(r.oscillatory).lower()])
    return buf.getvalue()
