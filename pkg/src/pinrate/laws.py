"""Inter-arrival laws, exponential tilting and the free-energy equation.

A law K(.) is a probability density on the positive integers. Tilting by
b >= 0 gives K_b(n) = c(b) K(n) exp(-b n) with c(b) = 1 / sum_n K(n) exp(-b n).

Four families are supported:

``basic``
    K(n) = Gamma(n - alpha) / (-Gamma(-alpha) n!), 0 < alpha < 1, built from
    the ratio recursion K(n+1) = K(n) (n - alpha) / (n + 1), K(1) = alpha.
``shifted``
    the basic law translated ``shift`` steps to the right.
``logcorrected``
    the basic law times (log(n + e))**logpow, renormalised numerically.
``table``
    explicit probabilities K(1..L), optionally continued by a geometric tail
    K(n) = K(L) q**(n - L) for n > L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .errors import DegenerateLawError, DomainError, NormalizationError, PrecisionError
from .precision import PrecisionSpec, unit

FAMILIES = ("basic", "shifted", "logcorrected", "table")

# closed-form vs series agreement required at 64-bit precision
AGREEMENT_RTOL = 1e-10
# largest truncation point for which the series cross-check is attempted
SERIES_CHECK_MAX_TERMS = 200_000
DEGENERATE_MEAN_EPS = 1e-12
# reference point for the Euler-Maclaurin tail of the log-corrected family
_LOGCORR_REF = 4096
FLOAT_HEAD = 8192


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _fraction_to_mpf(q: Fraction) -> mpmath.mpf:
    return mpmath.mpf(q.numerator) / q.denominator


def fraction_string(q: Fraction) -> str:
    """Exact decimal rendering when one exists, otherwise ``num/den``."""
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = q * 10**digits
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    if digits == 0:
        return sign + s
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


@dataclass(frozen=True)
class InterArrivalLaw:
    family: str
    alpha: float | None = None
    shift: int = 0
    logpow: int = 0
    table: tuple[Fraction, ...] = ()
    tail_ratio: Fraction | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")

    # -- structure -------------------------------------------------------

    @property
    def support_start(self) -> int:
        if self.family == "shifted":
            return self.shift + 1
        if self.family == "table":
            return next(i + 1 for i, p in enumerate(self.table) if p > 0)
        return 1

    @property
    def aperiodic(self) -> bool:
        if self.family != "table" or self.tail_ratio:
            return True
        g = 0
        for i, p in enumerate(self.table):
            if p > 0:
                g = math.gcd(g, i + 1)
        return g == 1

    @property
    def degenerate(self) -> bool:
        """True when the support is a single point."""
        return (
            self.family == "table"
            and not self.tail_ratio
            and sum(1 for p in self.table if p > 0) == 1
        )

    @property
    def has_closed_form(self) -> bool:
        return self.family in ("basic", "shifted", "table")

    @property
    def finite_mean(self) -> bool:
        return self.family == "table"

    # -- masses ----------------------------------------------------------

    def masses(self, n_max: int, bits: int = 64) -> list:
        """K(0..n_max) as mpf values (K(0) = 0) at ``bits`` of precision."""
        return list(_masses(self, n_max, bits))

    def tails(self, n_max: int, bits: int = 64) -> list:
        """Kbar(0..n_max) with Kbar(n) = sum_{j > n} K(j); never 1 - partial sum."""
        return list(_tails(self, n_max, bits))

    def masses_float(self, n_max: int) -> np.ndarray:
        if n_max > FLOAT_HEAD and self.family != "table":
            return _masses_float_long(self, n_max)
        return np.array([float(x) for x in _masses(self, n_max, 64)])

    def tails_float(self, n_max: int) -> np.ndarray:
        return np.array([float(x) for x in _tails(self, n_max, 64)])

    def log_tail(self, n: int) -> float:
        """log Kbar(n) in double precision, -inf past a finite support."""
        if self.family == "table":
            t = _table_tail_fraction(self, n)
            return math.log(t) if t > 0 else -math.inf
        k = n - self.shift
        if k < 0:
            return 0.0
        a = self.alpha
        # Kbar(k) = Gamma(k + 1 - alpha) / (Gamma(1 - alpha) k!) for the basic law
        out = math.lgamma(k + 1 - a) - math.lgamma(1 - a) - math.lgamma(k + 1)
        if self.family == "logcorrected":
            # crude upper envelope; only used to size truncation
            out += self.logpow * math.log(math.log(k + math.e)) + math.log(2.0)
        return out

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "alpha": self.alpha,
            "shift": self.shift,
            "logpow": self.logpow,
            "table": [fraction_string(p) for p in self.table],
            "tail_ratio": None if self.tail_ratio is None else fraction_string(self.tail_ratio),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InterArrivalLaw":
        family = data["family"]
        if family == "basic":
            return make_basic_law(float(data["alpha"]))
        if family == "shifted":
            return make_shifted_law(float(data["alpha"]), int(data["shift"]))
        if family == "logcorrected":
            return make_logcorrected_law(float(data["alpha"]), int(data["logpow"]))
        if family == "table":
            tail = data.get("tail_ratio")
            return make_table_law(
                [Fraction(p) for p in data["table"]],
                tail_ratio=None if tail is None else Fraction(tail),
            )
        raise DomainError(f"unknown family {family!r}")


def _check_alpha(alpha: float) -> None:
    if not (0 < alpha < 1):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def make_basic_law(alpha: float) -> InterArrivalLaw:
    _check_alpha(alpha)
    return InterArrivalLaw("basic", alpha=float(alpha))


def make_shifted_law(alpha: float, m: int) -> InterArrivalLaw:
    """Basic law moved ``m`` steps right; ``m = 0`` gives the basic law."""
    _check_alpha(alpha)
    if int(m) != m or m < 0:
        raise DomainError(f"shift must be a nonnegative integer, got {m}")
    if m == 0:
        return make_basic_law(alpha)
    return InterArrivalLaw("shifted", alpha=float(alpha), shift=int(m))


def make_logcorrected_law(alpha: float, j: int) -> InterArrivalLaw:
    _check_alpha(alpha)
    if int(j) != j or j < 0:
        raise DomainError(f"log power must be a nonnegative integer, got {j}")
    if j == 0:
        return make_basic_law(alpha)
    return InterArrivalLaw("logcorrected", alpha=float(alpha), logpow=int(j))


def make_table_law(
    probs: Sequence, tail_ratio=None, tol: float = 1e-12
) -> InterArrivalLaw:
    """Tabulated law K(n) = probs[n-1], optionally with a geometric tail.

    With ``tail_ratio = q`` the table continues as K(n) = probs[-1] q**(n-L).
    Entries are stored as exact fractions and renormalised to sum exactly to
    one once the input sum is within ``tol`` of one.
    """
    head = [_as_fraction(p) for p in probs]
    if not head:
        raise DomainError("empty probability table")
    if any(p < 0 for p in head):
        raise DomainError("probabilities must be nonnegative")
    q = None if tail_ratio is None else _as_fraction(tail_ratio)
    if q is not None and not (0 <= q < 1):
        raise DomainError(f"tail ratio must lie in [0, 1), got {tail_ratio}")
    if q == 0:
        q = None
    if q is None:
        while head and head[-1] == 0:
            head.pop()
    elif head[-1] == 0:
        raise DomainError("a geometric tail must continue a positive last entry")
    if not head:
        raise DomainError("probability table has no mass")
    total = sum(head, Fraction(0))
    if q is not None:
        total += head[-1] * q / (1 - q)
    if abs(total - 1) > Fraction(tol):
        raise NormalizationError(f"probabilities sum to {float(total)!r}, not 1")
    head = [p / total for p in head]
    return InterArrivalLaw("table", table=tuple(head), tail_ratio=q)


def make_geometric_law(p: float) -> InterArrivalLaw:
    """F(n) = (1 - p) p**(n - 1), n >= 1."""
    p = _as_fraction(p)
    if not (0 < p < 1):
        raise DomainError(f"geometric parameter must lie in (0, 1), got {p}")
    return make_table_law([1 - p], tail_ratio=p)


def make_two_point_law(p: float) -> InterArrivalLaw:
    """F(1) = 1 - p, F(2) = p."""
    p = _as_fraction(p)
    if not (0 < p < 1):
        raise DomainError(f"two-point parameter must lie in (0, 1), got {p}")
    return make_table_law([1 - p, p])


# -- density evaluation -------------------------------------------------------


def _table_tail_fraction(law: InterArrivalLaw, n: int) -> Fraction:
    head = law.table
    L = len(head)
    q = law.tail_ratio
    if q is None:
        return sum(head[n:], Fraction(0))
    if n >= L:
        return head[-1] * q ** (n - L + 1) / (1 - q)
    return sum(head[n:], Fraction(0)) + head[-1] * q / (1 - q)


@lru_cache(maxsize=64)
def _basic_masses(alpha: float, n_max: int, bits: int) -> tuple:
    with mpmath.workprec(bits + 16):
        a = mpmath.mpf(alpha)
        out = [mpmath.mpf(0)] * (n_max + 1)
        if n_max >= 1:
            out[1] = +a
        for n in range(1, n_max):
            out[n + 1] = out[n] * (n - a) / (n + 1)
    return tuple(out)


@lru_cache(maxsize=64)
def _basic_tails(alpha: float, n_max: int, bits: int) -> tuple:
    # Kbar(n) = Kbar(n-1) (n - alpha) / n, Kbar(0) = 1
    with mpmath.workprec(bits + 16):
        a = mpmath.mpf(alpha)
        out = [mpmath.mpf(1)] * (n_max + 1)
        for n in range(1, n_max + 1):
            out[n] = out[n - 1] * (n - a) / n
    return tuple(out)


def _logcorr_weight(alpha, j, x):
    # analytic continuation of Kbasic(x) (log(x + e))**j
    return (
        mpmath.exp(mpmath.loggamma(x - alpha) - mpmath.loggamma(x + 1))
        / (-mpmath.gamma(-alpha))
        * mpmath.log(x + mpmath.e) ** j
    )


@lru_cache(maxsize=32)
def _logcorr_em_tail(alpha: float, j: int, N: int, bits: int) -> mpmath.mpf:
    """Euler-Maclaurin estimate of sum_{n > N} Kbasic(n) (log(n+e))**j."""
    with mpmath.workprec(min(bits, 256) + 16):
        a = mpmath.mpf(alpha)
        f = lambda x: _logcorr_weight(a, j, x)
        integral = mpmath.quad(f, [N, 2 * N, 8 * N, mpmath.inf])
        d1 = mpmath.diff(f, N, 1)
        d3 = mpmath.diff(f, N, 3)
        d5 = mpmath.diff(f, N, 5)
        return integral - f(N) / 2 - d1 / 12 + d3 / 720 - d5 / 30240


def _logcorr_raw(alpha: float, j: int, n_max: int, bits: int) -> list:
    base = _basic_masses(alpha, n_max, bits)
    with mpmath.workprec(bits + 16):
        e = mpmath.e
        return [base[n] * mpmath.log(n + e) ** j for n in range(n_max + 1)]


@lru_cache(maxsize=32)
def _logcorr_norm(alpha: float, j: int, bits: int) -> mpmath.mpf:
    raw = _logcorr_raw(alpha, j, _LOGCORR_REF, bits)
    with mpmath.workprec(bits + 16):
        return mpmath.fsum(raw) + _logcorr_em_tail(alpha, j, _LOGCORR_REF, bits)


@lru_cache(maxsize=64)
def _masses(law: InterArrivalLaw, n_max: int, bits: int) -> tuple:
    fam = law.family
    if fam == "basic":
        return _basic_masses(law.alpha, n_max, bits)
    if fam == "shifted":
        m = law.shift
        base = _basic_masses(law.alpha, max(n_max - m, 0), bits)
        zero = mpmath.mpf(0)
        return tuple(zero if n <= m else base[n - m] for n in range(n_max + 1))
    if fam == "logcorrected":
        raw = _logcorr_raw(law.alpha, law.logpow, n_max, bits)
        z = _logcorr_norm(law.alpha, law.logpow, bits)
        with mpmath.workprec(bits + 16):
            return tuple(r / z for r in raw)
    with mpmath.workprec(bits + 16):
        head = [_fraction_to_mpf(p) for p in law.table]
        L = len(head)
        out = [mpmath.mpf(0)] * (n_max + 1)
        for n in range(1, min(n_max, L) + 1):
            out[n] = head[n - 1]
        if law.tail_ratio is not None and n_max > L:
            q = _fraction_to_mpf(law.tail_ratio)
            for n in range(L + 1, n_max + 1):
                out[n] = out[n - 1] * q
        return tuple(out)


@lru_cache(maxsize=8)
def _masses_float_long(law: InterArrivalLaw, n_max: int) -> np.ndarray:
    """Double-precision masses for long horizons.

    The first FLOAT_HEAD basic masses come from the exact recursion; beyond
    that the same ratio recursion runs vectorised in extended precision
    (np.longdouble), keeping the relative error near 1e-13 at n ~ 10**6.
    """
    m = law.shift
    n_basic = n_max - m
    head = np.array([float(x) for x in _basic_masses(law.alpha, FLOAT_HEAD, 64)], dtype=np.longdouble)
    n = np.arange(FLOAT_HEAD, n_basic, dtype=np.longdouble)
    ratios = (n - np.longdouble(law.alpha)) / (n + 1)
    tail = head[-1] * np.cumprod(ratios)
    basic = np.concatenate([head, tail]).astype(float)
    if law.family == "logcorrected":
        idx = np.arange(n_basic + 1, dtype=float)
        basic = basic * np.log(idx + math.e) ** law.logpow
        basic /= float(_logcorr_norm(law.alpha, law.logpow, 64))
    return np.concatenate([np.zeros(m), basic])


@lru_cache(maxsize=64)
def _tails(law: InterArrivalLaw, n_max: int, bits: int) -> tuple:
    fam = law.family
    if fam == "basic":
        return _basic_tails(law.alpha, n_max, bits)
    if fam == "shifted":
        m = law.shift
        base = _basic_tails(law.alpha, max(n_max - m, 0), bits)
        one = mpmath.mpf(1)
        return tuple(one if n < m else base[n - m] for n in range(n_max + 1))
    if fam == "logcorrected":
        ref = max(n_max, _LOGCORR_REF)
        raw = _logcorr_raw(law.alpha, law.logpow, ref, bits)
        z = _logcorr_norm(law.alpha, law.logpow, bits)
        with mpmath.workprec(bits + 16):
            acc = _logcorr_em_tail(law.alpha, law.logpow, ref, bits)
            out = [None] * (ref + 1)
            for n in range(ref, -1, -1):
                out[n] = acc / z
                acc += raw[n]
            return tuple(out[: n_max + 1])
    with mpmath.workprec(bits + 16):
        L = len(law.table)
        tails = [_fraction_to_mpf(_table_tail_fraction(law, n)) for n in range(min(n_max, L) + 1)]
        if n_max > L:
            if law.tail_ratio is None:
                tails.extend([mpmath.mpf(0)] * (n_max - L))
            else:
                q = _fraction_to_mpf(law.tail_ratio)
                for _ in range(L + 1, n_max + 1):
                    tails.append(tails[-1] * q)
        return tuple(tails)


# -- tilting ------------------------------------------------------------------


def truncation_point(law: InterArrivalLaw, b: float, bits: int) -> int:
    """Smallest (doubling) N whose analytic tail bound for both
    sum K(n) e^{-bn} and sum n K(n) e^{-bn} beyond N is below 2**-bits / 10.

    The bound is Kbar(N) e^{-b(N+1)} ((N+1) - N e^{-b}) / (1 - e^{-b})**2.
    """
    log_tol = -bits * math.log(2) - math.log(10)
    if law.family == "table" and law.tail_ratio is None:
        return len(law.table)
    N = 16
    while True:
        lt = law.log_tail(N)
        if lt == -math.inf:
            return N
        if b > 0:
            factor = math.log(N + 1) - 2 * math.log(-math.expm1(-b))
        else:
            # geometric-tailed table with b = 0
            q = float(law.tail_ratio)
            factor = math.log(N + 1) - 2 * math.log1p(-q)
        if lt - b * (N + 1) + factor < log_tol:
            return N
        N *= 2
        if N > 1 << 26:
            raise PrecisionError("series truncation point exceeds the resource limit")


def _closed_form_sums(law: InterArrivalLaw, b):
    """(sum K(n) e^{-bn}, sum n K(n) e^{-bn}) in closed form, or None."""
    w = mpmath.exp(-b)
    if law.family in ("basic", "shifted"):
        a = mpmath.mpf(law.alpha)
        one_minus = -mpmath.expm1(-b)
        s = 1 - one_minus**a
        s1 = a * w * one_minus ** (a - 1)
        if law.family == "shifted":
            m = law.shift
            wm = w**m
            return wm * s, wm * (s1 + m * s)
        return s, s1
    if law.family == "table":
        head = [_fraction_to_mpf(p) for p in law.table]
        L = len(head)
        s = mpmath.fsum(head[n - 1] * w**n for n in range(1, L + 1))
        s1 = mpmath.fsum(n * head[n - 1] * w**n for n in range(1, L + 1))
        if law.tail_ratio is not None:
            x = _fraction_to_mpf(law.tail_ratio) * w
            a = head[-1] * w**L
            s += a * x / (1 - x)
            s1 += a * (L * x / (1 - x) + x / (1 - x) ** 2)
        return s, s1
    return None


def _series_sums(law: InterArrivalLaw, b, bits: int, N: int):
    masses = _masses(law, N, bits)
    w = mpmath.exp(-b)
    terms = []
    x = mpmath.mpf(1)
    for n in range(1, N + 1):
        x *= w
        terms.append(masses[n] * x)
    s = mpmath.fsum(terms)
    s1 = mpmath.fsum(n * t for n, t in enumerate(terms, start=1))
    return s, s1


@dataclass(frozen=True)
class TiltedLaw:
    """K_b(n) = c_b K(n) exp(-b n) with cached normalisation and mean."""

    base: InterArrivalLaw
    b: float
    c_b: mpmath.mpf
    m_b: mpmath.mpf
    bits: int
    truncation: int | None
    series_checked: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def degenerate(self) -> bool:
        return self.m_b <= 1 + DEGENERATE_MEAN_EPS

    @property
    def mean(self) -> mpmath.mpf:
        return self.m_b

    @property
    def u_inf(self) -> mpmath.mpf:
        with mpmath.workprec(self.bits + 32):
            return 1 / self.m_b

    def with_bits(self, bits: int) -> "TiltedLaw":
        if bits <= self.bits:
            return self
        return tilt(self.base, self.b, PrecisionSpec(bits))

    def kb(self, n_max: int) -> list:
        """K_b(0..n_max) as mpf."""
        key = ("kb", n_max)
        if key not in self._cache:
            masses = _masses(self.base, n_max, self.bits)
            with mpmath.workprec(self.bits + 32):
                w = mpmath.exp(-mpmath.mpf(self.b))
                out = [mpmath.mpf(0)] * (n_max + 1)
                x = +self.c_b
                for n in range(1, n_max + 1):
                    x *= w
                    out[n] = masses[n] * x
            self._cache[key] = out
        return self._cache[key]

    def kbar_b(self, n_max: int) -> list:
        """Kbar_b(0..n_max) by backward accumulation, never 1 - partial sum."""
        key = ("kbar", n_max)
        if key not in self._cache:
            if self.truncation is None:
                raise PrecisionError("tail sums need a truncation point; b is too small")
            # the dropped tail is below 2**-bits relative to Kbar_b(n_max)
            top = n_max + self.truncation
            kb = self.kb(top)
            with mpmath.workprec(self.bits + 32):
                out = [mpmath.mpf(0)] * (top + 1)
                acc = mpmath.mpf(0)
                for n in range(top, -1, -1):
                    out[n] = acc
                    acc += kb[n]
            self._cache[key] = out[: n_max + 1]
        return self._cache[key]

    def kb_float(self, n_max: int) -> np.ndarray:
        return np.array([float(x) for x in self.kb(n_max)])

    def to_dict(self) -> dict:
        from .precision import decimal_string

        return {
            "law": self.base.to_dict(),
            "b": self.b,
            "c_b": decimal_string(self.c_b, self.bits),
            "m_b": decimal_string(self.m_b, self.bits),
            "bits": self.bits,
            "truncation": self.truncation,
            "series_checked": self.series_checked,
            "degenerate": self.degenerate,
        }


def tilt(law: InterArrivalLaw, b: float, precision: PrecisionSpec = PrecisionSpec()) -> TiltedLaw:
    """Tilt ``law`` by ``b``.

    Uses the closed form for c(b) and m_b when the family has one and checks it
    against the truncated series (when the truncation point is affordable);
    series only otherwise. b = 0 is accepted for finite-mean (table) laws.
    """
    if not (b >= 0) or math.isinf(float(b)):
        raise DomainError(f"tilt parameter b must be finite and >= 0, got {b}")
    if b == 0 and not law.finite_mean:
        raise DomainError("b = 0 requires a finite-mean law")
    bits = precision.resolve(float(b), 0)
    try:
        N = truncation_point(law, float(b), bits)
    except PrecisionError:
        if not law.has_closed_form:
            raise
        N = None
    with mpmath.workprec(bits + 32):
        bm = mpmath.mpf(b)
        closed = _closed_form_sums(law, bm)
        series = None
        if N is not None and (closed is None or N <= SERIES_CHECK_MAX_TERMS):
            if closed is None and N > SERIES_CHECK_MAX_TERMS:
                raise PrecisionError(
                    f"series for c(b) needs {N} terms at {bits} bits; no closed form available"
                )
            series = _series_sums(law, bm, bits, N)
        if closed is not None and series is not None:
            # 1e-10 relative at 64 bits, tightening with every extra bit
            tol = AGREEMENT_RTOL * unit(bits - 64)
            for cf, sr in zip(closed, series):
                if abs(cf - sr) > tol * abs(cf):
                    raise PrecisionError(
                        f"closed form and series disagree: {mpmath.nstr(cf, 20)} vs {mpmath.nstr(sr, 20)}"
                    )
        s, s1 = closed if closed is not None else series
        c_b = 1 / s
        m_b = s1 / s
    return TiltedLaw(law, b, c_b, m_b, bits, N, series_checked=series is not None)


def mu_density(tilted: TiltedLaw, n: int) -> mpmath.mpf:
    """mu_b(n) = Kbar_b(n) / m_b, a probability density on {0, 1, ...}."""
    if n < 0:
        raise DomainError("mu_b is supported on n >= 0")
    kbar = tilted.kbar_b(n)[n]
    with mpmath.workprec(tilted.bits + 32):
        return kbar / tilted.m_b


def mu_values(tilted: TiltedLaw, n_max: int) -> list:
    with mpmath.workprec(tilted.bits + 32):
        return [k / tilted.m_b for k in tilted.kbar_b(n_max)]


def normalizer(law: InterArrivalLaw, b: float) -> float:
    """sum_n K(n) exp(-b n) in double precision (closed form when available)."""
    with mpmath.workprec(64):
        closed = _closed_form_sums(law, mpmath.mpf(b))
        if closed is not None:
            return float(closed[0])
    return float(1 / tilt(law, b).c_b)


def free_energy(law: InterArrivalLaw, beta: float, tol: float = 1e-12) -> float:
    """Unique b > 0 with sum_n K(n) exp(-b n) = exp(-beta), by bisection."""
    if not beta > 0:
        raise DomainError(f"free energy requires beta > 0, got {beta}")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    target = math.exp(-beta)
    lo, hi = 0.0, 1.0
    while normalizer(law, hi) > target:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise DomainError("free energy bracket diverged")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if normalizer(law, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def require_nondegenerate(tilted: TiltedLaw) -> None:
    if tilted.degenerate:
        raise DegenerateLawError(
            f"law is degenerate (m_b = {mpmath.nstr(tilted.m_b, 15)}); correlations undefined"
        )
