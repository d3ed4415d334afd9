"""Complex-plane analysis of K_b: z-transforms, annulus zeros, critical tilt.

Evaluation is in double precision. Closed forms are used for the basic,
shifted and table families; the log-corrected family goes through the
truncated power series, whose tail is bounded by
c(b) Kbar(N) (|z| e^{-b})**(N+1) / (1 - |z| e^{-b}).

Fractional powers use the principal branch (cut along the negative real
axis of the base), so the closed form is discontinuous only on the real
half-line z > e^b.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import (
    ConvergenceError,
    CutLineError,
    DomainError,
    MismatchError,
    MultiplicityError,
    OnContourError,
    SingularityError,
)
from .laws import InterArrivalLaw, TiltedLaw, make_shifted_law, mu_values, tilt
from .precision import PrecisionSpec

EPS = np.finfo(float).eps
DEFAULT_MARGIN = 1e-4
CRITICAL_MARGIN = 1e-6
NEAR_ONE = 0.05
MAX_SAMPLES = 1 << 21
GRID = (24, 48)
DEDUP_DIST = 1e-8
SIMPLE_ROOT_MIN_DERIV = 1e-8


# -- evaluation ---------------------------------------------------------------


def _params(tilted: TiltedLaw):
    law = tilted.base
    b = float(tilted.b)
    return law, b, math.exp(-b), float(tilted.c_b)


def _one_minus(z, w):
    t = 1 - z * w
    # z = e^b lands a rounding error away from the branch point
    return np.where(np.abs(t) < 4 * EPS, 0, t)


def _check_cut(tilted: TiltedLaw, z) -> None:
    if tilted.base.family not in ("basic", "shifted"):
        return
    z = np.asarray(z, dtype=complex)
    limit = math.exp(float(tilted.b))
    on_cut = (np.abs(z.imag) <= 1e-15 * np.abs(z)) & (z.real > limit * (1 + 1e-15))
    if np.any(on_cut):
        raise CutLineError(f"z on the branch cut (real z > e^b = {limit:.6g})")


def _closed_khat(tilted: TiltedLaw, z, derivative: bool = False):
    law, b, w, c = _params(tilted)
    z = np.asarray(z, dtype=complex)
    if law.family in ("basic", "shifted"):
        a = law.alpha
        m = law.shift
        cb = c * math.exp(-b * m)  # c(b) of the unshifted law
        t = _one_minus(z, w)
        body = cb * (1 - t**a)
        if not derivative:
            return z**m * body if m else body
        with np.errstate(divide="ignore", invalid="ignore"):
            dbody = cb * a * w * t ** (a - 1)
        if not m:
            return dbody
        return m * z ** (m - 1) * body + z**m * dbody
    # table: polynomial head plus an optional geometric tail
    head = np.array([float(p) for p in law.table])
    L = len(head)
    n = np.arange(1, L + 1)
    coef = c * head * w**n
    poly = np.concatenate([[0.0], coef])
    if derivative:
        val = np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(poly))
    else:
        val = np.polynomial.polynomial.polyval(z, poly)
    if law.tail_ratio is not None:
        q = float(law.tail_ratio)
        C = c * head[-1] * w**L
        x = q * w * z
        if derivative:
            val = val + C * (L * z ** (L - 1) * x / (1 - x) + z**L * q * w / (1 - x) ** 2)
        else:
            val = val + C * z**L * x / (1 - x)
    return val


def _series_terms(tilted: TiltedLaw, radius: float, tol: float) -> int:
    law, b, w, c = _params(tilted)
    rho = radius * w
    if rho >= 1:
        raise DomainError(f"|z| = {radius:.6g} outside the disk of convergence |z| < e^b")
    N = 16
    while True:
        lt = law.log_tail(N)
        if lt == -math.inf:
            return N
        bound = math.log(c) + lt + (N + 1) * math.log(rho) - math.log1p(-rho) if rho > 0 else -math.inf
        if bound < math.log(tol):
            return N
        N *= 2
        if N > 1 << 22:
            raise DomainError("series evaluation too close to the radius of convergence")


def _series_coeffs(tilted: TiltedLaw, N: int) -> np.ndarray:
    key = ("coeffs", N)
    if key not in tilted._cache:
        _, b, _, c = _params(tilted)
        k = tilted.base.masses_float(N)
        n = np.arange(N + 1)
        tilted._cache[key] = c * k * np.exp(-b * n)
    return tilted._cache[key]


def _series_khat(tilted: TiltedLaw, z, tol: float, derivative: bool = False):
    z = np.asarray(z, dtype=complex)
    radius = float(np.max(np.abs(z))) if z.size else 0.0
    N = _series_terms(tilted, radius, tol)
    coef = _series_coeffs(tilted, N)
    if derivative:
        coef = np.polynomial.polynomial.polyder(coef)
    return np.polynomial.polynomial.polyval(z, coef)


def khat(tilted: TiltedLaw, z, tol: float = 1e-14, method: str = "auto"):
    """K_b-hat(z) = sum_n K_b(n) z**n.

    ``method`` is ``"closed"``, ``"series"`` or ``"auto"`` (closed form when the
    family has one). Accepts a scalar or an array of points.
    """
    scalar = np.ndim(z) == 0
    if method == "auto":
        method = "closed" if tilted.base.has_closed_form else "series"
    if method == "closed":
        if not tilted.base.has_closed_form:
            raise DomainError(f"no closed form for family {tilted.base.family!r}")
        _check_cut(tilted, z)
        out = _closed_khat(tilted, z)
    elif method == "series":
        out = _series_khat(tilted, z, tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    return complex(out) if scalar else out


def khat_prime(tilted: TiltedLaw, z, tol: float = 1e-14, method: str = "auto"):
    scalar = np.ndim(z) == 0
    if method == "auto":
        method = "closed" if tilted.base.has_closed_form else "series"
    if method == "closed":
        _check_cut(tilted, z)
        out = _closed_khat(tilted, z, derivative=True)
    else:
        out = _series_khat(tilted, z, tol, derivative=True)
    return complex(out) if scalar else out


def _delta_coefficients(tilted: TiltedLaw, z: complex) -> complex:
    from .renewal import delta_series

    n_max = 200
    while True:
        series = delta_series(tilted, n_max)
        d = np.array([float(x) for x in series.d])
        powers = z ** np.arange(n_max + 1)
        terms = d * powers
        total = terms.sum()
        if np.max(np.abs(terms[-10:])) < 1e-17 * max(1.0, abs(total)):
            return complex(total)
        n_max *= 2
        if n_max > 16000:
            raise ConvergenceError("delta series partial sums did not settle near z = 1")


def delta_transform(tilted: TiltedLaw, z: complex) -> complex:
    """Delta_b(z) = 1/(1 - K_b-hat(z)) - 1/(m_b (1 - z)).

    Within 0.05 of the removable singularity at z = 1 the partial sums of
    the delta sequence are used instead.
    """
    z = complex(z)
    if abs(z - 1) < NEAR_ONE:
        return _delta_coefficients(tilted, z)
    if not tilted.base.has_closed_form and abs(z) >= math.exp(float(tilted.b)):
        raise DomainError("series-only law: |z| must be below e^b")
    k = khat(tilted, z)
    denom = 1 - k
    if abs(denom) < 1e-13 * max(1.0, abs(k)):
        raise SingularityError(f"1 - K_b-hat vanishes at z = {z}")
    return 1 / denom - 1 / (float(tilted.m_b) * (1 - z))


@dataclass(frozen=True)
class GrubelCheck:
    muhat_series: complex | None
    muhat_closed: complex
    series_tail_bound: float | None
    grad_u_hat: complex
    residual: float


def muhat_closed(tilted: TiltedLaw, z: complex) -> complex:
    """mu_b-hat(z) = (1 - K_b-hat(z)) / (m_b (1 - z))."""
    z = complex(z)
    if z == 1:
        raise SingularityError("mu-hat closed form is singular at z = 1")
    return (1 - khat(tilted, z)) / (float(tilted.m_b) * (1 - z))


def muhat_series(tilted: TiltedLaw, z: complex, tol: float = 1e-15) -> tuple[complex, float]:
    """Truncated sum of mu_b(n) z**n and its rigorous tail bound."""
    law, b, w, c = _params(tilted)
    rho = abs(z) * w
    if rho >= 1:
        raise DomainError("mu-hat series needs |z| < e^b")
    m = float(tilted.m_b)
    N = 16
    while True:
        lt = law.log_tail(N)
        bound = 0.0 if lt == -math.inf else math.exp(
            math.log(c / m) + lt + math.log(w) + (N + 1) * math.log(rho) - math.log1p(-rho)
        ) if rho > 0 else 0.0
        if bound < tol:
            break
        N *= 2
    mu = np.array([float(x) for x in mu_values(tilted, N)])
    return complex(np.polynomial.polynomial.polyval(complex(z), mu)), bound


def muhat_and_grubel_check(tilted: TiltedLaw, z: complex, n_terms: int = 500) -> GrubelCheck:
    """mu_b-hat(z) two ways plus |grad-u-hat(z) - phi_b(mu_b-hat(z))|, phi_b(w) = 1/(m_b w)."""
    from .renewal import delta_series

    z = complex(z)
    if z == 0 or z == 1:
        raise SingularityError("the identity check is singular at z = 0 and z = 1")
    closed = muhat_closed(tilted, z)
    series = bound = None
    if abs(z) * math.exp(-float(tilted.b)) < 1:
        series, bound = muhat_series(tilted, z)
    ds = delta_series(tilted, n_terms)
    grad = np.array([float(x) for x in ds.grad_u])
    grad_hat = complex(np.polynomial.polynomial.polyval(z, grad))
    phi = 1 / (float(tilted.m_b) * closed)
    return GrubelCheck(series, closed, bound, grad_hat, abs(grad_hat - phi))


# -- argument principle ---------------------------------------------------------


@dataclass(frozen=True)
class AnnulusCount:
    r_in: float
    r_out: float
    count: int
    winding_samples: int
    winding_in: int = 0
    winding_out: int = 0

    def to_dict(self) -> dict:
        return {
            "r_in": repr(self.r_in),
            "r_out": repr(self.r_out),
            "count": self.count,
            "winding_samples": self.winding_samples,
            "winding_in": self.winding_in,
            "winding_out": self.winding_out,
        }


def _circle_values(tilted: TiltedLaw, r: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    """K_b-hat at z = r exp(2 pi i k / M), k = 0..M-1."""
    theta = 2 * np.pi * np.arange(M) / M
    z = r * np.exp(1j * theta)
    if tilted.base.has_closed_form:
        return z, _closed_khat(tilted, z)
    N = _series_terms(tilted, r, 1e-15)
    _, b, _, c = _params(tilted)
    # K_b(n) r^n with the radius folded into the exponent; r^n alone overflows near e^b
    coef = c * tilted.base.masses_float(N) * np.exp(np.arange(N + 1) * (math.log(r) - b))
    # fold the coefficients modulo M, then one inverse FFT evaluates all samples
    folded = np.zeros(M, dtype=complex)
    np.add.at(folded, np.arange(N + 1) % M, coef)
    return z, np.fft.ifft(folded) * M


def winding_number(tilted: TiltedLaw, r: float, max_samples: int = MAX_SAMPLES) -> tuple[int, int]:
    """Winding of 1 - K_b-hat around 0 on |z| = r, and the samples used.

    The sample count doubles until every consecutive argument increment is
    below pi/2.
    """
    M = 256
    while True:
        _, k = _circle_values(tilted, r, M)
        f = 1 - k
        err = 64 * EPS * (1 + np.abs(k))
        if np.min(np.abs(f) / err) <= 10:
            i = int(np.argmin(np.abs(f) / err))
            raise OnContourError(
                f"1 - K_b-hat nearly vanishes on |z| = {r:.12g} at arg {2 * np.pi * i / M:.6g}"
            )
        closed = np.append(f, f[0])
        steps = np.angle(closed[1:] / closed[:-1])
        if np.max(np.abs(steps)) < np.pi / 2:
            total = steps.sum() / (2 * np.pi)
            w = int(round(total))
            if abs(total - w) > 1e-6:
                raise ConvergenceError(f"non-integer winding {total} on |z| = {r}")
            return w, M
        M *= 2
        if M > max_samples:
            raise ConvergenceError(f"winding on |z| = {r} needs more than {max_samples} samples")


def count_zeros(
    tilted: TiltedLaw, r_in: float, r_out: float, max_samples: int = MAX_SAMPLES
) -> AnnulusCount:
    """Zeros of 1 - K_b-hat strictly inside r_in < |z| < r_out.

    Windings on the two circles are subtracted; the simple zero at z = 1 lies
    inside both and cancels.
    """
    limit = math.exp(float(tilted.b))
    if not (1 < r_in < r_out):
        raise DomainError(f"need 1 < r_in < r_out, got {r_in}, {r_out}")
    if r_out > limit * (1 + 1e-12):
        raise DomainError(f"r_out = {r_out} exceeds e^b = {limit}")
    w_in, m_in = winding_number(tilted, r_in, max_samples)
    w_out, m_out = winding_number(tilted, r_out, max_samples)
    return AnnulusCount(r_in, r_out, w_out - w_in, m_in + m_out, w_in, w_out)


def annulus_bounds(tilted: TiltedLaw, margin: float = DEFAULT_MARGIN) -> tuple[float, float]:
    """(1 + eps, e^b - eps) with eps = margin * b."""
    b = float(tilted.b)
    eps = margin * b
    return 1 + eps, math.exp(b) - eps


# -- roots ----------------------------------------------------------------------


@dataclass(frozen=True)
class RootReport:
    z0: complex
    modulus: float
    khat_derivative: complex
    pole_coefficient: complex
    residual: float

    @property
    def is_real(self) -> bool:
        return self.z0.imag == 0

    def to_dict(self) -> dict:
        return {
            "z0": {"re": repr(self.z0.real), "im": repr(self.z0.imag)},
            "modulus": repr(self.modulus),
            "khat_derivative": {"re": repr(self.khat_derivative.real), "im": repr(self.khat_derivative.imag)},
            "pole_coefficient": {"re": repr(self.pole_coefficient.real), "im": repr(self.pole_coefficient.imag)},
            "residual": repr(self.residual),
        }


def _newton(tilted: TiltedLaw, z: np.ndarray, r_max: float, iters: int = 80) -> np.ndarray:
    z = z.astype(complex)
    step_cap = 0.25 * r_max
    for _ in range(iters):
        alive = np.isfinite(z)
        if not alive.any():
            break
        za = z[alive]
        with np.errstate(all="ignore"):
            f = 1 - _eval(tilted, za)
            fp = -_eval(tilted, za, derivative=True)
            step = f / fp
        big = np.abs(step) > step_cap
        step[big] = step[big] / np.abs(step[big]) * step_cap
        za = za - step
        # leaving the disk (or landing on the cut) ends the run for that seed
        za[~np.isfinite(za) | (np.abs(za) > r_max)] = np.nan
        z[alive] = za
    return z


def _eval(tilted: TiltedLaw, z, derivative: bool = False):
    if tilted.base.has_closed_form:
        return _closed_khat(tilted, z, derivative)
    return _series_khat(tilted, z, 1e-15, derivative)


def _polish(tilted: TiltedLaw, z: complex) -> complex:
    for _ in range(8):
        f = 1 - complex(_eval(tilted, z))
        fp = -complex(_eval(tilted, z, derivative=True))
        if fp == 0:
            break
        step = f / fp
        z = z - step
        if abs(step) < 1e-16 * max(1.0, abs(z)):
            break
    if abs(z.imag) < 1e-12 * abs(z):
        z = complex(z.real, 0.0)
    return z


def _sorted_unique(points: list[complex]) -> list[complex]:
    out: list[complex] = []
    for z in sorted(points, key=lambda p: (abs(p), cmath.phase(p))):
        if all(abs(z - y) >= DEDUP_DIST for y in out):
            out.append(z)
    return out


def _report(tilted: TiltedLaw, z: complex) -> RootReport:
    kp = complex(_eval(tilted, z, derivative=True))
    residual = abs(1 - complex(_eval(tilted, z)))
    return RootReport(z, abs(z), kp, 1 / (z * kp), residual)


def find_roots(
    tilted: TiltedLaw,
    r_out: float | None = None,
    r_in: float | None = None,
    grid: tuple[int, int] = GRID,
    margin: float = DEFAULT_MARGIN,
) -> list[RootReport]:
    """Zeros of 1 - K_b-hat in the annulus, Newton-refined from a polar grid.

    The grid is doubled (twice at most) until the refined set matches the
    argument-principle count.
    """
    lo, hi = annulus_bounds(tilted, margin)
    r_in = lo if r_in is None else r_in
    r_out = hi if r_out is None else r_out
    expected = count_zeros(tilted, r_in, r_out).count
    if expected == 0:
        return []
    n_r, n_theta = grid
    for _ in range(3):
        radii = np.linspace(r_in, r_out, n_r + 2)[1:-1]
        theta = np.pi * (2 * np.arange(n_theta) + 1) / n_theta
        seeds = (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
        seeds = np.concatenate([seeds, radii, -radii])
        z = _newton(tilted, seeds, r_out)
        z = z[np.isfinite(z)]
        with np.errstate(all="ignore"):
            ok = np.abs(1 - _eval(tilted, z)) < 1e-9
        candidates = [_polish(tilted, complex(p)) for p in z[ok]]
        candidates = [p for p in candidates if r_in < abs(p) < r_out]
        candidates += [p.conjugate() for p in candidates if p.imag != 0]
        roots = _sorted_unique(candidates)
        if len(roots) == expected:
            return [_report(tilted, p) for p in roots]
        n_r, n_theta = 2 * n_r, 2 * n_theta
    raise MismatchError(f"found {len(roots)} roots but the argument principle counts {expected}")


# -- critical tilt ------------------------------------------------------------------


def has_annulus_zero(law: InterArrivalLaw, b: float, margin: float = CRITICAL_MARGIN) -> bool:
    t = tilt(law, b, PrecisionSpec(64))
    r_in, r_out = annulus_bounds(t, margin)
    return count_zeros(t, r_in, r_out).count >= 1


def critical_tilt(
    law: InterArrivalLaw,
    b_lo: float,
    b_hi: float,
    tol: float = 1e-6,
    margin: float = CRITICAL_MARGIN,
) -> float:
    """Bisection for b0, the smallest b with a zero of 1 - K_b-hat in 1 < |z| <= e^b.

    ``b_hi`` acts as the ceiling: if no annulus zero exists there, ``inf`` is
    returned. The annulus edges are kept ``margin * b`` away from |z| = 1 and
    |z| = e^b.
    """
    if not (0 < b_lo < b_hi):
        raise DomainError(f"need 0 < b_lo < b_hi, got {b_lo}, {b_hi}")
    if not has_annulus_zero(law, b_hi, margin):
        return math.inf
    if has_annulus_zero(law, b_lo, margin):
        raise DomainError(f"annulus-zero predicate is already true at b_lo = {b_lo}")
    lo, hi = b_lo, b_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            found = has_annulus_zero(law, mid, margin)
        except OnContourError:
            # the zero sits on the outer circle: mid is b0 to working accuracy
            return mid
        if found:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def explicit_z0(b: float) -> float:
    """Closed-form nontrivial zero for the shifted law with alpha = 1/2, m = 1."""
    return -0.5 * (1 + math.sqrt(8 * math.exp(b) * (1 - math.sqrt(-math.expm1(-b))) - 3))


def explicit_b0() -> float:
    """Closed-form critical tilt for the shifted law with alpha = 1/2, m = 1."""
    return math.log(1.5 + math.sqrt(2) - math.sqrt(math.sqrt(2) + 1.25))


# -- pole asymptotics -----------------------------------------------------------------


@dataclass(frozen=True)
class PoleTerm:
    """|z0|**-n (c1 cos(n arg z0) + c2 sin(n arg z0)) for a root or conjugate pair."""

    modulus: float
    angle: float
    c1: float
    c2: float


def leading_poles(roots: list[RootReport], rtol: float = 1e-9) -> list[PoleTerm]:
    if not roots:
        return []
    r_min = min(r.modulus for r in roots)
    terms = []
    for r in roots:
        if r.modulus > r_min * (1 + rtol):
            continue
        if abs(r.khat_derivative) < SIMPLE_ROOT_MIN_DERIV:
            raise MultiplicityError(f"root {r.z0} is not simple (|K'| = {abs(r.khat_derivative):.3g})")
        if r.z0.imag < 0:
            continue  # folded into its conjugate
        coef = r.pole_coefficient
        angle = cmath.phase(r.z0)
        if r.z0.imag == 0:
            terms.append(PoleTerm(r.modulus, angle, coef.real, 0.0))
        else:
            terms.append(PoleTerm(r.modulus, angle, 2 * coef.real, 2 * coef.imag))
    return terms


def pole_asymptote(roots: list[RootReport], n: int) -> mpmath.mpf:
    """Predicted leading behaviour of d(n) from the minimal-modulus poles."""
    total = mpmath.mpf(0)
    for t in leading_poles(roots):
        total += mpmath.mpf(t.modulus) ** (-n) * (
            t.c1 * mpmath.cos(n * t.angle) + t.c2 * mpmath.sin(n * t.angle)
        )
    return total


# -- Rouche realisation -------------------------------------------------------------------


@dataclass
class RoucheScan:
    alpha: float
    b: float
    r: float
    x_r: float
    m_bound: int
    first_m: int | None
    counts: dict = field(default_factory=dict)


def rouche_scan(
    alpha: float, b: float, r: float | None = None, m_max: int = 30, margin: float = DEFAULT_MARGIN
) -> RoucheScan:
    """Scan shifts m = 1..m_max for zeros of 1 - K_b-hat in 1 < |z| < r.

    Also reports x_r = min_theta |normalised basic K_b-hat(r e^{i theta})| and
    the smallest m with r**m x_r > 1, beyond which exactly m annulus zeros
    are guaranteed.
    """
    limit = math.exp(b)
    if r is None:
        r = 0.5 * (1 + limit)
    if not (1 < r < limit):
        raise DomainError(f"need 1 < r < e^b, got {r}")
    theta = np.linspace(0, 2 * np.pi, 1 << 14, endpoint=False)
    z = r * np.exp(1j * theta)
    base = (1 - (1 - z / limit) ** alpha) / (1 - (1 - 1 / limit) ** alpha)
    x_r = float(np.min(np.abs(base)))
    m_bound = max(1, math.floor(-math.log(x_r) / math.log(r)) + 1)
    scan = RoucheScan(alpha, b, r, x_r, m_bound, None)
    r_in = 1 + margin * b
    for m in range(1, m_max + 1):
        count = count_zeros(tilt(make_shifted_law(alpha, m), b, PrecisionSpec(64)), r_in, r).count
        scan.counts[m] = count
        if count >= 1 and scan.first_m is None:
            scan.first_m = m
    return scan
