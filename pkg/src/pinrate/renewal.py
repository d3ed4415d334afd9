"""Mass renewal function, delta sequence and a Monte Carlo cross-check.

Both recursions run in exact integer fixed point with ``bits`` fractional
bits: every value v is held as round(v * 2**bits). Products of two such
integers are exact, so the only rounding is one shift per step.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from operator import mul

import mpmath
import numpy as np

from .errors import DomainError, PrecisionError
from .laws import TiltedLaw
from .precision import PrecisionSpec, decimal_string, from_fixed_int, required_bits, to_fixed_int, unit

MC_TAIL_CUTOFF = 1e-15
MC_CHUNK = 1 << 15


@dataclass
class RenewalSeries:
    """u(0..n_max), d(n) = u(n) - u_inf and grad u(n) = u(n) - u(n-1)."""

    tilted: TiltedLaw
    n_max: int
    u: list
    u_inf: mpmath.mpf
    d: list
    grad_u: list
    precision_bits: int
    method: str

    @property
    def unit(self) -> mpmath.mpf:
        return unit(self.precision_bits)

    @property
    def floor(self) -> mpmath.mpf:
        """Values of |d| below this are indistinguishable from rounding noise."""
        return 1000 * self.unit * max(1, self.n_max)

    def log_abs_d(self) -> np.ndarray:
        out = np.full(self.n_max + 1, -np.inf)
        for n, x in enumerate(self.d):
            if x != 0:
                out[n] = float(mpmath.log(abs(x)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "u", "d", "grad_u"])
        bits = self.precision_bits
        for n in range(self.n_max + 1):
            writer.writerow(
                [n, decimal_string(self.u[n], bits), decimal_string(self.d[n], bits),
                 decimal_string(self.grad_u[n], bits)]
            )
        return buf.getvalue()


def _prepare(tilted: TiltedLaw, n_max: int, precision: PrecisionSpec) -> tuple[TiltedLaw, int]:
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    b = float(tilted.b)
    bits = precision.resolve(b, n_max)
    if bits < required_bits(b, n_max):
        raise PrecisionError(
            f"{bits} bits cannot resolve |u(n) - u_inf| ~ exp(-{b} n) up to n = {n_max}; "
            f"need at least {required_bits(b, n_max)}"
        )
    return tilted.with_bits(bits), bits


def _to_mpf_list(values: list[int], bits: int) -> list:
    return [from_fixed_int(v, bits) for v in values]


def _convolve_step(hist: list[int], rev_k: list[int], n: int, n_max: int) -> int:
    # sum_{j<n} hist[j] * K(n - j); rev_k[i] = K(n_max - i)
    return sum(map(mul, hist, rev_k[n_max - n:n_max]))


def mass_renewal(
    tilted: TiltedLaw, n_max: int, precision: PrecisionSpec = PrecisionSpec()
) -> RenewalSeries:
    """u(n) = 1{n=0} + sum_{j<n} u(j) K_b(n-j), the direct path."""
    tilted, bits = _prepare(tilted, n_max, precision)
    half = 1 << (bits - 1)
    k_fixed = [to_fixed_int(x, bits) for x in tilted.kb(n_max)]
    rev_k = k_fixed[::-1]
    u = [1 << bits]
    for n in range(1, n_max + 1):
        u.append((_convolve_step(u, rev_k, n, n_max) + half) >> bits)
    u_inf = to_fixed_int(tilted.u_inf, bits)
    d = [x - u_inf for x in u]
    grad = [u[0]] + [u[n] - u[n - 1] for n in range(1, n_max + 1)]
    return RenewalSeries(
        tilted, n_max, _to_mpf_list(u, bits), from_fixed_int(u_inf, bits),
        _to_mpf_list(d, bits), _to_mpf_list(grad, bits), bits, "direct",
    )


def delta_series(
    tilted: TiltedLaw, n_max: int, precision: PrecisionSpec = PrecisionSpec()
) -> RenewalSeries:
    """d(n) = u(n) - u_inf from the subtracted recursion.

    Substituting u = u_inf + d into the renewal equation gives
    d(0) = 1 - u_inf and d(n) = sum_{j<n} d(j) K_b(n-j) - u_inf Kbar_b(n),
    which never forms the difference of two nearly equal numbers.
    """
    tilted, bits = _prepare(tilted, n_max, precision)
    half = 1 << (bits - 1)
    k_fixed = [to_fixed_int(x, bits) for x in tilted.kb(n_max)]
    kbar_fixed = [to_fixed_int(x, bits) for x in tilted.kbar_b(n_max)]
    rev_k = k_fixed[::-1]
    u_inf = to_fixed_int(tilted.u_inf, bits)
    d = [(1 << bits) - u_inf]
    for n in range(1, n_max + 1):
        acc = _convolve_step(d, rev_k, n, n_max) - u_inf * kbar_fixed[n]
        d.append((acc + half) >> bits)
    u = [x + u_inf for x in d]
    grad = [u[0]] + [d[n] - d[n - 1] for n in range(1, n_max + 1)]
    return RenewalSeries(
        tilted, n_max, _to_mpf_list(u, bits), from_fixed_int(u_inf, bits),
        _to_mpf_list(d, bits), _to_mpf_list(grad, bits), bits, "subtracted",
    )


# -- Monte Carlo ---------------------------------------------------------------


@dataclass
class MCEstimate:
    u_hat: np.ndarray
    std_err: np.ndarray
    n_paths: int
    seed: int
    horizon: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "u_hat", "std_err"])
        for n in range(self.horizon + 1):
            writer.writerow([n, repr(float(self.u_hat[n])), repr(float(self.std_err[n]))])
        return buf.getvalue()


def sampling_cdf(tilted: TiltedLaw) -> np.ndarray:
    """CDF of K_b cut where the tail drops below 1e-15, renormalised."""
    n = max(tilted.truncation or 0, 16)
    while True:
        kbar = tilted.kbar_b(n)
        below = [i for i in range(1, n + 1) if kbar[i] < MC_TAIL_CUTOFF]
        if below:
            cut = below[0]
            break
        n *= 2
    probs = tilted.kb_float(cut)[1:]
    cdf = np.cumsum(probs / probs.sum())
    cdf[-1] = 1.0
    return cdf


def _simulate_chunk(cdf: np.ndarray, horizon: int, n_paths: int, seed_seq) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    counts = np.zeros(horizon + 1, dtype=np.int64)
    pos = np.zeros(n_paths, dtype=np.int64)
    while True:
        pos += np.searchsorted(cdf, rng.random(n_paths), side="right") + 1
        hit = pos[pos <= horizon]
        if hit.size == 0:
            return counts
        counts += np.bincount(hit, minlength=horizon + 1)


def mc_sample(
    tilted: TiltedLaw, horizon: int, n_paths: int, seed: int, workers: int = 1
) -> MCEstimate:
    """Fraction of simulated renewal paths visiting each n in [0, horizon].

    Paths are split into fixed chunks of 2**15, each driven by its own child of
    ``SeedSequence(seed)``, so the result does not depend on ``workers``.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")
    cdf = sampling_cdf(tilted)
    sizes = [MC_CHUNK] * (n_paths // MC_CHUNK)
    if n_paths % MC_CHUNK:
        sizes.append(n_paths % MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, children))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _simulate_chunk(cdf, horizon, *job), jobs))
    else:
        parts = [_simulate_chunk(cdf, horizon, *job) for job in jobs]
    counts = np.sum(parts, axis=0)
    counts[0] = n_paths
    u_hat = counts / n_paths
    std_err = np.sqrt(u_hat * (1 - u_hat) / n_paths)
    return MCEstimate(u_hat, std_err, n_paths, seed, horizon)


def exact_u_float(tilted: TiltedLaw, horizon: int) -> np.ndarray:
    """u(0..horizon) in double precision, for comparisons with sampling."""
    series = mass_renewal(tilted, horizon, PrecisionSpec(max(64, math.ceil(horizon * 2) + 64)))
    return np.array([float(x) for x in series.u])
