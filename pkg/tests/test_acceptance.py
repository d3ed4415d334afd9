"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import mpmath
import pytest

from pinrate import (
    PrecisionSpec,
    count_zeros,
    critical_tilt,
    decay_rate,
    delta_series,
    fe_estimate,
    find_roots,
    free_energy,
    grad_ratio,
    make_basic_law,
    make_geometric_law,
    make_logcorrected_law,
    make_shifted_law,
    make_two_point_law,
    mc_sample,
    partition,
    rouche_scan,
    sharp_ratio,
    tilt,
    xi_scan,
)
from pinrate.asympt import cnw_hypotheses
from pinrate.renewal import exact_u_float
from pinrate.spectral import annulus_bounds, khat

SQRT2 = math.sqrt(2)
# closed forms evaluated independently of the package
B0_CLOSED = math.log(1.5 + SQRT2 - math.sqrt(SQRT2 + 1.25))


def z0_closed(b):
    return -0.5 * (1 + math.sqrt(8 * math.exp(b) * (1 - math.sqrt(1 - math.exp(-b))) - 3))


@pytest.fixture
def gate(capsys):
    def report(label, ok, detail, elapsed, budget):
        ok = ok and elapsed < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail} ({elapsed:.2f}s / {budget:.0f}s)")
        assert ok, f"{label}: {detail}"

    return report


def test_01_critical_tilt(gate):
    start = time.perf_counter()
    b0 = critical_tilt(make_shifted_law(0.5, 1), 0.01, 5.0, 1e-6)
    elapsed = time.perf_counter() - start
    ok = abs(b0 - 0.248399) < 1e-5 and abs(b0 - B0_CLOSED) < 1e-5
    gate("1 critical tilt", ok, f"b0={b0:.8f} closed={B0_CLOSED:.8f}", elapsed, 60)


def test_02_explicit_root(gate):
    start = time.perf_counter()
    t = tilt(make_shifted_law(0.5, 1), 0.5)
    roots = find_roots(t)
    elapsed = time.perf_counter() - start
    z_ref = z0_closed(0.5)
    ok = len(roots) == 1 and roots[0].z0.imag == 0
    if ok:
        r = roots[0]
        resid = abs(1 - khat(t, r.z0))
        ok = abs(r.z0.real - z_ref) < 1e-8 and r.residual < 1e-10 and resid < 1e-10
        detail = f"z0={r.z0.real:.12f} closed={z_ref:.12f} residual={r.residual:.1e}"
    else:
        detail = f"{len(roots)} roots"
    gate("2 explicit root", ok, detail, elapsed, 10)


def test_03_sharp_asymptotics(gate):
    start = time.perf_counter()
    t = tilt(make_basic_law(0.5), 0.5)
    s = delta_series(t, 1000, PrecisionSpec())
    r250 = sharp_ratio(s, t, 250)
    r1000 = sharp_ratio(s, t, 1000)
    elapsed = time.perf_counter() - start
    d250, d1000 = abs(r250 - 1), abs(r1000 - 1)
    ok = d1000 < 0.02 and d1000 < d250
    gate("3 sharp asymptotics", ok, f"ratio(250)={float(r250):.5f} ratio(1000)={float(r1000):.5f}", elapsed, 300)


@pytest.mark.parametrize("b", [0.25, 0.5])
def test_04_basic_rate(gate, b):
    start = time.perf_counter()
    rep = decay_rate(delta_series(tilt(make_basic_law(0.5), b), 2000))
    elapsed = time.perf_counter() - start
    gate(f"4 rate basic b={b}", abs(rep.rate - b) < 0.02 * b, f"rate={rep.rate:.6f}", elapsed, 300)


def test_04_shifted_rate(gate):
    start = time.perf_counter()
    t = tilt(make_shifted_law(0.5, 1), 0.5)
    rep = decay_rate(delta_series(t, 1000))
    elapsed = time.perf_counter() - start
    target = math.log(abs(z0_closed(0.5)))
    ok = abs(rep.rate - target) < 0.03 * target and rep.rate < 0.5
    gate("4 rate shifted b=0.5", ok, f"rate={rep.rate:.6f} log|z0|={target:.6f}", elapsed, 300)


def test_05_closed_form_examples(gate):
    start = time.perf_counter()
    two = delta_series(tilt(make_two_point_law(0.5), 0), 40)
    geo = delta_series(tilt(make_geometric_law(0.3), 0), 40)
    elapsed = time.perf_counter() - start
    err_two = max(abs(two.d[n] - mpmath.mpf(-0.5) ** n / 3) for n in range(41))
    err_geo = max(abs(geo.d[n]) for n in range(1, 41))
    ok = err_two < 1e-12 and err_geo < 1e-12
    gate("5 closed-form deltas", ok, f"two-point err={float(err_two):.1e} geometric max={float(err_geo):.1e}",
         elapsed, 1)


def test_06_correlation_length(gate):
    start = time.perf_counter()
    rows = xi_scan(make_basic_law(0.5), [0.4, 0.2, 0.1])
    elapsed = time.perf_counter() - start
    devs = [abs(r.b_times_xi - 1) for r in rows]
    ok = all(d < 0.1 for d in devs) and devs[0] > devs[1] > devs[2]
    gate("6 correlation length", ok, "b*xi=" + ", ".join(f"{r.b_times_xi:.4f}" for r in rows), elapsed, 600)


def test_07_identities(gate):
    start = time.perf_counter()
    t = tilt(make_basic_law(0.5), 0.5)
    chk = cnw_hypotheses(t, 500)
    s = delta_series(t, 500)
    g = grad_ratio(s, t, 500)
    elapsed = time.perf_counter() - start
    ok = chk.mu_ratio_rel_err < 0.01 and chk.conv_ratio_rel_err < 0.03 and abs(g - 1) < 0.03
    detail = (f"mu ratio err={chk.mu_ratio_rel_err:.4f} conv err={chk.conv_ratio_rel_err:.4f} "
              f"grad ratio={float(g):.4f}")
    gate("7 convolution identities", ok, detail, elapsed, 120)


MATRIX = [
    ("basic(0.5)", make_basic_law(0.5), 0.25, 0),
    ("basic(0.5)", make_basic_law(0.5), 0.5, 0),
    ("basic(0.5)", make_basic_law(0.5), 1.0, 0),
    ("basic(0.25)", make_basic_law(0.25), 0.5, 0),
    ("basic(0.75)", make_basic_law(0.75), 1.0, 0),
    ("shifted(0.5,1)", make_shifted_law(0.5, 1), 0.2, 0),
    ("shifted(0.5,1)", make_shifted_law(0.5, 1), 0.3, 1),
    ("shifted(0.5,1)", make_shifted_law(0.5, 1), 0.5, 1),
    ("shifted(0.5,3)", make_shifted_law(0.5, 3), 1.0, None),
    ("shifted(0.5,6)", make_shifted_law(0.5, 6), 1.0, None),
    ("logcorrected(0.5,1)", make_logcorrected_law(0.5, 1), 0.5, None),
    ("two-point(0.3)", make_two_point_law(0.3), 0.5, None),
]


def test_08_argument_principle(gate):
    start = time.perf_counter()
    lines, ok = [], True
    for name, law, b, expected in MATRIX:
        t = tilt(law, b)
        r_in, r_out = annulus_bounds(t)
        count = count_zeros(t, r_in, r_out).count
        found = len(find_roots(t, r_out, r_in))
        good = count == found and (expected is None or count == expected)
        ok &= good
        lines.append(f"{name}@{b}:{count}/{found}")
    elapsed = time.perf_counter() - start
    gate("8 argument principle", ok, " ".join(lines), elapsed, 120)


def test_09_rouche(gate):
    start = time.perf_counter()
    scan = rouche_scan(0.5, 1.0, m_max=30)
    elapsed = time.perf_counter() - start
    ok = scan.first_m is not None and scan.first_m <= 30
    gate("9 forced annulus zero", ok, f"first m={scan.first_m} r={scan.r:.4f}", elapsed, 300)


def test_10_pinning_free_energy(gate):
    start = time.perf_counter()
    law = make_basic_law(0.5)
    beta = 1.227947
    fe = free_energy(law, beta)
    est = fe_estimate(partition(law, beta, 2000))
    elapsed = time.perf_counter() - start
    bound = 3 * math.log(2000) / 2000
    ok = abs(est - fe) < bound and abs(fe - math.log(2)) < 1e-5
    gate("10 pinning free energy", ok, f"estimate={est:.6f} b(beta)={fe:.6f} bound={bound:.4f}", elapsed, 30)


def test_11_monte_carlo(gate):
    start = time.perf_counter()
    laws = {"two-point": tilt(make_two_point_law(0.5), 0), "basic(0.5) b=0.5": tilt(make_basic_law(0.5), 0.5)}
    worst, ok = 0.0, True
    for t in laws.values():
        exact = exact_u_float(t, 20)
        for seed in (1, 2, 3):
            est = mc_sample(t, 20, 10**6, seed)
            for n in (1, 5, 20):
                z = abs(est.u_hat[n] - exact[n]) / est.std_err[n] if est.std_err[n] > 0 else 0.0
                worst = max(worst, z)
                ok &= z < 4
    elapsed = time.perf_counter() - start
    gate("11 Monte Carlo consistency", ok, f"max |z-score|={worst:.2f}", elapsed, 120)
