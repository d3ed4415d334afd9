import math

import numpy as np
import pytest

from pinrate import (
    contact_fraction,
    fe_estimate,
    free_energy,
    make_basic_law,
    make_shifted_law,
    make_two_point_law,
    mass_renewal,
    partition,
    tilt,
)
from pinrate.errors import DomainError, PrecisionError


def brute_partition(probs, beta, N):
    """Enumerate every renewal configuration on (0, N] for a finite law."""
    k = dict(enumerate(probs, start=1))
    kbar = [1 - sum(probs[:n]) for n in range(N + 1)]
    total = 0.0

    def walk(pos, weight):
        nonlocal total
        total += weight * max(kbar[N - pos], 0.0)
        for step, p in k.items():
            if pos + step <= N:
                walk(pos + step, weight * p * math.exp(beta))

    walk(0, 1.0)
    return total


def test_small_volume_brute_force():
    probs = [0.3, 0.5, 0.2]
    from pinrate import make_table_law

    law = make_table_law(probs)
    for N in (1, 4, 9):
        table = partition(law, 0.7, N)
        assert abs(math.exp(table.log_Z[N]) / brute_partition(probs, 0.7, N) - 1) < 1e-12
    table = partition(law, 0.7, 1)
    assert abs(math.exp(table.log_Zc[1]) - math.exp(0.7) * 0.3) < 1e-15


def test_beta_zero_collapse():
    law = make_basic_law(0.5)
    table = partition(law, 0.0, 500)
    assert np.max(np.abs(table.log_Z)) < 1e-12
    assert fe_estimate(table) == pytest.approx(0.0, abs=1e-14)
    two = make_two_point_law(0.5)
    zc = np.exp(partition(two, 0.0, 30).log_Zc)
    u = [float(x) for x in mass_renewal(tilt(two, 0), 30).u]
    assert np.allclose(zc, u, rtol=1e-13)


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.227947])
def test_free_energy_agreement(beta):
    law = make_basic_law(0.5)
    N = 2000
    est = fe_estimate(partition(law, beta, N))
    assert abs(est - free_energy(law, beta)) < 3 * math.log(N) / N


def test_fe_volume_convergence():
    law = make_basic_law(0.5)
    beta = math.log(2 + math.sqrt(2))
    exact = free_energy(law, beta)
    assert abs(free_energy(law, beta) - math.log(2)) < 1e-11
    e100 = abs(fe_estimate(partition(law, beta, 100)) - exact)
    e2000 = abs(fe_estimate(partition(law, beta, 2000)) - exact)
    assert e2000 < e100


def test_table_invariants_and_monotone_beta():
    law = make_basic_law(0.5)
    lo, hi = partition(law, 0.5, 300), partition(law, 0.6, 300)
    assert lo.log_Zc[0] == 0 and np.all(np.isfinite(lo.log_Zc))
    assert np.all(lo.log_Z >= lo.log_Zc - 1e-12)
    assert hi.log_Z[300] > lo.log_Z[300]


def test_contact_fraction_dense_limit():
    assert abs(contact_fraction(make_basic_law(0.5), 8.0, 500) - 1.0) < 0.05
    assert abs(contact_fraction(make_shifted_law(0.5, 2), 8.0, 500) - 1 / 3) < 0.05 / 3


def test_contact_fraction_free_phase():
    law = make_basic_law(0.5)
    small, large = contact_fraction(law, 0.0, 500), contact_fraction(law, 0.0, 2000)
    assert 0 < large < small < 0.1


def test_contact_fraction_thermodynamic():
    law = make_basic_law(0.5)
    h = 1e-4
    slope = (free_energy(law, 1 + h) - free_energy(law, 1 - h)) / (2 * h)
    assert abs(contact_fraction(law, 1.0, 2000) / slope - 1) < 0.1


def test_guards():
    law = make_basic_law(0.5)
    with pytest.raises(DomainError):
        partition(law, 1.0, 0)
    with pytest.raises(DomainError):
        fe_estimate(partition(law, 1.0, 50))
    with pytest.raises(PrecisionError):
        contact_fraction(law, 1.0, 200, h=1e-16)


def test_csv():
    text = partition(make_basic_law(0.5), 1.0, 10).to_csv()
    lines = text.split("\n")
    assert lines[0] == "n,log_Zc,log_Z" and len(lines) == 13 and lines[-1] == ""
