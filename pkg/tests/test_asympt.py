import math

import mpmath
import pytest

from pinrate import (
    PrecisionError,
    cnw_hypotheses,
    correlation_fn,
    correlation_length,
    decay_rate,
    delta_series,
    find_roots,
    grad_ratio,
    make_basic_law,
    make_geometric_law,
    make_shifted_law,
    make_table_law,
    make_two_point_law,
    sharp_ratio,
    tilt,
    xi_scan,
)
from pinrate.asympt import XI_COLUMNS, default_window, xi_rows_to_csv
from pinrate.errors import DegenerateLawError, InsufficientDataError


@pytest.fixture(scope="module")
def basic_series():
    return delta_series(tilt(make_basic_law(0.5), 0.5), 1000)


def test_basic_rate(basic_series):
    rep = decay_rate(basic_series, (200, 800))
    assert abs(rep.rate - 0.5) < 0.01
    assert not rep.oscillatory and rep.fit_r2 > 0.99
    assert default_window(1000) == (250, 750)


def test_two_point_rate():
    s = delta_series(tilt(make_two_point_law(0.5), 0), 200)
    rep = decay_rate(s)
    assert abs(rep.rate - math.log(2)) < 1e-6 and rep.oscillatory


@pytest.mark.parametrize("b", [0.3, 0.5])
def test_shifted_rate_matches_root(b):
    t = tilt(make_shifted_law(0.5, 1), b)
    log_mod = math.log(find_roots(t)[0].modulus)
    rep = decay_rate(delta_series(t, 600))
    assert abs(rep.rate - log_mod) < 0.03 * log_mod
    assert rep.rate < b and rep.oscillatory


def test_rate_floor_errors():
    s = delta_series(tilt(make_geometric_law(0.3), 0), 200)
    with pytest.raises(PrecisionError):
        decay_rate(s)
    s = delta_series(tilt(make_basic_law(0.5), 0.5), 40)
    with pytest.raises(InsufficientDataError):
        decay_rate(s, (10, 20))


def test_sharp_ratio_trend(basic_series):
    t = tilt(make_basic_law(0.5), 0.5)
    devs = [abs(sharp_ratio(basic_series, t, n) - 1) for n in (250, 500, 1000)]
    assert devs[2] < 0.02
    assert devs[0] > devs[1] > devs[2]


def test_sharp_ratio_geometric_zero():
    s = delta_series(tilt(make_geometric_law(0.3), 0.2), 50)
    assert sharp_ratio(s, None, 30) == 0


def test_grad_ratio(basic_series):
    assert abs(grad_ratio(basic_series, None, 1000) - 1) < 0.03
    assert all(basic_series.grad_u[n] < 0 for n in range(100, 1001, 50))
    short = delta_series(tilt(make_two_point_law(0.5), 0.5), 60)
    with pytest.raises(PrecisionError):
        grad_ratio(short, None, 30)


def test_cnw():
    chk = cnw_hypotheses(tilt(make_basic_law(0.5), 0.5), 500)
    assert chk.mu_ratio_rel_err < 0.01
    assert chk.conv_ratio_rel_err < 0.03


def test_correlation_fn():
    s = delta_series(tilt(make_basic_law(0.5), 0.7), 50)
    with mpmath.workprec(s.precision_bits):
        assert abs(correlation_fn(s, None, 0) - 1) < 10 * s.unit
    two = delta_series(tilt(make_two_point_law(0.5), 0), 10)
    assert abs(correlation_fn(two, None, 1) + 0.5) < 1e-18
    deg = delta_series(tilt(make_table_law([1.0]), 0), 10)
    with pytest.raises(DegenerateLawError):
        correlation_fn(deg, None, 1)


def test_correlation_length():
    law = make_basic_law(0.5)
    xi = correlation_length(law, 0.1, 2000)
    assert abs(xi - 10) < 0.5
    xi2 = correlation_length(law, 0.2, 1200)
    assert abs(xi / xi2 - 2) < 0.1
    assert abs(correlation_length(make_two_point_law(0.5), 0, 200) - 1 / math.log(2)) < 1e-6


def test_xi_scan_basic():
    rows = xi_scan(make_basic_law(0.5), [0.4, 0.2, 0.1])
    devs = [abs(r.b_times_xi - 1) for r in rows]
    assert all(d < 0.1 for d in devs)
    assert devs[0] > devs[1] > devs[2]
    text = xi_rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(XI_COLUMNS)
    assert len(text.splitlines()) == 4


def test_xi_scan_above_critical():
    rows = xi_scan(make_shifted_law(0.5, 1), [0.5], n_max_rule=lambda b: 600)
    log_mod = -math.log(1 / 1.1921353359849494)
    assert abs(rows[0].b_times_xi - 0.5 / log_mod) < 0.03 * 0.5 / log_mod


def test_xi_scan_empty():
    assert xi_scan(make_basic_law(0.5), []) == []


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("b", [0.25, 0.5])
def test_rate_consistency_matrix(alpha, b):
    rep = decay_rate(delta_series(tilt(make_basic_law(alpha), b), 2000))
    assert abs(rep.rate - b) < 0.02 * b
