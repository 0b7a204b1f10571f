import json
import math

import pytest
from hypothesis import given, strategies as st

from conftest import SEED
from erwlab.exact import exact_pmf
from erwlab.model import ERWParams
from erwlab.errors import DomainError, UndefinedEstimateError, UnsupportedRegimeError
from erwlab.inference import (
    ConfidenceQuery,
    coverage_experiment,
    exact_coverage,
    p_lower_limit,
    p_lower_report,
    position_interval,
    to_json,
    z_value,
)

# high-precision reference values (50-digit evaluation, rounded to double)
Z_975 = 1.959963984540054
P_LOWER_N1E4_S400 = 0.68997720592665428
HALF_WIDTH_P025 = 138.59038243496779
HALF_WIDTH_P075 = 594.82050455177757


def test_p_lower_example():
    q = ConfidenceQuery(10_000, 400, 0.05)
    assert z_value(0.05) == pytest.approx(Z_975, rel=1e-14)
    assert p_lower_limit(q) == pytest.approx(P_LOWER_N1E4_S400, rel=1e-13)


def test_report_hints():
    rep = p_lower_report(ConfidenceQuery(10_000, 400, 0.05))
    assert set(rep) == {"schema", "n", "s_n", "kappa", "z", "p_lower", "clamped_hint"}
    assert rep["clamped_hint"] is None
    assert p_lower_report(ConfidenceQuery(10_000, 20, 0.05))["p_lower"] < 0
    assert "vacuous" in p_lower_report(ConfidenceQuery(10_000, 20, 0.05))["clamped_hint"]
    assert json.loads(to_json(rep))["p_lower"] == rep["p_lower"]


def test_maximal_drift_limit():
    vals = [p_lower_limit(ConfidenceQuery(n, n, 0.05)) for n in (10, 1000, 10**6)]
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(0.75 - Z_975**2 / 4e6, rel=1e-12)


def test_kappa_to_one():
    assert p_lower_limit(ConfidenceQuery(100, 10, 1 - 1e-12)) == pytest.approx(0.75, abs=1e-10)
    lo, hi = position_interval(0.25, 10_000, 1 - 1e-12)
    assert hi - lo < 1e-8


def test_undefined_and_domain_errors():
    with pytest.raises(UndefinedEstimateError):
        p_lower_limit(ConfidenceQuery(100, 0, 0.05))
    for kappa in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            ConfidenceQuery(100, 10, kappa)
    with pytest.raises(DomainError):
        ConfidenceQuery(100, 11, 0.05)
    with pytest.raises(DomainError):
        ConfidenceQuery(100, 102, 0.05)


@given(st.integers(1, 5000), st.data(), st.floats(1e-6, 0.999))
def test_monotone_in_s(n, data, kappa):
    # attainable positive values n, n-2, ...
    i = data.draw(st.integers(0, (n - 1) // 2))
    j = data.draw(st.integers(0, i))
    a, b = n - 2 * i, n - 2 * j
    assert p_lower_limit(ConfidenceQuery(n, a, kappa)) <= p_lower_limit(ConfidenceQuery(n, b, kappa))
    assert p_lower_limit(ConfidenceQuery(n, -b, kappa)) == p_lower_limit(ConfidenceQuery(n, b, kappa))


def test_monotone_in_kappa():
    vals = [p_lower_limit(ConfidenceQuery(10_000, 300, k)) for k in (0.5, 0.1, 0.05, 0.01, 1e-4)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_position_intervals():
    lo, hi = position_interval(0.25, 10_000, 0.05)
    assert hi == pytest.approx(HALF_WIDTH_P025, rel=1e-13) and lo == -hi
    assert position_interval(0.75, 10_000, 0.05)[1] == pytest.approx(HALF_WIDTH_P075, rel=1e-13)
    for p in (0.0, 0.5, 0.9):
        with pytest.raises(UnsupportedRegimeError):
            position_interval(p, 100, 0.05)


def test_exact_coverage_small_n():
    res = exact_coverage(0.25, 0.5, 4, 0.1)
    # n = 4, z = 1.6449: p_L(+-2) = 0.079 is covered, p_L(+-4) = 0.58 is not,
    # and S_4 = 0 leaves the limit undefined
    d = exact_pmf(ERWParams(0.25, 0.5, 4))
    assert res["coverage"] == pytest.approx(d.prob(2) + d.prob(-2), abs=1e-15)
    assert res["undefined"] == d.prob(0)


@pytest.mark.slow
def test_coverage_matches_exact():
    ex = exact_coverage(0.25, 0.5, 10_000, 0.1)
    mc = coverage_experiment(0.25, 0.5, 10_000, 0.1, 100_000, SEED)
    c = ex["coverage"]
    assert abs(mc["coverage"] - c) <= 3 * math.sqrt(c * (1 - c) / 100_000)
    assert 0.885 <= mc["coverage"] <= 0.915
    assert mc["undefined"] > 0
    assert mc["plan"]["seed"] == SEED


def test_coverage_half_level():
    ex = exact_coverage(0.25, 0.5, 10_000, 0.5)
    assert abs(ex["coverage"] - 0.5) < 0.02
    # at small n the level is off, but simulation still matches the exact law
    c = exact_coverage(0.25, 0.5, 2000, 0.5)["coverage"]
    mc = coverage_experiment(0.25, 0.5, 2000, 0.5, 20_000, SEED)
    assert abs(mc["coverage"] - c) <= 3 * math.sqrt(c * (1 - c) / 20_000)


def test_coverage_gating():
    with pytest.raises(UnsupportedRegimeError):
        coverage_experiment(0.9, 0.5, 100, 0.1, 10, SEED)
