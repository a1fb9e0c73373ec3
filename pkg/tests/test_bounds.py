import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fixedbudget.bounds import (
    bh_bounds,
    cl16_value,
    crossing_value,
    evaluate_bounds,
    gaussian_bh_value,
    gaussian_c_of_nu,
    lb_gap_abm10,
    lb_thm7,
    lb_thm12,
    lb_thm13,
    model_constant,
    two_arm_value,
    ub_cor3,
)
from fixedbudget.dist_model import BanditProblem, Bernoulli, FiniteSupport, Gaussian, Poisson
from fixedbudget.info_geometry import chernoff_d, linf, pair_rate
from fixedbudget.optimize import golden_min


def kl_ber(x, y):
    return x * math.log(x / y) + (1 - x) * math.log((1 - x) / (1 - y))


B3 = BanditProblem((Bernoulli(0.7), Bernoulli(0.5), Bernoulli(0.3)))
G2 = BanditProblem((Gaussian(1.0), Gaussian(0.0)))


def bern(*means):
    return BanditProblem(tuple(Bernoulli(m) for m in means))


def test_ub_cor3_examples():
    assert ub_cor3(B3, "gap_squared").value == pytest.approx(-0.015)
    ub = ub_cor3(G2, "phi")
    assert ub.value == pytest.approx(-0.125, abs=1e-12)
    assert ub.ordering == (0, 1)
    sep = BanditProblem((FiniteSupport((0.6, 1.0), (0.5, 0.5)), FiniteSupport((0.0, 0.4), (0.5, 0.5))))
    assert ub_cor3(sep, "phi").value == -math.inf
    with pytest.raises(ValueError):
        ub_cor3(bern(0.5, 0.5), "phi")


def test_lb_thm7_examples():
    # quoted to seven decimals after halving a rounded kl value
    assert lb_thm7(B3) == pytest.approx(-0.0435884, abs=1e-7)
    assert lb_thm7(B3) == pytest.approx(-min(kl_ber(0.5, 0.7) / 2, kl_ber(0.3, 0.7) / 3), abs=1e-12)
    assert lb_thm7(G2) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        lb_thm7(bern(0.6, 0.6, 0.2))


def test_lb_thm12_examples():
    g = lb_thm12(G2)
    assert g.value == pytest.approx(-1 / 6, abs=1e-10)
    assert g.x == pytest.approx(1 / 3, abs=1e-6)
    assert (g.k, g.j) == (2, 2)
    b = lb_thm12(bern(0.7, 0.3))
    endpoint = -(0 + kl_ber(0.3, 0.7) / 2)
    assert endpoint == pytest.approx(-0.1694596, abs=5e-8)
    # inner infimum checked against a dense grid
    xs = np.linspace(0.3, 0.7 - 1e-9, 200_001)
    grid = np.min([kl_ber(x, 0.3) * (x > 0.3) + kl_ber(x, 0.7) / 2 for x in xs])
    assert b.value == pytest.approx(-grid, abs=1e-9)
    assert b.value >= endpoint


def test_lb_thm13_examples():
    assert lb_thm13(G2) == pytest.approx(-0.125, abs=1e-12)
    value, x = crossing_value(Gaussian(0.0), Gaussian(1.0))
    assert x == pytest.approx(0.5, abs=1e-10)
    b = bern(0.25, 0.75)
    assert lb_thm13(b) == pytest.approx(-0.1438410, abs=5e-8)
    assert two_arm_value(b) == pytest.approx(lb_thm13(b), abs=1e-12)


def test_gap_lb_examples():
    assert lb_gap_abm10(B3, 1 / (2 * 0.25 * 0.75)) == pytest.approx(-0.2666667, abs=5e-8)
    assert lb_gap_abm10(G2, 0.5) == pytest.approx(-1.25)
    with pytest.raises(ValueError):
        lb_gap_abm10(B3, 0.0)
    assert model_constant(G2) == 0.5
    assert model_constant(B3) == pytest.approx(1 / (2 * 0.3 * 0.7))


def test_bh_examples():
    g3 = BanditProblem((Gaussian(1.0), Gaussian(0.5), Gaussian(0.0)))
    assert gaussian_c_of_nu(g3) == pytest.approx(10.0)
    c, bound = gaussian_bh_value(g3, 100)
    assert bound == pytest.approx(-0.4 - math.log(4) / 100, abs=1e-12)
    assert bound == pytest.approx(-0.4138629, abs=1e-7)
    assert gaussian_bh_value(g3)[1] == pytest.approx(-0.4)
    with pytest.raises(ValueError):
        bh_bounds(g3, [None, Gaussian(0.9), Gaussian(1.5)], 100)


def test_cl16_formula():
    value = cl16_value(bern(0.75, 0.5, 0.25))
    assert value == pytest.approx(-(30 / math.log(3)) / 20, abs=1e-12)
    with pytest.raises(ValueError):
        cl16_value(bern(0.75, 0.5))
    with pytest.raises(ValueError):
        cl16_value(bern(0.9, 0.5, 0.3))


@st.composite
def bernoulli_problems(draw, max_k=5):
    k = draw(st.integers(2, max_k))
    means = draw(st.lists(st.integers(2, 98), min_size=k, max_size=k, unique=True))
    return bern(*(m / 100 for m in means))


@given(bernoulli_problems())
def test_relaxation_thm12_ge_thm7(p):
    assert lb_thm12(p).value >= lb_thm7(p) - 1e-10


@given(bernoulli_problems())
def test_phi_bound_tighter_than_gap_bound(p):
    assert ub_cor3(p, "phi").value <= ub_cor3(p, "gap_squared").value + 1e-12


@given(st.lists(st.integers(25, 75), min_size=2, max_size=5, unique=True))
def test_thm7_above_gap_lb_in_restricted_model(means):
    p = bern(*(m / 100 for m in means))
    c = 1 / (2 * 0.25 * 0.75)
    assert lb_thm7(p) >= lb_gap_abm10(p, c) - 1e-12


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=5, unique=True), st.sampled_from([0.5, 1.0, 2.0]))
def test_thm7_above_gap_lb_gaussian(means, s2):
    p = BanditProblem(tuple(Gaussian(m, s2) for m in means))
    assume(p.generic)
    assert lb_thm7(p) >= lb_gap_abm10(p, model_constant(p)) - 1e-12


@given(st.lists(st.integers(1, 99), min_size=3, max_size=6, unique=True),
       st.sampled_from(["bernoulli", "gaussian", "poisson"]))
def test_ordering_matches_descending_means(means, family):
    make = {"bernoulli": lambda m: Bernoulli(m / 100),
            "gaussian": lambda m: Gaussian(m / 25),
            "poisson": lambda m: Poisson(m / 10)}[family]
    p = BanditProblem(tuple(make(m) for m in means))
    assert ub_cor3(p, "phi").ordering == p.order


@given(st.integers(1, 97), st.integers(2, 98), st.sampled_from(["bernoulli", "gaussian", "poisson"]))
def test_two_arm_value_is_chernoff(a, b, family):
    assume(a < b)
    make = {"bernoulli": lambda m: Bernoulli(m / 100),
            "gaussian": lambda m: Gaussian(m / 25, 2.0),
            "poisson": lambda m: Poisson(m / 10)}[family]
    worse, better = make(a), make(b)
    value, _ = crossing_value(worse, better)
    assert value == pytest.approx(chernoff_d(worse, better).value, abs=1e-8)

    def f(x):
        return max(linf(worse, x, "above", True).value, linf(better, x, "below", True).value)

    _, direct = golden_min(f, worse.mean, better.mean)
    assert value == pytest.approx(direct, abs=1e-8)


def test_bound_report_contents():
    r = evaluate_bounds(B3, T=100)
    assert set(r.upper) == {"cor3_phi", "cor3_gap"}
    assert {"thm7", "thm12", "thm13", "gap_lb_abm10", "cl16_value"} <= set(r.lower)
    assert r.variants["cor3_phi"] == "weak" and r.variants["thm7"] == "strict"
    assert "cl16_value" in r.caveats
    text = r.to_json()
    assert json.dumps(json.loads(text), indent=2, sort_keys=True) == text
    assert evaluate_bounds(B3, T=100).to_json() == text
    non = evaluate_bounds(bern(0.5, 0.5))
    assert non.upper == {} and "unique_optimum" in non.caveats


def test_report_encodes_infinities():
    sep = BanditProblem((FiniteSupport((0.6, 1.0), (0.5, 0.5)), FiniteSupport((0.0, 0.4), (0.5, 0.5))))
    data = json.loads(evaluate_bounds(sep).to_json())
    assert data["upper"]["cor3_phi"] == "-inf"


def test_atom_boundary_flag():
    best = FiniteSupport((0.5, 1.0), (0.5, 0.5))
    worse = FiniteSupport((0.0, 0.5), (0.5, 0.5))
    r = evaluate_bounds(BanditProblem((best, worse)))
    assert "atom_boundary" in r.caveats
    # weak pair rate finite through the shared atom, strict lower bounds infinite there
    assert math.isfinite(pair_rate(worse, best).value)
