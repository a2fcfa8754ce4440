import math

import numpy as np
import pytest

from hillspec.basic_eq import SpectralTriple
from hillspec.diagnostics import (
    EmptyIndexSet,
    UndefinedRatio,
    angle_vs_t,
    asymptotic_check,
    criterion2,
    criterion3,
    deviation_to_t,
    makin_check,
    parse_law,
    series_triples,
    betas_at,
    dirichlet_mu,
    t_ratio,
    trend_fit,
    verdict_from_trend,
)
from hillspec.potentials import example1, make_potential, mathieu, sawtooth, zero


def test_t_ratio_basics():
    assert t_ratio(2 + 1j, 2 + 1j) == 1
    assert t_ratio(1, 4) == 4 and t_ratio(4, 1) == 4
    assert t_ratio(0, 1) == math.inf
    with pytest.raises(UndefinedRatio):
        t_ratio(0, 0)


@pytest.mark.parametrize(
    "model,f",
    [("bounded", lambda n: 1.3), ("~log n", np.log), ("~sqrt n", np.sqrt), ("~n", lambda n: n)],
)
def test_trend_fit_recovers_model(model, f):
    ns = np.arange(10, 62, 2)
    ts = [2.0 * f(n) if model != "bounded" else 1.3 for n in ns]
    fit = trend_fit(ns, ts)
    assert fit.model == model
    if model != "bounded":
        assert fit.coefficient == pytest.approx(2.0, rel=1e-9)


def test_verdicts_from_trend():
    ns = np.arange(10, 40, 2)
    bounded = [1.1] * len(ns)
    assert verdict_from_trend(trend_fit(ns, bounded), bounded) == "basis"
    huge = [80.0] * len(ns)
    assert verdict_from_trend(trend_fit(ns, huge), huge) == "inconclusive"
    grow = list(np.sqrt(ns))
    assert verdict_from_trend(trend_fit(ns, grow), grow) == "no_basis"


def test_deviation_map():
    assert deviation_to_t(0.5) == 1 and deviation_to_t(1.0) == 1
    # two-by-two model: rho = (s + 1/s + 2)/4 at t = s^2
    for t in (1.5, 4.0, 30.0):
        s = math.sqrt(t)
        assert deviation_to_t((s + 1 / s + 2) / 4) == pytest.approx(t, rel=1e-12)


def test_makin_examples():
    P = example1()
    assert makin_check(P, "even", range(10, 61), 10).verdict == "basis"
    odd = makin_check(P, "odd", range(11, 62), 3)
    assert odd.verdict == "no_basis"
    # |V(2n)/V(-2n)| = 1/log n leaves [1/3, 3] once n >= 21
    assert odd.details["min_ratio"] <= 1 / math.log(21)
    assert odd.n_values[odd.t_values.index(max(odd.t_values))] == 61
    assert makin_check(sawtooth(), "even", range(10, 41)).verdict == "basis"
    assert makin_check(sawtooth(), "odd", range(11, 42)).verdict == "basis"


def test_zero_potential_has_no_gaps():
    P = zero()
    tr = series_triples(P, [4, 6, 8])
    with pytest.raises(EmptyIndexSet):
        criterion2(tr, betas_at(P, tr))


def test_criterion2_flags_merged_pairs():
    P = mathieu()
    tr = series_triples(P, range(2, 13, 2))
    rep = criterion2(tr, betas_at(P, tr), parity="even")
    assert 12 not in rep.n_values
    assert rep.guard_flags == ("degenerate_pair:n=[12]",)


def test_criterion3_two_by_two_model():
    # lambda^+- and mu from a 2x2 model with off-diagonals b-, b+
    triples = {}
    for n, t in [(10, 1.0), (12, 2.0), (14, 4.0), (16, 8.0)]:
        bm, bp = 1.0, 1.0 / t
        w = math.sqrt(bm * bp)
        mu = n * n + 0.5 * (bm + bp)
        triples[n] = SpectralTriple.from_roots(n, -w, w, "series").with_dirichlet(mu)
    rep = criterion3(triples, parity="even")
    assert np.allclose(rep.t_values, [1.0, 2.0, 4.0, 8.0], rtol=1e-12)


def test_criterion3_mathieu_basis():
    P = mathieu()
    ns = [2, 4, 6]
    mus = dirichlet_mu(P, ns, 160)
    tr = {n: t.with_dirichlet(mus[n]) for n, t in series_triples(P, ns).items()}
    rep = criterion3(tr, parity="even")
    assert rep.verdict == "basis"


def test_law_aliases():
    assert parse_law("gap61.3") == "gap_61_3"
    assert parse_law("beta-thm20") == "beta_sim_sigma_thm20"
    with pytest.raises(ValueError):
        parse_law("gap99")


def test_sawtooth_gap_law_modulus():
    tab = asymptotic_check("gap_61_3", sawtooth(), [10, 20, 40])
    assert tab.converging_to_one
    mods = [m for m in tab.modulus_ratio]
    assert abs(mods[-1] - 1) < abs(mods[0] - 1) + 1e-12


def test_sawtooth_midpoint_refused():
    tab = asymptotic_check("dev_mid_61_7", sawtooth(), [10, 20, 40])
    assert tab.refused and tab.guard_distance == 0
    assert tab.guard_flags


def test_guard_threshold_exact():
    # example1 even: V(-2n)/V(2n) = 1, distance 2 from the excluded point -1
    P = example1()
    assert not asymptotic_check("dev_mid_61_7", P, [10, 20], guard_eps=1.99).refused
    assert asymptotic_check("dev_mid_61_7", P, [10, 20], guard_eps=2.01).refused


def test_gap_law_branch_free():
    for P, ns in [(example1(), [10, 20, 40]), (sawtooth(), [10, 20, 40])]:
        tab = asymptotic_check("gap_50_3", P, ns)
        devs = [abs(m - 1) for m in tab.modulus_ratio]
        assert all(a > b for a, b in zip(devs, devs[1:]))
        assert devs[-1] < 1e-4


def test_example1_deviation_laws():
    P = example1()
    tab = asymptotic_check("dev_plus_61_4", P, [10, 20, 40, 60])
    assert tab.converging_to_one
    assert asymptotic_check("dev_minus_61_5", P, [10, 20, 40]).refused


def test_beta_law_sawtooth():
    tab = asymptotic_check("beta_sim_V_thm1", sawtooth(), [10, 20, 40])
    assert tab.converging_to_one


def test_angle_table_mathieu():
    tab = angle_vs_t(mathieu(), "even", range(2, 7), N=80)
    assert all(r.t == pytest.approx(1.0) and r.sin_angle == pytest.approx(1.0) for r in tab.rows)


def test_angle_table_example1_odd():
    tab = angle_vs_t(example1(), "odd", range(11, 32), N=160)
    ts = [r.t for r in tab.rows]
    sins = [r.sin_angle for r in tab.rows]
    assert all(a < b for a, b in zip(ts, ts[1:]))
    assert all(a > b for a, b in zip(sins, sins[1:]))
    assert tab.consistent


def test_angle_table_ex1_bounded_below():
    tab = angle_vs_t(make_potential("ex1"), "odd", range(7, 32), N=160)
    assert min(r.sin_angle for r in tab.rows) > 0.15
