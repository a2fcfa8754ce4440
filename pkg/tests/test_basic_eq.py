import math

import pytest

from hillspec.basic_eq import SpectralTriple, cross_validate, rho_bound, solve_basic
from hillspec.functionals import transfer_eval
from hillspec.potentials import example2, mathieu, sawtooth, zero

from oracles import mathieu_pair


def test_zero_potential_roots():
    tr = solve_basic(zero(), 6)
    assert tr.z_minus == 0 and tr.z_plus == 0
    assert tr.lambda_plus == 36 and tr.residual == 0
    assert tr.degenerate


@pytest.mark.parametrize("n", range(2, 13))
def test_mathieu_roots_against_reference(n):
    tr = solve_basic(mathieu(), n)
    lo, hi = mathieu_pair(n)
    assert tr.lambda_minus.real == pytest.approx(lo, abs=1e-9)
    assert tr.lambda_plus.real == pytest.approx(hi, abs=1e-9)
    assert tr.z_minus.imag == 0 and tr.z_plus.imag == 0


def test_residual_and_midpoint():
    for P, n in [(mathieu(), 4), (sawtooth(), 10), (example2(), 12)]:
        tr = solve_basic(P, n, tol=1e-12)
        be = transfer_eval(P, n, tr.z_star, escape_check=False)
        assert tr.residual <= 10 * 1e-12 * max(1.0, abs(be.beta_minus * be.beta_plus) ** 0.5)
        assert tr.z_star == (tr.z_minus + tr.z_plus) / 2
        assert tr.gamma == tr.z_plus - tr.z_minus


def test_sawtooth_gap_times_n():
    vals = [abs(solve_basic(sawtooth(), n).gamma) * n for n in (6, 10, 20, 40)]
    assert vals == pytest.approx([1.00023, 1.00003, 1.000002, 1.0000001], abs=2e-5)
    assert all(abs(a - 1) > abs(b - 1) for a, b in zip(vals, vals[1:]))


def test_real_potential_roots_conjugate_closed():
    tr = solve_basic(sawtooth(), 9)
    pair = {round(tr.z_minus.real, 12) + 1j * round(tr.z_minus.imag, 12), round(tr.z_plus.real, 12) + 1j * round(tr.z_plus.imag, 12)}
    assert {z.conjugate() for z in pair} == pair


def test_rho_bound_zero_potential():
    rb = rho_bound(zero(), 4)
    assert rb.epsilon_n == pytest.approx(0.5)
    assert rb.bound == pytest.approx(2 * math.sqrt(4))


def test_rho_bound_sawtooth():
    rb = rho_bound(sawtooth(), 100)
    k = range(10, 10**6, 2)
    direct = math.sqrt(2 * sum(kk**-4.0 for kk in k)) + 0.1
    assert rb.epsilon_n == pytest.approx(direct, rel=1e-6)
    ratios = [rho_bound(sawtooth(), n).bound / n for n in (25, 100, 400)]
    assert ratios[0] > ratios[1] > ratios[2]


def test_rho_bound_example2_shrinks():
    ratios = [rho_bound(example2(), n).bound / n for n in (25, 100, 400)]
    assert ratios[0] > ratios[1] > ratios[2]


@pytest.mark.parametrize("P,n", [(sawtooth(), 8), (mathieu(), 5), (example2(), 12)])
def test_roots_inside_a_priori_radius(P, n):
    tr = solve_basic(P, n)
    rb = rho_bound(P, n)
    assert max(abs(tr.z_minus), abs(tr.z_plus)) <= rb.bound


def test_cross_validate_mathieu():
    for n in range(2, 11):
        cv = cross_validate(mathieu(), n, (80, 160), 1e-6)
        assert cv.passed and cv.max_abs_discrepancy < 1e-10


def test_cross_validate_sawtooth():
    for n in (6, 12, 20):
        cv = cross_validate(sawtooth(), n, (160, 320), 1e-4)
        assert cv.passed
        assert abs(cv.matrix.z_star - cv.series.z_star) <= 1e-4


def test_cross_validate_zero():
    cv = cross_validate(zero(), 4, (20, 40), 1e-12)
    assert cv.max_abs_discrepancy == 0


def test_triple_serializes():
    tr = SpectralTriple.from_roots(5, -0.1, 0.2, "series")
    d = tr.as_dict()
    assert d["lambda_plus"] == 25.2 and d["gamma"] == pytest.approx(0.3)
    both = tr.with_dirichlet(25.05)
    assert both.source == "both" and both.delta == pytest.approx(25.05 - 25.2)
