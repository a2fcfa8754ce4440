import math

import numpy as np
import pytest

from hillspec.potentials import (
    PotentialError,
    alpha_class,
    ex1,
    ex2,
    example1,
    example2,
    is_real_valued,
    make_potential,
    mathieu,
    q_rule,
    sample,
    sawtooth,
    singular_from_q,
    weighted_norm,
    zero,
)
from hillspec.weights import gevpow, make_weight, sobolev, unit


def test_mathieu_coefficients():
    P = mathieu()
    assert P.coeff(2) == 1 and P.coeff(-2) == 1
    assert P.coeff(0) == 0 and P.coeff(4) == 0


def test_sawtooth_coefficients():
    P = sawtooth()
    for k in (2, -2, 10, -40):
        assert P.coeff(k) == pytest.approx(1j / k)
    P1 = sawtooth(1)
    assert P1.coeff(6) == pytest.approx(1 / 36)
    assert P1.coeff(-6) == pytest.approx(1 / 36)


def test_sawtooth_samples_the_ramp():
    x = np.array([0.4, 1.0, 2.5])
    vals = sample(sawtooth(), x, 20000)
    assert np.allclose(vals.real, x - math.pi / 2, atol=2e-3)
    assert np.allclose(vals.imag, 0, atol=1e-12)


def test_example1_coefficients():
    P = example1()
    W = make_weight("gevsob:c=0.1,gamma=0.5,a=1.1")
    for n in (10, 11, 40, 41):
        eta_plus = math.log(n) / n
        eta_minus = math.log(n) ** (2 if n % 2 else 1) / n
        assert P.coeff(2 * n) == pytest.approx(eta_plus / W(2 * n), rel=1e-14)
        assert P.coeff(-2 * n) == pytest.approx(eta_minus / W(2 * n), rel=1e-14)


def test_example2_coefficients():
    P = example2()
    assert P.coeff(0) == 0
    for n in (10, 11, 40):
        assert P.coeff(2 * n) == 1
        expected = n**-0.5 if n % 2 == 0 else 1.0
        assert P.coeff(-2 * n) == pytest.approx(expected)


def test_ex_families_layout():
    W = gevpow(0.1, 0.5, 0)
    P, Q = ex1(W), ex2(W)
    assert P.coeff(2) == pytest.approx(1 / W(2))
    assert P.coeff(-2) == pytest.approx(-1 / W(2))
    p = 5
    assert P.coeff(4 * p) == pytest.approx(1 / W(4 * p))
    assert P.coeff(-4 * p) == pytest.approx(-1 / W(4 * p))
    xi = 1 / math.log(p + 2)
    assert P.coeff(4 * p + 2) == pytest.approx(xi / (p * W(4 * p + 2)))
    assert P.coeff(-4 * p - 2) == pytest.approx(-xi / (p * W(4 * p + 2)))
    assert Q.coeff(4 * p) == pytest.approx(1 / (math.log(4 * p) * W(4 * p)))
    assert Q.coeff(4 * p + 2) == pytest.approx(xi / (p * math.log(4 * p) * W(4 * p + 2)))


def test_ex_sequences():
    P = make_potential("ex1:omega=gevpow:c=0.1,gamma=0.5,a=0,xi=const:0,eta=1/sqrt")
    assert P.coeff(22) == 0
    assert P.coeff(-22) == pytest.approx(-(5**-0.5) / (5 * P.weight(22)))
    with pytest.raises(PotentialError):
        make_potential("ex1:xi=const:-1")
    with pytest.raises(PotentialError):
        make_potential("ex1:xi=cube")


def test_odd_index_rejected():
    with pytest.raises(PotentialError):
        mathieu().coeff(3)


def test_mathieu_partial_sum_exact():
    x = np.linspace(0, math.pi, 7)
    assert np.allclose(sample(mathieu(), x, 2), 2 * np.cos(2 * x), atol=1e-14)
    assert sample(mathieu(), [0.0], 2)[0] == pytest.approx(2)
    assert sample(mathieu(), [math.pi / 2], 2)[0] == pytest.approx(-2)
    assert np.all(sample(zero(), x, 10) == 0)


def test_trig_table_file(tmp_path):
    f = tmp_path / "v.csv"
    f.write_text("k,re,im\n2,1,0\n-2,1,0\n")
    P = make_potential(f"trig:{f}")
    ks = np.arange(-10, 12, 2)
    assert np.array_equal(P.coeffs(ks), mathieu().coeffs(ks))
    f.write_text("k,re,im\n3,1,0\n")
    with pytest.raises(PotentialError):
        make_potential(f"trig:{f}")
    f.write_text("k,re,im\n")
    assert np.all(make_potential(f"trig:{f}").coeffs(ks) == 0)


def test_singular_round_trip():
    W = sobolev(1.2)
    qr = q_rule("odd", W)
    P = singular_from_q(qr)
    ks = np.array([-40, -6, -2, 2, 8, 100])
    assert np.allclose(P.coeffs(ks) / (1j * ks), qr(ks), rtol=1e-15)
    assert np.array_equal(P.q(ks), qr(ks))


def test_alpha_class_range():
    with pytest.raises(PotentialError):
        alpha_class(0.7, "sobolev:a=1")
    P = alpha_class(0.25, "sobolev:a=1")
    assert P.coeff(16) == pytest.approx(16**0.25 / 16)


def test_real_valued_flags():
    assert is_real_valued(mathieu())
    assert is_real_valued(sawtooth())
    assert not is_real_valued(example2())


def test_weighted_norms():
    m = weighted_norm(mathieu(), unit())
    assert m.norm == 1 and abs(m.attained_k) == 2
    assert m.R_at(4) == 0
    s = weighted_norm(sawtooth(), sobolev(1))
    assert s.norm == pytest.approx(1)
    assert not s.decays_to_zero
    P = example1()
    e = weighted_norm(P, P.weight)
    assert e.decays_to_zero


def test_ex1_tail_decays_along_4p_plus_2():
    W = gevpow(0.1, 0.5, 0)
    P = ex1(W)
    ps = np.arange(3, 400)
    ks = 4 * ps + 2
    r = np.abs(P.coeffs(ks)) * W(ks)
    assert np.all(np.diff(r) < 0)
    assert r[-1] < 0.01 * r[0]


def test_shift_changes_only_mean():
    P = mathieu().shifted(3.0)
    assert P.coeff(0) == 3.0 and P.coeff(2) == 1


def test_unknown_family():
    with pytest.raises(PotentialError):
        make_potential("bessel")
