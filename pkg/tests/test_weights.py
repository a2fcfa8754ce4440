import math

import numpy as np
import pytest

from hillspec.weights import (
    WeightError,
    concavity_check,
    factorize,
    gevpow,
    gevrey,
    log_weight,
    make_weight,
    slow_increase_constant,
    sobolev,
    submultiplicativity_check,
    subexponential_type,
    table,
    unit,
)


def test_make_weight_parses_every_family():
    for spec in ["unit", "log", "sobolev:a=2", "gevrey:c=1,gamma=0.5", "gevpow:c=1,gamma=0.5,a=3", "gevsob:c=0.1,gamma=0.5,a=1.1"]:
        W = make_weight(spec)
        assert W(0) == 1.0
        assert W(-6) == W(6)


@pytest.mark.parametrize("spec", ["gevrey:c=1", "sobolev:a=-1", "nope:x=1", "gevrey:c=1,gamma=1.5"])
def test_bad_specs_raise(spec):
    with pytest.raises(WeightError):
        make_weight(spec)


def test_odd_index_rejected():
    with pytest.raises(WeightError):
        sobolev(1)(3)


def test_unit_is_exact():
    v = submultiplicativity_check(unit(), 256)
    assert v.kind == "exact" and v.C == 1.0 and v.witness is None


def test_gevrey_exact():
    assert submultiplicativity_check(gevrey(1, 0.5), 2048).kind == "exact"


def test_gevpow_below_threshold_exact():
    # a <= c g (1-g) 2^g = 0.3536
    assert submultiplicativity_check(gevpow(1, 0.5, 0.35), 2048).kind == "exact"
    assert submultiplicativity_check(gevpow(1, 0.5, 0.5), 2048).kind == "exact"


def test_gevpow_large_a_almost():
    v = submultiplicativity_check(gevpow(1, 0.5, 3), 2048)
    assert v.kind == "almost"
    assert math.isfinite(v.C) and v.C > 1
    k, m = v.witness
    W = gevpow(1, 0.5, 3)
    assert W(k + m) / (W(k) * W(m)) == pytest.approx(v.C, rel=1e-9)


def test_slow_increase_sobolev_is_two():
    s = slow_increase_constant(sobolev(1))
    assert s.A == pytest.approx(2.0, rel=1e-12)
    assert not s.diverging


def test_slow_increase_log_weight():
    s = slow_increase_constant(log_weight())
    # log(2e k)/log(e k) is decreasing, largest at k = 2
    assert s.A == pytest.approx(math.log(4 * math.e) / math.log(2 * math.e), rel=1e-12)
    assert s.A == pytest.approx(1.409, abs=0.01)
    assert s.k_at == 2


def test_slow_increase_gevrey_diverges():
    assert slow_increase_constant(gevrey(1, 0.5)).diverging


def test_subexponential_estimates():
    assert subexponential_type(gevrey(1, 0.5), 2**16).estimate <= 0.004
    assert subexponential_type(sobolev(3), 2**16).estimate == pytest.approx(3 * math.log(2**16) / 2**16, rel=1e-12)
    W = table({k: math.exp(k) for k in range(0, 202, 2)})
    assert subexponential_type(W, 200).estimate == pytest.approx(1.0, rel=1e-12)


def test_concavity():
    assert concavity_check(gevrey(1, 0.5)).passed
    assert concavity_check(sobolev(2), k_from=2).passed
    W = gevpow(1, 0.5, 10)
    fail = concavity_check(W)
    assert not fail.passed and fail.first_violation is not None
    x0 = (10 / (1 * 0.5 * 0.5)) ** 2
    assert concavity_check(W, k_from=int(x0), k_max=4096).passed


def test_factorize_sobolev():
    rep = factorize(sobolev(3), sobolev(1.5))
    assert rep.converged
    assert rep.A == pytest.approx(2**1.5, rel=1e-12)
    ks = np.arange(0, 4098, 2)
    assert np.allclose(rep.omega_tilde(ks), sobolev(1.5)(ks), rtol=1e-12)


def test_factorize_quotient_identity():
    rep = factorize(gevrey(1, 0.5), sobolev(1.1), allow_divergent=True)
    ks = np.arange(0, 8192, 2)
    prod = rep.omega(ks) * rep.omega_tilde(ks)
    assert np.allclose(prod, gevrey(1, 0.5)(ks), rtol=1e-12)


def test_factorize_gevrey_times_power():
    W = gevrey(1, 0.5)
    S = sobolev(1.1)
    # exp(k^0.5) overflows past k ~ 5e5, so the table stops at 2^18
    tab = table({k: float(W(k) * S(k)) for k in range(0, 2**18 + 1, 2)})
    rep = factorize(tab, S, allow_divergent=True)
    assert rep.submultiplicativity.kind == "exact"
    assert rep.M_tail < 1e-5 * rep.M


def test_factorize_log_diverges():
    with pytest.raises(WeightError):
        factorize(log_weight(), log_weight())
    rep = factorize(log_weight(), log_weight(), allow_divergent=True)
    assert not rep.converged


def test_table_rejects_bad_rows():
    with pytest.raises(WeightError):
        table({0: 1.0, 3: 2.0})
    with pytest.raises(WeightError):
        table({0: 1.0, 4: 2.0})
    with pytest.raises(WeightError):
        table({0: 1.0, 2: 2.0, -2: 3.0})


def test_load_table(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("k,omega\n0,1\n2,1.5\n4,2\n")
    W = make_weight(f"table:{path}")
    assert W(-4) == 2.0
    path.write_text("k,value\n0,1\n")
    with pytest.raises(WeightError):
        make_weight(f"table:{path}")
