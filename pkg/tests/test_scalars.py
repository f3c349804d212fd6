import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from conftest import rationals, taus
from ncadelic.scalars import (
    ONE,
    ZERO,
    CycScalar,
    GroupAlgElem,
    char_value,
    cyc,
    full_period_constant,
    is_generic,
    is_invertible_in_group_algebra,
    parse_tau,
    phi,
    random_tau,
    scalar_from_json,
    scalar_to_json,
    sum_of_windows,
    tau_shift,
    tau_window,
    window_value,
    zeta_power,
)


def brute_force_generic(t, span):
    """Direct evaluation of every window tau_[a,b], 0 <= a <= b <= span."""
    m = t.m
    for a in range(span + 1):
        for b in range(a, span + 1):
            vals = [sum((t.charvals[(j + k) % m] for k in range(a, b + 1)), ZERO) for j in range(m)]
            if any(v == 0 for v in vals):
                return False
    return True


def cyc_elements(m):
    return st.lists(rationals(), min_size=phi(m), max_size=phi(m)).map(lambda cs: cyc(m, cs))


# -- cyclotomic field ----------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 8])
def test_zeta_is_primitive_root(m):
    z = zeta_power(m, 1)
    assert z ** m == 1
    assert all(z ** k != 1 for k in range(1, m))


@pytest.mark.parametrize("m", [3, 4, 5, 8])
@given(data=st.data())
def test_field_axioms(m, data):
    a, b, c = (data.draw(cyc_elements(m)) for _ in range(3))
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    if a != 0:
        assert a * (ONE / a) == 1
        assert (b / a) * a == b


def test_cyclotomic_reduction_keeps_phi_coefficients():
    z = zeta_power(5, 1)
    w = z ** 7
    assert isinstance(w, CycScalar) and len(w.coeffs) == phi(5)
    assert w == z ** 2
    # 1 + z + ... + z^4 = 0 in Q(zeta_5)
    assert sum((z ** k for k in range(5)), ZERO) == 0


def test_scalar_json_roundtrip():
    z = zeta_power(3, 1)
    for v in (mpq(3, 7), ZERO, z, 2 * z - mpq(1, 2)):
        assert scalar_from_json(scalar_to_json(v)) == v
    assert scalar_to_json(mpq(-5, 4)) == "-5/4"


# -- group algebra ---------------------------------------------------------------------


def test_char_value_examples():
    assert all(char_value(GroupAlgElem.scalar(1, mpq(7)), j) == 7 for j in range(3))
    t = GroupAlgElem.from_group(2, [mpq(2), mpq(5)])
    assert t.charvals == (mpq(7), mpq(-3))
    g = GroupAlgElem.from_group(3, [ZERO, ONE, ZERO])
    assert [g.char_value(j) for j in range(3)] == [zeta_power(3, j) for j in range(3)]


@pytest.mark.parametrize("m", range(1, 9))
def test_dft_roundtrip(m):
    rng = random.Random(m)
    for _ in range(1000 // 8):
        coeffs = [mpq(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(m)]
        assert GroupAlgElem.from_group(m, coeffs).to_group() == coeffs


@pytest.mark.parametrize("m", range(1, 7))
def test_shift_coherence(m):
    t = random_tau(random.Random(m), m)
    for k in range(-m, 2 * m):
        shifted = tau_shift(t, k)
        assert all(shifted.char_value(j) == t.char_value(j + k) for j in range(m))


def test_shift_examples():
    t = GroupAlgElem(2, [ONE, -ONE])
    assert tau_shift(t, 0) == t
    assert tau_shift(t, 1).charvals == (-ONE, ONE)
    assert tau_shift(t, 2) == t


def test_window_examples():
    t = GroupAlgElem(1, [mpq(3, 2)])
    assert tau_window(t, 2, 6) == GroupAlgElem(1, [mpq(15, 2)])
    assert tau_window(GroupAlgElem(2, [ONE, -ONE]), 0, 1).charvals == (ZERO, ZERO)
    with pytest.raises(ValueError):
        tau_window(t, 1, 0)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
@given(data=st.data())
def test_full_period_window_is_constant(m, data):
    t = data.draw(taus(m))
    c = full_period_constant(t)
    for a in range(-2 * m, 2 * m + 1):
        assert set(tau_window(t, a, a + m - 1).charvals) == {c}


def test_window_value_matches_window_element():
    t = random_tau(random.Random(5), 4)
    for a in range(-3, 4):
        for b in range(a, a + 6):
            w = tau_window(t, a, b)
            assert all(window_value(t, a, b, j) == w.char_value(j) for j in range(4))


# -- genericity -------------------------------------------------------------------------


def test_generic_examples():
    assert not is_generic(GroupAlgElem(1, [ZERO]))[0]
    assert is_generic(GroupAlgElem(1, [ONE]))[0]
    assert is_generic(GroupAlgElem(2, [ONE, ONE]))[0]
    flag, cert = is_generic(GroupAlgElem(2, [ONE, -ONE]))
    assert not flag
    a, b, j = cert
    assert window_value(GroupAlgElem(2, [ONE, -ONE]), a, b, j) == 0


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_generic_agrees_with_brute_force(m):
    rng = random.Random(100 + m)
    for _ in range(200):
        # small integer values make non-generic samples common
        t = GroupAlgElem(m, [mpq(rng.randint(-3, 3), rng.choice([1, 1, 2])) for _ in range(m)])
        assert is_generic(t)[0] == brute_force_generic(t, 4 * m)


def test_certificate_points_at_vanishing_window():
    rng = random.Random(9)
    for _ in range(100):
        t = GroupAlgElem(3, [mpq(rng.randint(-2, 2)) for _ in range(3)])
        flag, cert = is_generic(t)
        if not flag:
            a, b, j = cert
            assert a <= b and window_value(t, a, b, j) == 0


def test_sum_of_windows():
    t = GroupAlgElem(2, [mpq(1), mpq(3)])
    assert sum_of_windows(t, 0, 0, 1) == t
    g = GroupAlgElem(3, [mpq(1), mpq(2), mpq(-1, 2)])
    assert is_generic(g)[0]
    for a in range(-2, 2):
        for b in range(a, a + 3):
            s = sum_of_windows(g, a, b, 3)
            assert s == GroupAlgElem.scalar(3, full_period_constant(g) * (b - a + 1))
            assert is_invertible_in_group_algebra(s)
    assert not is_invertible_in_group_algebra(GroupAlgElem.scalar(2, 0))


def test_parse_tau():
    assert parse_tau("2", 3) == GroupAlgElem.scalar(3, 2)
    assert parse_tau("1,-1", 2) == GroupAlgElem(2, [ONE, -ONE])
    assert parse_tau("g:2,5", 2) == GroupAlgElem(2, [mpq(7), mpq(-3)])
    t = GroupAlgElem(3, [mpq(1), mpq(2, 3), mpq(-4)])
    assert GroupAlgElem.from_json(t.to_json()) == t
    assert GroupAlgElem.from_json({"m": 2, "group": ["2", "5"]}) == GroupAlgElem(2, [mpq(7), mpq(-3)])
