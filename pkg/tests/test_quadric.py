import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from conftest import taus
from ncadelic.btau import b_multiply
from ncadelic.quadric import (
    QDUAL_TABLE,
    CohomologyTable,
    QAlgebra,
    QElem,
    coh_dim,
    coh_formula,
    dual_by_intersection,
    dual_elements,
    enumerated_dim,
    koszul_check,
    q_dim,
    q_multiply,
    quadratic_dual_table,
    specialize_to_B,
    strong_generation_check,
)
from ncadelic.scalars import ONE, GroupAlgElem, random_generic_tau


def random_qelem(alg, rng, max_deg=2, nterms=3):
    terms = {}
    for _ in range(nterms):
        key = tuple(rng.randint(0, max_deg) for _ in range(4)) + (rng.randrange(alg.m),)
        terms[key] = mpq(rng.randint(-3, 3), rng.randint(1, 3))
    return QElem(alg, terms)


# -- algebra structure ---------------------------------------------------------------


def test_defining_relations():
    tau = GroupAlgElem(2, [mpq(1), mpq(3)])
    alg = QAlgebra(tau)
    x, y, z, w = (alg.gen(c) for c in "xyzw")
    tzw = q_multiply(q_multiply(alg.group_algebra(tau), z), w)
    assert q_multiply(y, x) - q_multiply(x, y) == tzw
    for c in (x, y, z, w):
        assert q_multiply(z, c) == q_multiply(c, z)
        assert q_multiply(w, c) == q_multiply(c, w)


@pytest.mark.parametrize("m", [1, 2, 3])
@given(data=st.data())
def test_associativity(m, data):
    alg = QAlgebra(data.draw(taus(m)))
    rng = random.Random(data.draw(st.integers(0, 10 ** 6)))
    u, v, w = (random_qelem(alg, rng) for _ in range(3))
    assert q_multiply(q_multiply(u, v), w) == q_multiply(u, q_multiply(v, w))


@pytest.mark.parametrize("m", [1, 2, 3])
@given(data=st.data())
def test_specialization_is_multiplicative(m, data):
    alg = QAlgebra(data.draw(taus(m)))
    rng = random.Random(data.draw(st.integers(0, 10 ** 6)))
    u, v = random_qelem(alg, rng), random_qelem(alg, rng)
    assert specialize_to_B(q_multiply(u, v)) == b_multiply(specialize_to_B(u), specialize_to_B(v))


def test_json_roundtrip():
    alg = QAlgebra(GroupAlgElem(3, [mpq(1), mpq(2), mpq(-1, 2)]))
    rng = random.Random(1)
    for _ in range(5):
        u = random_qelem(alg, rng)
        assert QElem.from_json(u.to_json()) == u


# -- dimensions -------------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_enumerated_dims(m):
    alg = QAlgebra(random_generic_tau(random.Random(m), m))
    for i in range(4):
        for j in range(4):
            assert enumerated_dim(alg, i, j) == q_dim(i, j, m) == (i + 1) * (j + 1) * m


def test_q_dim_rejects_negative():
    with pytest.raises(ValueError):
        q_dim(-1, 0, 1)


@pytest.mark.parametrize("m", [1, 2])
def test_strong_generation(m):
    alg = QAlgebra(GroupAlgElem(m, [mpq(k + 1) for k in range(m)]))
    for i in range(3):
        for j in range(3):
            assert strong_generation_check(alg, (i, j), 1)
            assert strong_generation_check(alg, (i, j), 2)


# -- quadratic dual ----------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_quadratic_dual_table(m):
    tau = GroupAlgElem(m, [mpq(2 * k + 1, 3) for k in range(m)])
    report = quadratic_dual_table(tau)
    assert report["ok"], report["failures"]
    assert report["dims"][(1, 1)] == 4 * m
    assert report["dims"][(2, 2)] == m
    assert report["dims"][(3, 0)] == 0


def test_quadratic_dual_table_negative_control():
    tau = GroupAlgElem(2, [mpq(1), mpq(2)])
    corrupted = dict(QDUAL_TABLE)
    corrupted[(1, 1)] = 3
    report = quadratic_dual_table(tau, corrupted)
    assert not report["ok"]
    assert any(f[0] == "dim" and f[1] == (1, 1) for f in report["failures"])


def test_dual_elements_match_intersection():
    tau = GroupAlgElem(2, [mpq(1, 2), mpq(5)])
    for q in ((1, 0), (0, 1), (1, 1), (2, 1)):
        for k in range(2):
            els = dual_elements(tau, q, k)
            ref = dual_by_intersection(tau, q, k)
            assert ref.dim == len(els) and ref.contains_all(els)


# -- Koszul complexes --------------------------------------------------------------


@pytest.mark.parametrize("I", [(1, 2), (1,), (2,)])
def test_koszul_exact_m2(I):
    tau = GroupAlgElem(2, [mpq(1), mpq(-3, 2)])
    report = koszul_check(tau, I, (3, 3))
    assert report["ok"], report["failures"]


def test_koszul_exact_tau_zero():
    report = koszul_check(GroupAlgElem(1, [0]), (1, 2), (3, 3))
    assert report["ok"]


def test_koszul_term_dims():
    # Euler characteristic of the full complex in bidegree (1,1) is 0
    report = koszul_check(GroupAlgElem(1, [ONE]), (1, 2), (1, 1))
    dims = report["dims"][(1, 1)]
    assert dims[0] - dims[1] + dims[2] - dims.get(3, 0) + dims.get(4, 0) == 0
    assert dims[0] == 4 and dims[1] == 8 and dims[2] == 4


# -- cohomology --------------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cohomology_against_closed_form(m):
    for p in range(3):
        for i in range(-5, 6):
            for j in range(-5, 6):
                d, M = coh_dim(p, i, j, m)
                assert d == coh_formula(p, i, j, m) == sum(map(sum, M))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cohomology_table_laws(m):
    table = CohomologyTable(m, -5, 5)
    assert table.serre_symmetric()
    assert table.euler_is_polynomial()
    assert table.vanishing_strip()
    assert len(table.json_lines()) == 3 * 11 * 11


def test_cohomology_examples():
    assert coh_dim(0, 0, 0, 2)[0] == 2
    assert coh_dim(1, -3, 1, 1)[0] == 4
    assert coh_dim(2, -2, -2, 3)[0] == 3
    assert coh_dim(1, -1, 4, 3)[0] == 0
    with pytest.raises(ValueError):
        coh_dim(3, 0, 0, 1)


def test_serre_symmetry_of_characters():
    m = 3
    for i in range(-5, 6):
        for j in range(-5, 6):
            top = coh_dim(2, i, j, m)[1]
            bottom = coh_dim(0, -2 - i, -2 - j, m)[1]
            assert top == [list(r) for r in zip(*bottom)]
