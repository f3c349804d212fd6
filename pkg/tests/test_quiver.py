import json
import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from ncadelic.quiver import (
    GammaModule,
    GenerationFailure,
    QuiverData,
    fingerprints,
    gauge_apply,
    generate_cm,
    generate_cyclic,
    is_admissible,
    is_stable,
    moment_defect,
    random_gauge,
    stabilizer_dimension,
    trivial_instance,
)
from ncadelic.scalars import GroupAlgElem


def test_gamma_module():
    V = GammaModule((2, 0, 1))
    assert V.m == 3 and V.total == 3 and V.offsets() == [0, 2, 2]
    assert [V.character_of(i) for i in range(3)] == [0, 0, 2]
    assert V[-1] == 1
    with pytest.raises(ValueError):
        GammaModule((1, -1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cm_admissible_and_stable(n):
    d = generate_cm(n, mpq(3, 2), random.Random(n))
    assert is_admissible(d)
    assert is_stable(d)[0]
    assert stabilizer_dimension(d) == 0


def test_cm_rejects_bad_input():
    with pytest.raises(ValueError):
        generate_cm(0, 1)
    with pytest.raises(ValueError):
        generate_cm(2, 0)


def test_trivial_instance():
    d = trivial_instance(2)
    assert d.n == 1 and d.r == 1 and is_admissible(d) and is_stable(d)[0]
    assert moment_defect(d) == [[0]]


def test_unstable_witness():
    # I = 0 spans nothing, so the zero subspace is a proper B-stable one containing im I
    t = GroupAlgElem(1, [mpq(0)])
    d = QuiverData(t, GammaModule((1,)), GammaModule((1,)),
                   [[[mpq(0)]]], [[[mpq(0)]]], [[[mpq(0)]]], [[[mpq(0)]]])
    ok, witness = is_stable(d)
    assert not ok and witness == []


def test_non_admissible_detected():
    d = trivial_instance(1)
    bad = QuiverData(d.tau, d.V, d.W, d.B1, d.B2, d.I, [[[mpq(5)]]])
    assert not is_admissible(bad)
    assert moment_defect(bad) == [[4]]


@pytest.mark.parametrize("seed", range(4))
def test_gauge_invariance(seed):
    rng = random.Random(seed)
    d = generate_cyclic((1, 1), (1, 0), GroupAlgElem(2, [mpq(1), mpq(2)]), rng)
    g = random_gauge(d, rng)
    e = gauge_apply(g, d)
    assert is_admissible(e) and is_stable(e)[0]
    assert fingerprints(e) == fingerprints(d)
    assert stabilizer_dimension(e) == stabilizer_dimension(d) == 0


@given(seed=st.integers(0, 10 ** 6))
def test_gauge_invariance_cm(seed):
    rng = random.Random(seed)
    d = generate_cm(3, 1, rng)
    e = gauge_apply(random_gauge(d, rng), d)
    assert is_admissible(e) and fingerprints(e) == fingerprints(d)


def test_singular_gauge_rejected():
    d = generate_cm(2, 1)
    with pytest.raises(ValueError):
        gauge_apply([[[mpq(0), mpq(0)], [mpq(0), mpq(0)]]], d)


@pytest.mark.parametrize("dims_V,dims_W,tau", [
    ((1, 1), (1, 0), (1, 1)),
    ((1, 2), (1, 1), (mpq(1, 3), mpq(2, 7))),
    ((1, 1, 1), (1, 0, 0), (1, 2, 3)),
])
def test_cyclic_generation(dims_V, dims_W, tau):
    t = GroupAlgElem(len(tau), [mpq(v) for v in tau])
    d = generate_cyclic(dims_V, dims_W, t, random.Random(0))
    assert is_admissible(d) and is_stable(d)[0]
    # the tau|_V diagonal is chi_i(tau) on the eps^i block
    diag = [d.tau_on_V()[i][i] for i in range(d.n)]
    assert diag == [t.char_value(d.V.character_of(i)) for i in range(d.n)]


def test_cyclic_generation_failure():
    # W = 0 forces [B1,B2] = tau|_V, whose trace is nonzero
    with pytest.raises(GenerationFailure):
        generate_cyclic((1,), (0,), GroupAlgElem(1, [mpq(1)]), random.Random(0), attempts=3)


def test_json_roundtrip():
    d = generate_cyclic((1, 2), (1, 1), GroupAlgElem(2, [mpq(1, 3), mpq(2, 7)]), random.Random(1))
    e = QuiverData.from_json(json.loads(d.dumps()))
    assert e == d
    assert d.dumps() == e.dumps()
