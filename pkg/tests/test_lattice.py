import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magwalk.lattice import (
    HADAMARD, IDENTITY2, SIGMA1, TWO_PI, Box, GaugeField, GaugeTransform,
    angle_distance, check_unitary, classify_coin, continued_fraction_convergents,
    gauge_phase, golden_convergents, parse_flux, plaquette_phase, reduce_flux,
    reduced_fractions,
)
from magwalk.walks import quasiperiodic_coins


def test_reduce_examples():
    f = reduce_flux(2, 4)
    assert (f.numerator, f.denominator) == (1, 2)
    assert f.value == pytest.approx(math.pi, abs=1e-15)
    assert reduce_flux(0, 1).value == 0.0
    f = reduce_flux(-1, 3)
    assert (f.numerator, f.denominator) == (2, 3)
    assert f.value == pytest.approx(4 * math.pi / 3, abs=1e-15)


@pytest.mark.parametrize("q", [0, -3])
def test_reduce_rejects_bad_denominator(q):
    with pytest.raises(ValueError):
        reduce_flux(1, q)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**4))
def test_reduce_matches_fraction(p, q):
    f = reduce_flux(p, q)
    ref = Fraction(p, q) % 1
    assert Fraction(f.numerator, f.denominator) == ref
    assert math.gcd(f.numerator, f.denominator) == 1
    assert 0 <= f.numerator < f.denominator
    assert 0.0 <= f.value < TWO_PI


def test_parse_flux():
    assert parse_flux(" 6/10 ") == reduce_flux(3, 5)
    assert str(parse_flux("3/5")) == "3/5"
    with pytest.raises(ValueError):
        parse_flux("1/0")


def test_reduced_fractions_small():
    assert [str(f) for f in reduced_fractions(2)] == ["0/1", "1/2"]
    # Euler-phi count: sum_{q<=Q} phi(q)
    phi = lambda n: sum(math.gcd(k, n) == 1 for k in range(n))
    assert len(reduced_fractions(12)) == sum(phi(q) for q in range(1, 13))


def test_golden_convergents():
    assert [str(f) for f in golden_convergents(3)] == ["1/2", "2/3", "3/5"]
    assert [str(f) for f in golden_convergents(1)] == ["1/2"]
    seq = golden_convergents(6)
    assert str(seq[-1]) == "13/21"
    qs = [f.q for f in seq]
    assert all(a < b for a, b in zip(qs, qs[1:]))


def test_continued_fraction_convergents_golden():
    x = (math.sqrt(5) - 1) / 2
    got = [str(f) for f in continued_fraction_convergents(x, 5)]
    assert got == ["1/2", "2/3", "3/5", "5/8", "8/13"]
    # sqrt(2) - 1 = [0; 2, 2, 2, ...]
    got = [str(f) for f in continued_fraction_convergents(math.sqrt(2) - 1, 3)]
    assert got == ["1/2", "2/5", "5/12"]


def test_classify_coin():
    assert classify_coin(HADAMARD) == "generic"
    assert classify_coin(IDENTITY2) == "diagonal"
    assert classify_coin(SIGMA1) == "off_diagonal"
    check_unitary(HADAMARD)
    with pytest.raises(ValueError):
        check_unitary(2 * HADAMARD)


def test_gauge_phase_examples():
    g = GaugeField(reduce_flux(1, 2))
    assert gauge_phase(g, (0, 3), 1) == pytest.approx(np.exp(-1.5j * np.pi), abs=1e-14)
    gl = GaugeField(reduce_flux(2, 7), "landau")
    for x in [(0, 0), (3, -5), (-11, 4)]:
        assert gauge_phase(gl, x, 2) == 1
    gs = GaugeField(reduce_flux(3, 11))
    assert gauge_phase(gs, (0, 0), 1) == 1 and gauge_phase(gs, (0, 0), 2) == 1


def test_plaquette_examples(rng):
    f = reduce_flux(1, 3)
    assert plaquette_phase(GaugeField(f), (5, -2)) == pytest.approx(2 * np.pi / 3, abs=1e-12)
    assert plaquette_phase(GaugeField(f, "landau"), (0, 0)) == pytest.approx(2 * np.pi / 3, abs=1e-12)
    g = GaugeField(reduce_flux(1, 4)).with_transform(GaugeTransform.random(12, rng))
    assert g.kind == "transformed"
    x1, x2 = Box(10).coords()
    assert np.max(angle_distance(plaquette_phase(g, x1, x2), np.pi / 2)) <= 1e-12


def _brute_plaquette(g, x):
    # direct loop product, written independently of the vectorised form
    u1 = lambda y: gauge_phase(g, y, 1)
    u2 = lambda y: gauge_phase(g, y, 2)
    a, b = x
    prod = np.conj(u1((a, b))) * np.conj(u2((a + 1, b))) * u1((a, b + 1)) * u2((a, b))
    return np.mod(-np.angle(prod), TWO_PI)


@pytest.mark.parametrize("kind", ["symmetric", "landau", "transformed"])
@pytest.mark.parametrize("pq", [(0, 1), (1, 2), (2, 5), (5, 8), (7, 19)])
def test_plaquette_homogeneity_20x20(kind, pq, rng):
    f = reduce_flux(*pq)
    if kind == "transformed":
        g = GaugeField(f).with_transform(GaugeTransform.random(11, rng))
    else:
        g = GaugeField(f, kind)
    x1, x2 = np.meshgrid(np.arange(-10, 10), np.arange(-10, 10), indexing="ij")
    ph = plaquette_phase(g, x1, x2)
    assert np.max(angle_distance(ph, f.value)) <= 1e-12
    for x in [(-10, -10), (3, 7), (9, -4)]:
        assert angle_distance(_brute_plaquette(g, x), f.value) <= 1e-12


@given(st.integers(0, 40), st.integers(1, 40), st.integers(-30, 30), st.integers(-30, 30))
def test_link_phases_unimodular(p, q, a, b):
    for kind in ("symmetric", "landau"):
        g = GaugeField(reduce_flux(p, q), kind)
        for alpha in (1, 2):
            assert abs(abs(gauge_phase(g, (a, b), alpha)) - 1) <= 1e-14


def test_gauge_transform_invariance(rng):
    f = reduce_flux(3, 7)
    g = GaugeField(f)
    gt = g.with_transform(GaugeTransform.random(8, rng))
    x1, x2 = Box(6).coords()
    assert np.max(angle_distance(plaquette_phase(g, x1, x2), plaquette_phase(gt, x1, x2))) <= 1e-12


@pytest.mark.parametrize("pq", [(0, 1), (1, 2), (1, 3), (3, 5), (5, 13)])
def test_quasiperiodic_coins_generic(pq):
    coins = quasiperiodic_coins(reduce_flux(*pq))
    x1, x2 = Box(7).coords()
    for j in (1, 2):
        for c in coins.coin(j, x1, x2).reshape(-1, 2, 2):
            assert classify_coin(c) == "generic"


def test_box_indexing_bijection():
    box = Box(3, center=(1, -2))
    assert box.n_sites == 49 and box.dim == 98
    seen = set()
    for x in box.sites():
        for s in (+1, -1):
            k = box.index(tuple(x), s)
            assert box.unindex(k) == (tuple(int(v) for v in x), s)
            seen.add(k)
    assert seen == set(range(box.dim))
    assert box.contains((4, 1)) and not box.contains((5, 1))
