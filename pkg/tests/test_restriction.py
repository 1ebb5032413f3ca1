import numpy as np
import pytest

from magwalk.checks import decoupling_support_violation, interior_trace_deviation
from magwalk.lattice import GaugeField, GaugeTransform, reduce_flux
from magwalk.measures import eigendecompose_unitary
from magwalk.restriction import (
    DecouplingError, boundary_sets, build_decoupled, restrict, restricted_walk,
    unitarity_deviation,
)
from magwalk.walks import StateVector, build_magnetic_walk


@pytest.mark.parametrize("L", [2, 3, 5, 9])
def test_boundary_set_sizes(L):
    b = boundary_sets(L)
    assert b.count("contour") == 8 * L + 4
    assert b.count("determining") == 8 * L + 1
    assert b.count("determining_up") == 8 * L + 1
    assert b.count("interior") == (2 * L + 1) ** 2
    assert b.sites("edge") <= b.sites("interior")
    assert not b.sites("contour") <= b.sites("interior")
    assert (-L - 1, 0) in b.sites("contour")


def test_boundary_sets_l5_examples():
    b = boundary_sets(5)
    assert b.count("contour") == 44 and b.count("determining") == 41


def test_contour_hull_is_graph_ball():
    L = 4
    b = boundary_sets(L)
    contour = b.sites("contour")
    hull = b.sites("contour_hull")
    assert contour <= hull
    # brute force: l1 distance at most 2 from some contour site
    x1, x2 = b.box.coords()
    expect = {(int(a), int(c)) for a, c in zip(x1.ravel(), x2.ravel())
              if min(abs(a - u) + abs(c - v) for u, v in contour) <= 2}
    assert hull == expect


def test_rejects_small_L():
    with pytest.raises(ValueError):
        boundary_sets(1)


def test_difference_support_l6():
    f = reduce_flux(2, 5)
    assert decoupling_support_violation(f, 6) == 0.0
    # the difference is not trivially zero
    b = boundary_sets(6)
    g = GaugeField(f)
    d = build_magnetic_walk(g, b.box).matrix() - build_decoupled(g, 6).matrix()
    assert abs(d).max() > 0.1


def test_interior_point_mass_unchanged(rng):
    L = 8
    g = GaugeField(reduce_flux(3, 7))
    w_d = build_decoupled(g, L)
    w = build_magnetic_walk(g, w_d.box)
    for x in [(0, 0), (2, -3), (-3, 3)]:
        for s in (+1, -1):
            psi = StateVector.point(w_d.box, x, s)
            assert np.array_equal(w_d.apply(psi).flat, w.apply(psi).flat)


def test_two_forms_agree_at_zero_flux():
    g = GaugeField(reduce_flux(0, 1))
    a = build_decoupled(g, 4, form="gauge").matrix(dense=True)
    b = build_decoupled(g, 4, form="coins").matrix(dense=True)
    assert np.max(np.abs(a - b)) <= 1e-13


def test_coin_form_needs_symmetric_gauge():
    with pytest.raises(ValueError):
        build_decoupled(GaugeField(reduce_flux(1, 3), "landau"), 3, form="coins")


@pytest.mark.parametrize("pq", [(0, 1), (2, 5)])
def test_unitarity_l4(pq):
    w_l = restricted_walk(GaugeField(reduce_flux(*pq)), 4)
    assert w_l.shape == (162, 162)
    assert unitarity_deviation(w_l) <= 1e-12


def test_unitarity_sweep(rng):
    for _ in range(10):
        q = int(rng.integers(1, 30))
        f = reduce_flux(int(rng.integers(0, q)), q)
        for L in range(2, 15):
            w_l = restrict(build_decoupled(GaugeField(f), L), L, dense=False)
            assert unitarity_deviation(w_l) <= 1e-12


def test_missing_coin_is_detected():
    w_d = build_decoupled(GaugeField(reduce_flux(1, 3)), 4, insert_coin=False)
    with pytest.raises(DecouplingError):
        restrict(w_d, 4)
    assert unitarity_deviation(restrict(w_d, 4, check=False)) > 0.5


def test_interior_trace_equality_small():
    assert interior_trace_deviation(reduce_flux(3, 5), 8, 3) <= 1e-12


def test_gauge_covariance_of_eigenphases(rng):
    g = GaugeField(reduce_flux(3, 8))
    a = eigendecompose_unitary(restricted_walk(g, 5), vectors=False)
    gt = g.with_transform(GaugeTransform.random(9, rng))
    b = eigendecompose_unitary(restricted_walk(gt, 5), vectors=False)
    d = np.abs(np.exp(1j * a)[:, None] - np.exp(1j * b)[None, :])
    assert max(d.min(axis=0).max(), d.min(axis=1).max()) <= 1e-10
    # Landau gauge gives the same multiset as well
    c = eigendecompose_unitary(restricted_walk(GaugeField(g.flux, "landau"), 5), vectors=False)
    d = np.abs(np.exp(1j * a)[:, None] - np.exp(1j * c)[None, :])
    assert max(d.min(axis=0).max(), d.min(axis=1).max()) <= 1e-10
