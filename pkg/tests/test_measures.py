import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from magwalk.lattice import TWO_PI, Box, GaugeField, reduce_flux
from magwalk.measures import (
    NearDegenerateCoinError, SpectralMeasure, clusters, core_weighted_measure,
    determining_mask, dos_measure, eigendecompose_unitary, max_multiplicity,
    moment_compare, multiplicity_bound, propagate_eigenfunction, propagation_map,
    propagation_residuals, sdf_moments,
)
from magwalk.restriction import restricted_walk
from magwalk.walks import build_magnetic_walk, constant_coins, quasiperiodic_coins


def test_eigendecompose_examples():
    assert np.all(eigendecompose_unitary(np.eye(10), vectors=False) == 0)
    ph = eigendecompose_unitary(np.diag([1j, -1j]), vectors=False)
    assert np.allclose(ph, [np.pi / 2, 3 * np.pi / 2], atol=1e-15)
    with pytest.raises(ValueError):
        eigendecompose_unitary(np.diag([1.0, 2.0]))


def test_eigendecompose_w_l():
    w_l = restricted_walk(GaugeField(reduce_flux(0, 1)), 4)
    ph, v = eigendecompose_unitary(w_l)
    assert ph.size == 162
    assert np.max(np.linalg.norm(w_l @ v - v * np.exp(1j * ph), axis=0)) <= 1e-8
    assert np.max(np.abs(v.conj().T @ v - np.eye(162))) <= 1e-10


def test_dos_basic():
    L = 4
    w_l = restricted_walk(GaugeField(reduce_flux(2, 5)), L)
    d = dos_measure(w_l, L)
    assert d.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert d.cdf(TWO_PI - 1e-12) == pytest.approx(1.0, abs=1e-12)
    mu = d.moments(4)
    for t in range(5):
        tr = np.trace(np.linalg.matrix_power(w_l, t)) / w_l.shape[0]
        assert mu(t) == pytest.approx(tr, abs=1e-12)
    assert mu(-2) == pytest.approx(np.conj(mu(2)))
    assert d.meta["site_normalized_atom"] == pytest.approx(2 * d.meta["max_multiplicity"] / 162)
    with pytest.raises(ValueError):
        dos_measure(w_l, 5)


def test_sdf_examples():
    f = reduce_flux(3, 8)
    m = sdf_moments(f, 3)
    assert m(0) == 1 and m(1) == 0
    box = Box(3)
    w = build_magnetic_walk(GaugeField(reduce_flux(0, 1)), box).matrix(dense=True)
    w2 = w @ w
    k = [box.index((0, 0), s) for s in (+1, -1)]
    ref = 0.5 * (w2[k[0], k[0]] + w2[k[1], k[1]])
    assert sdf_moments(reduce_flux(0, 1), 2)(2) == pytest.approx(ref, abs=1e-15)
    with pytest.raises(ValueError):
        sdf_moments(f, -1)


def test_sdf_gauge_independent():
    f = reduce_flux(2, 7)
    a = sdf_moments(f, 6, "symmetric").values
    b = sdf_moments(f, 6, "landau").values
    assert np.max(np.abs(a - b)) <= 1e-13


def test_moment_compare_examples():
    f = reduce_flux(3, 5)
    L = 6
    w_l = restricted_walk(GaugeField(f), L)
    dos = dos_measure(w_l, L)
    mc = moment_compare(dos, sdf_moments(f, 5), 5)
    assert mc.deviations[0] <= 1e-12
    assert mc.deviations[1] == pytest.approx(abs(np.trace(w_l)) / w_l.shape[0], abs=1e-12)
    with pytest.raises(ValueError):
        moment_compare(dos, sdf_moments(f, 2), 4)


def test_moment_deviation_boundary_scaling():
    f = reduce_flux(3, 5)
    T = 5
    sdf = sdf_moments(f, T)
    devs = {}
    for L in (6, 12):
        devs[L] = moment_compare(dos_measure(restricted_walk(GaugeField(f), L), L), sdf, T).deviations
    t = np.arange(1, T + 1)
    assert np.all(devs[12][1:] <= 20 * t / 12)
    # boundary-layer counting: roughly halves when L doubles
    assert np.all(devs[12][1:] <= 0.75 * devs[6][1:])


def test_multiplicity_examples():
    assert max_multiplicity([0.1, 0.2, 3.0]) == 1
    assert max_multiplicity(eigendecompose_unitary(np.eye(7), vectors=False)) == 7
    # clusters wrap through angle 0
    groups = clusters([1e-10, TWO_PI - 1e-10, 2.0], tol=1e-8)
    assert sorted(len(g) for g in groups) == [1, 2]
    w_l = restricted_walk(GaugeField(reduce_flux(2, 5)), 5)
    assert max_multiplicity(eigendecompose_unitary(w_l, vectors=False)) <= 88
    assert multiplicity_bound(5) == 88


@pytest.mark.parametrize("pq", [(0, 1), (1, 3), (3, 5), (5, 8), (2, 7)])
def test_atom_bound(pq):
    f = reduce_flux(*pq)
    for L in (4, 6, 8, 10):
        d = dos_measure(restricted_walk(GaugeField(f), L), L)
        assert d.meta["site_normalized_atom"] <= 8 / (2 * L + 1)


def test_atom_decay_golden():
    f = reduce_flux(5, 8)
    atoms = [dos_measure(restricted_walk(GaugeField(f), L), L).meta["site_normalized_atom"]
             for L in (4, 6, 8, 10)]
    assert all(a > b for a, b in zip(atoms, atoms[1:]))


weights = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=20)


@given(weights, st.data())
def test_cdf_and_moments_consistent(w, data):
    n = len(w)
    ph = np.array(data.draw(st.lists(st.floats(0, TWO_PI - 1e-6), min_size=n, max_size=n)))
    w = np.array(w) / np.sum(w)
    # renormalise exactly to pass the constructor check
    w[-1] = 1.0 - w[:-1].sum()
    if w[-1] <= 0:
        return
    m = SpectralMeasure(ph, w)
    # Stieltjes integral of exp(i t theta) against the jumps of the CDF
    pts = np.unique(m.eigenphases)
    jumps = np.diff(np.concatenate([[0.0], m.cdf(pts)]))
    for t in range(4):
        assert np.sum(jumps * np.exp(1j * t * pts)) == pytest.approx(m.moments(t)(t), abs=1e-12)
    theta = data.draw(st.floats(-20, 20))
    # periodicity is checked away from atoms, where rounding of theta + 2 pi matters
    assume(np.min(np.abs(np.mod(theta - pts + np.pi, TWO_PI) - np.pi)) > 1e-9)
    assert m.cdf(theta + TWO_PI) == pytest.approx(m.cdf(theta) + 1, abs=1e-12)
    assert m.moments(0)(0) == pytest.approx(1.0, abs=1e-12)


def test_closed_arc_convention():
    m = SpectralMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    assert m.cdf(0.0) == 0.5
    assert m.cdf(1.0) == 1.0
    assert m.cdf(-1e-9) == 0.0


def test_core_weighted_measure():
    L = 8
    w_l = restricted_walk(GaugeField(reduce_flux(1, 3)), L)
    m = core_weighted_measure(w_l, L, depth=4)
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        core_weighted_measure(w_l, L, depth=9)


def test_propagation_zero_data():
    L = 4
    coins = quasiperiodic_coins(reduce_flux(1, 5))
    n = int(determining_mask(L).sum())
    res = propagate_eigenfunction(np.zeros((n, 2)), np.exp(0.3j), L, coins)
    assert np.all(res.psi.flat == 0)
    with pytest.raises(ValueError):
        propagate_eigenfunction(np.zeros((n + 1, 2)), 1.0, L, coins)


@pytest.mark.parametrize("direction", ["down", "up"])
def test_propagation_residuals(direction, rng):
    L = 4
    coins = quasiperiodic_coins(reduce_flux(1, 5))
    n = int(determining_mask(L, direction).sum())
    assert n == 8 * L + 1
    z = np.exp(1j * np.pi / 3)
    b = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    res = propagate_eigenfunction(b, z, L, coins, direction)
    assert len(res.enforced) > 0
    assert np.max(propagation_residuals(res, z, coins)) <= 1e-9
    assert np.linalg.matrix_rank(propagation_map(z, L, coins, direction)) <= 2 * (8 * L + 1)


def test_propagation_needs_nondegenerate_coins():
    L = 3
    n = int(determining_mask(L).sum())
    coins = constant_coins(np.eye(2))
    with pytest.raises(NearDegenerateCoinError):
        propagate_eigenfunction(np.ones((n, 2)), 1.0, L, coins)
