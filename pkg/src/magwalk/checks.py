"""Invariant suite run by ``magwalk check``.

Each check returns a :class:`CheckResult` holding the measured value and the
bound it must not exceed. Parameters are kept small so the whole suite runs
in well under a minute on one core.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .analysis import band_symmetry_report, compare_1d_2d
from .bloch import band_spectrum, bloch_matrix, spectrum_1d
from .arcs import hausdorff_distance
from .lattice import (
    Box, GaugeField, GaugeTransform, angle_distance, classify_coin, plaquette_phase,
    reduce_flux, reduced_fractions,
)
from .measures import (
    SpectralMeasure, core_weighted_measure, covariance_check, diagonal_spread, dos_measure,
    eigendecompose_unitary, max_multiplicity, moment_compare, multiplicity_bound,
    propagate_eigenfunction, propagation_map, propagation_residuals, sdf_moments,
    determining_mask, total_variation,
)
from .restriction import (
    DecouplingError, boundary_sets, build_decoupled, interior_indices, restrict,
    unitarity_deviation,
)
from .walks import (
    build_coin_walk, build_magnetic_walk, quasiperiodic_coins,
)

FAULTS = ("skip-decoupling-coin",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    bound: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def _result(name, value, bound):
    value = float(value)
    return CheckResult(name, value, float(bound), bool(value <= bound))


# -- reusable measurements ----------------------------------------------------


def sublattice_deviation(flux, L: int = 5) -> float:
    """``max |J W J + W|`` with ``J = (-1)^{x_1}`` on a box."""
    box = Box(L)
    w = build_magnetic_walk(GaugeField(flux), box).matrix(dense=True)
    x1 = box.sites()[:, 0]
    j = np.repeat((-1.0) ** x1, 2)
    return float(np.max(np.abs(j[:, None] * w * j[None, :] + w)))


def decoupled_unitarity(flux, L: int, insert_coin: bool = True, gauge: str = "symmetric"):
    w_d = build_decoupled(GaugeField(flux, gauge), L, insert_coin=insert_coin)
    return unitarity_deviation(restrict(w_d, L, dense=False, check=False))


def decoupling_support_violation(flux, L: int, gauge: str = "symmetric") -> float:
    """Largest ``|W - W_d|`` entry whose row or column site is outside ``(Delta Lambda)_2``."""
    sets = boundary_sets(L)
    g = GaugeField(flux, gauge)
    w = build_magnetic_walk(g, sets.box).matrix().tocsr()
    w_d = build_decoupled(g, L).matrix().tocsr()
    d = (w - w_d).tocoo()
    hull = np.repeat(sets.contour_hull.ravel(), 2)
    outside = ~(hull[d.row] & hull[d.col])
    vals = np.abs(d.data[outside])
    return float(vals.max()) if vals.size else 0.0


def interior_trace_deviation(flux, L: int, T: int, gauge: str = "symmetric") -> float:
    """``max |<x,s|W_L^t|x,s> - <x,s|W^t|x,s>|`` over ``t <= T`` and sites at depth ``> 2t``.

    The whole-space diagonal is taken from the truncated walk on a box
    ``T + 1`` sites larger than ``Lambda_L``, which no path of length ``T``
    from ``Lambda_L`` can leave.
    """
    g = GaugeField(flux, gauge)
    w_l = restrict(build_decoupled(g, L), L, dense=False)
    big = Box(L + T + 1)
    w = build_magnetic_walk(g, big).matrix().tocsr()
    idx = interior_indices(L, big)
    sites = Box(L).sites()
    depth = L - np.max(np.abs(sites), axis=1)
    a = sp.identity(w_l.shape[0], format="csr", dtype=complex)
    b = sp.identity(w.shape[0], format="csr", dtype=complex)
    worst = 0.0
    for t in range(1, T + 1):
        a = (w_l @ a).tocsr()
        b = (w @ b).tocsr()
        keep = np.repeat(depth > 2 * t, 2)
        da = a.diagonal()[keep]
        db = b.diagonal()[idx][keep]
        if da.size:
            worst = max(worst, float(np.max(np.abs(da - db))))
    return worst


def builder_difference(flux, L: int = 6) -> float:
    """Gauge-shift form versus quasi-periodic-coin form on interior sites."""
    box = Box(L + 2)
    a = build_magnetic_walk(GaugeField(flux), box).matrix(dense=True)
    b = build_coin_walk(flux, box).matrix(dense=True)
    idx = interior_indices(L, box)
    return float(np.max(np.abs(a[np.ix_(idx, idx)] - b[np.ix_(idx, idx)])))


def plaquette_homogeneity(flux, rng, half: int = 10) -> float:
    box = Box(half)
    x1, x2 = box.coords()
    worst = 0.0
    t = GaugeTransform.random(half + 2, rng)
    for g in (GaugeField(flux, "symmetric"), GaugeField(flux, "landau"),
              GaugeField(flux, "symmetric", t)):
        phases = plaquette_phase(g, x1, x2)
        worst = max(worst, float(np.max(angle_distance(phases, flux.value))))
    return worst


def gauge_robustness_tv(flux, L: int = 12, n_k: int = 64, bins: int = 32,
                        core: bool = True) -> float:
    """TV distance between Bloch-band eigenphase histogram and the finite-volume one."""
    ph = band_spectrum(flux, n_k).branches.ravel()
    bands = SpectralMeasure(ph, np.full(ph.size, 1.0 / ph.size), "bands")
    w_l = restrict(build_decoupled(GaugeField(flux), L), L)
    fv = core_weighted_measure(w_l, L) if core else dos_measure(w_l, L)
    return total_variation(bands, fv, bins)


# -- suite --------------------------------------------------------------------


def run_checks(fault: str | None = None, seed: int = 0) -> list[CheckResult]:
    """Run every invariant; ``fault`` injects a deliberate defect."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    rng = np.random.default_rng(seed)
    fluxes = [reduce_flux(p, q) for p, q in ((0, 1), (1, 2), (1, 3), (2, 5), (3, 5), (5, 8))]
    out = []

    out.append(_result("plaquette_homogeneity",
                       max(plaquette_homogeneity(f, rng) for f in fluxes), 1e-12))
    coins_ok = all(classify_coin(c) == "generic"
                   for f in fluxes for j in (1, 2)
                   for c in quasiperiodic_coins(f).coin(j, *Box(6).coords()).reshape(-1, 2, 2))
    out.append(_result("quasiperiodic_coins_generic", 0.0 if coins_ok else 1.0, 0.0))
    out.append(_result("builder_cross_check", max(builder_difference(f) for f in fluxes), 1e-12))
    out.append(_result("sublattice_JWJ=-W", max(sublattice_deviation(f) for f in fluxes), 1e-13))

    insert = fault != "skip-decoupling-coin"
    dev = max(decoupled_unitarity(f, L, insert) for f in fluxes for L in (2, 3, 5, 8))
    out.append(_result("decoupled_unitarity", dev, 1e-12))
    out.append(_result("decoupling_support",
                       max(decoupling_support_violation(f, 6) for f in fluxes[2:4]), 0.0))
    try:
        out.append(_result("interior_trace_equality",
                           max(interior_trace_deviation(f, 8, 3) for f in fluxes[3:5]), 1e-12))
    except DecouplingError:
        out.append(CheckResult("interior_trace_equality", float("inf"), 1e-12, False))

    f = reduce_flux(2, 5)
    g = GaugeField(f)
    try:
        base = eigendecompose_unitary(restrict(build_decoupled(g, 4), 4), vectors=False)
        t = GaugeTransform.random(8, rng)
        other = eigendecompose_unitary(
            restrict(build_decoupled(g.with_transform(t), 4), 4), vectors=False)
        gdev = float(np.max(angle_distance(np.sort(base), np.sort(other))))
    except DecouplingError:
        gdev = float("inf")
    out.append(_result("decoupling_gauge_covariance", gdev, 1e-10))

    sites = [tuple(x) for x in rng.integers(-15, 16, size=(20, 2))]
    out.append(_result("diagonal_x_independence",
                       max(diagonal_spread(f, t, sites) for t in range(5)), 1e-12))
    out.append(_result("covariance_identity",
                       max(covariance_check(f, t, trials=20, rng=rng) for t in range(4)), 1e-11))

    m = sdf_moments(f, 4)
    exact = max(abs(m(0) - 1), abs(m(1)))
    out.append(_result("sdf_moments_t0_t1", exact, 1e-14))

    try:
        w_l = restrict(build_decoupled(GaugeField(reduce_flux(3, 5)), 6), 6)
        mult = max_multiplicity(eigendecompose_unitary(w_l, vectors=False))
    except DecouplingError:
        mult = float("inf")
    out.append(_result("multiplicity_bound_L6", mult, multiplicity_bound(6)))

    L = 4
    coins = quasiperiodic_coins(f)
    n = int(determining_mask(L).sum())
    z = np.exp(1j * np.pi / 3)
    res = propagate_eigenfunction(rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2)),
                                  z, L, coins)
    out.append(_result("propagation_residual", np.max(propagation_residuals(res, z, coins)), 1e-9))
    rank = np.linalg.matrix_rank(propagation_map(z, L, coins))
    out.append(_result("propagation_rank", rank, 2 * (8 * L + 1)))

    worst = 0.0
    for fl in reduced_fractions(6):
        b = band_spectrum(fl, 16)
        if b.n_branches != 2 * fl.q:
            worst = max(worst, 1.0)
        worst = max(worst, b.max_modulus_error)
    out.append(_result("band_count_and_modulus", worst, 1e-10))
    fib = bloch_matrix(reduce_flux(7, 19), 0.3, 0.1)
    out.append(_result("fiber_unitarity", unitarity_deviation(fib), 1e-12))
    sym = max(band_symmetry_report(fl, 16).max() for fl in reduced_fractions(8))
    out.append(_result("butterfly_symmetries", sym, 1e-8))

    c = compare_1d_2d(reduce_flux(3, 5), theta_grid=16, n_k=32)
    out.append(_result("compare_1d_2d_3/5", c.distance, 0.1))
    coin_eq = max(hausdorff_distance(spectrum_1d(fl, th, 32, "sigma1"),
                                     spectrum_1d(fl, th, 32, "sigma2"))
                  for fl in fluxes[1:] for th in (0.0, 0.7, 2.1))
    out.append(_result("coin_equivalence_sigma1_sigma2", coin_eq, 1e-10))

    dos = dos_measure(w_l, 6)
    mc = moment_compare(dos, sdf_moments(reduce_flux(3, 5), 4), 4)
    out.append(_result("dos_moment_t0", mc.deviations[0], 1e-12))
    return out


__all__ = [
    "CheckResult", "FAULTS", "builder_difference", "decoupled_unitarity",
    "decoupling_support_violation", "gauge_robustness_tv", "interior_trace_deviation",
    "plaquette_homogeneity", "run_checks", "sublattice_deviation",
]
