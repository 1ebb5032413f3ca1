"""Eigenphase measures, trace moments, multiplicity bounds and eigenfunction propagation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .lattice import TWO_PI, Box, Flux, GaugeField, wrap_angle
from .walks import CoinField, StateVector, build_magnetic_walk, matrix_element_block

UNITARY_INPUT_TOL = 1e-10
RESIDUAL_TOL = 1e-8
DEFAULT_CLUSTER_TOL = 1e-8


class NearDegenerateCoinError(ValueError):
    """A coin entry needed as a divisor is (numerically) zero."""


def eigendecompose_unitary(m, vectors: bool = True):
    """Eigenphases in [0, 2pi) (ascending) and orthonormal eigenvectors.

    Uses the complex Schur form, which is diagonal for normal matrices.

    Raises
    ------
    ValueError
        If ``m`` is not unitary within 1e-10.
    numpy.linalg.LinAlgError
        If an eigenpair residual exceeds 1e-8.
    """
    m = np.asarray(m.toarray() if hasattr(m, "toarray") else m, dtype=complex)
    n = m.shape[0]
    dev = np.max(np.abs(m.conj().T @ m - np.eye(n))) if n else 0.0
    if dev > UNITARY_INPUT_TOL:
        raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
    t, z = scipy.linalg.schur(m, output="complex")
    lam = np.diag(t)
    if np.max(np.abs(np.abs(lam) - 1.0), initial=0.0) > RESIDUAL_TOL:
        raise np.linalg.LinAlgError("eigenvalues off the unit circle")
    res = np.linalg.norm(m @ z - z * lam, axis=0)
    if np.max(res, initial=0.0) > RESIDUAL_TOL:
        raise np.linalg.LinAlgError(f"eigenpair residual {np.max(res):.3e} exceeds tolerance")
    phases = wrap_angle(np.angle(lam))
    order = np.argsort(phases, kind="stable")
    if vectors:
        return phases[order], z[:, order]
    return phases[order]


@dataclass(frozen=True)
class MomentSequence:
    """Fourier coefficients ``mu(t) = int exp(i t theta) dmu`` for ``t = 0..T``."""

    values: np.ndarray
    source: str = ""

    @property
    def T(self) -> int:
        return len(self.values) - 1

    def __call__(self, t: int) -> complex:
        if t < 0:
            return complex(np.conj(self.values[-t]))
        return complex(self.values[t])

    def to_records(self):
        return [{"t": t, "re": float(v.real), "im": float(v.imag)}
                for t, v in enumerate(self.values)]


@dataclass(frozen=True)
class SpectralMeasure:
    """Atomic probability measure on the circle.

    The distribution function follows the closed-arc convention
    ``N(theta) = mu({exp(i t): 0 <= t <= theta})`` with
    ``N(theta + 2 pi) = N(theta) + 1``.
    """

    eigenphases: np.ndarray
    weights: np.ndarray
    provenance: str = "dos"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ph = wrap_angle(np.asarray(self.eigenphases, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        order = np.argsort(ph, kind="stable")
        object.__setattr__(self, "eigenphases", ph[order])
        object.__setattr__(self, "weights", w[order])
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        turns = np.floor(theta / TWO_PI)
        base = theta - turns * TWO_PI
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        idx = np.searchsorted(self.eigenphases, base, side="right")
        return cum[idx] + turns

    def moments(self, T: int) -> MomentSequence:
        t = np.arange(T + 1)
        vals = np.exp(1j * np.outer(t, self.eigenphases)) @ self.weights
        return MomentSequence(vals, self.provenance)

    def histogram(self, bins: int = 64):
        edges = np.linspace(0.0, TWO_PI, bins + 1)
        h, _ = np.histogram(self.eigenphases, bins=edges, weights=self.weights)
        return h, edges


def dos_measure(w_l, L: int | None = None) -> SpectralMeasure:
    """Eigenvalue counting measure of a unitary restriction.

    Every eigenphase carries weight ``1 / (2 |Lambda_L|)``, i.e. one over
    the matrix dimension. ``meta['site_normalized_atom']`` holds the
    largest atom under the per-site normalisation ``1 / |Lambda_L|`` used
    by the multiplicity bound.
    """
    phases = eigendecompose_unitary(w_l, vectors=False)
    n = phases.size
    meta = {"dim": n}
    if L is not None:
        meta["L"] = L
        if n != 2 * (2 * L + 1) ** 2:
            raise ValueError(f"dimension {n} does not match L={L}")
    meta["max_multiplicity"] = max_multiplicity(phases)
    meta["site_normalized_atom"] = 2.0 * meta["max_multiplicity"] / n
    return SpectralMeasure(phases, np.full(n, 1.0 / n), f"dos(L={L})", meta)


def sdf_moments(flux: Flux, T: int, gauge: str = "symmetric") -> MomentSequence:
    """Exact trace moments ``tau_2(W^t) = (1/2) sum_s <0,s|W^t|0,s>``, ``t = 0..T``.

    A window of half-width ``T + 1`` around the origin holds every path of
    length ``<= T``, so the truncated walk gives the full-space values.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    box = Box(T + 1)
    w = build_magnetic_walk(GaugeField(flux, gauge), box)
    vals = np.zeros(T + 1, dtype=complex)
    for s in (+1, -1):
        k = box.index((0, 0), s)
        v = np.zeros(box.dim, dtype=complex)
        v[k] = 1.0
        for t in range(T + 1):
            vals[t] += 0.5 * v[k]
            if t < T:
                v = w.apply(v)
    return MomentSequence(vals, f"sdf({flux})")


@dataclass(frozen=True)
class MomentComparison:
    deviations: np.ndarray
    L: int | None

    def max(self) -> float:
        return float(np.max(self.deviations))


def moment_compare(dos: SpectralMeasure, sdf: MomentSequence, T: int) -> MomentComparison:
    if T > sdf.T:
        raise ValueError(f"SDF moments only known up to t={sdf.T}")
    mu = dos.moments(T).values
    dev = np.abs(mu - sdf.values[: T + 1])
    return MomentComparison(dev, dos.meta.get("L"))


def clusters(phases, tol: float = DEFAULT_CLUSTER_TOL):
    """Single-linkage clusters of sorted phases on the circle (list of index arrays)."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        return []
    order = np.argsort(phases, kind="stable")
    ph = phases[order]
    cut = np.flatnonzero(np.diff(ph) > tol) + 1
    groups = np.split(order, cut)
    wrap_gap = ph[0] + TWO_PI - ph[-1]
    if len(groups) > 1 and wrap_gap <= tol:
        groups[0] = np.concatenate([groups[-1], groups[0]])
        groups.pop()
    return groups


def max_multiplicity(phases, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> int:
    """Size of the largest single-linkage cluster of eigenphases."""
    groups = clusters(phases, cluster_tol)
    return max((g.size for g in groups), default=0)


def multiplicity_bound(L: int) -> int:
    """``8 (2L + 1)``; the determining set gives the sharper ``2 (8L + 1)``."""
    return 8 * (2 * L + 1)


# -- eigenfunction propagation ----------------------------------------------


def determining_mask(L: int, direction: str = "down") -> np.ndarray:
    """Mask on ``Box(L)`` of the set from which eigenfunctions are rebuilt."""
    box = Box(L)
    x1, x2 = box.coords()
    rows = [-L, L - 1, L] if direction == "down" else [-L, -L + 1, L]
    if direction not in ("down", "up"):
        raise ValueError("direction must be 'down' or 'up'")
    return (x1 == -L) | np.isin(x2, rows)


@dataclass
class PropagationResult:
    psi: StateVector
    enforced: list          # [(x1, x2, s)] equations imposed during propagation
    direction: str


def _coin_entry(coins: CoinField, j, x1, x2, a, b, floor=None):
    c = coins.coin(j, x1, x2)[..., a, b]
    if floor is not None and abs(c) < floor:
        raise NearDegenerateCoinError(
            f"coin C_{j}({x1},{x2})[{a + 1}{b + 1}] = {c:.3e} too small to divide by")
    return complex(c)


def propagate_eigenfunction(boundary, z: complex, L: int, coins: CoinField,
                            direction: str = "down", floor: float = 1e-10
                            ) -> PropagationResult:
    """Extend boundary data to a solution of ``W psi = z psi`` inside ``Lambda_L``.

    Parameters
    ----------
    boundary : array, shape (n_D, 2)
        Values ``psi(x, +), psi(x, -)`` on the determining set, sites in
        ``Box(L)`` order (see :func:`determining_mask`).
    z : complex
        Spectral parameter on the unit circle.
    coins : CoinField
        Coins of a walk ``S_1 C_1 S_2 C_2`` with plain shifts.
    direction : {'down', 'up'}
        ``'down'`` needs ``C_2[12]`` and ``C_1[21]`` nonzero (coins not
        diagonal); ``'up'`` needs ``C_2[22]`` and ``C_1[22]`` nonzero (not
        off-diagonal).

    Each column ``x_1 = -L+1, ..., L`` is filled in two sweeps: spin-up
    values from the spin-up equation one column to the left, then spin-down
    values from the spin-down equation, row by row away from the two given
    rows.
    """
    box = Box(L)
    mask = determining_mask(L, direction)
    boundary = np.asarray(boundary, dtype=complex)
    if boundary.shape != (int(mask.sum()), 2):
        raise ValueError(f"boundary data must have shape ({int(mask.sum())}, 2)")
    psi = np.zeros(box.shape, dtype=complex)
    psi[mask] = boundary
    zinv = 1.0 / z

    def at(x1, x2, s):
        return psi[x1 + L, x2 + L, 0 if s > 0 else 1]

    def c(j, x1, x2, a, b, check=False):
        return _coin_entry(coins, j, x1, x2, a, b, floor if check else None)

    def c2_apply_row(x1, x2, row):
        # row 0: (C_2 psi)(x, +); row 1: (C_2 psi)(x, -)
        return c(2, x1, x2, row, 0) * at(x1, x2, +1) + c(2, x1, x2, row, 1) * at(x1, x2, -1)

    enforced = []
    if direction == "down":
        plus_rows = range(-L + 1, L - 1)
        minus_rows = range(L - 2, -L, -1)
    else:
        plus_rows = range(-L + 2, L)
        minus_rows = range(-L + 2, L)

    for x1 in range(-L + 1, L + 1):
        for x2 in plus_rows:
            a = x1 - 1
            val = (c(1, a, x2, 0, 0) * c2_apply_row(a, x2 - 1, 0)
                   + c(1, a, x2, 0, 1) * c2_apply_row(a, x2 + 1, 1))
            psi[x1 + L, x2 + L, 0] = zinv * val
            enforced.append((x1, x2, +1))
        for x2 in minus_rows:
            if direction == "down":
                # spin-down equation at y = x - e1 + e2
                far = c(1, x1, x2 + 1, 1, 1) * c2_apply_row(x1, x2 + 2, 1)
                inner = (z * at(x1 - 1, x2 + 1, -1) - far) / c(1, x1, x2 + 1, 1, 0, True)
                val = (inner - c(2, x1, x2, 0, 0) * at(x1, x2, +1)) / c(2, x1, x2, 0, 1, True)
                enforced.append((x1 - 1, x2 + 1, -1))
            else:
                # spin-down equation at y = x - e1 - e2
                far = c(1, x1, x2 - 1, 1, 0) * c2_apply_row(x1, x2 - 2, 0)
                inner = (z * at(x1 - 1, x2 - 1, -1) - far) / c(1, x1, x2 - 1, 1, 1, True)
                val = (inner - c(2, x1, x2, 1, 0) * at(x1, x2, +1)) / c(2, x1, x2, 1, 1, True)
                enforced.append((x1 - 1, x2 - 1, -1))
            psi[x1 + L, x2 + L, 1] = val
    return PropagationResult(StateVector(box, psi), enforced, direction)


def propagation_residuals(result: PropagationResult, z: complex, coins: CoinField) -> np.ndarray:
    """``|(W psi)(x, s) - z psi(x, s)|`` at every enforced equation.

    ``W psi`` is recomputed with the matrix-free plain-shift walk, which is
    exact at enforced sites because all their neighbours lie in the box.
    """
    from .walks import Walk2D

    box = result.psi.box
    w = Walk2D(box, coins, gauge=None)
    wpsi = StateVector(box, w.apply(result.psi.amplitudes))
    return np.array([abs(wpsi[(x1, x2), s] - z * result.psi[(x1, x2), s])
                     for x1, x2, s in result.enforced])


def propagation_map(z: complex, L: int, coins: CoinField, direction: str = "down") -> np.ndarray:
    """Matrix of the linear map boundary data -> ``psi`` on ``Lambda_L``."""
    n = int(determining_mask(L, direction).sum())
    cols = []
    for k in range(2 * n):
        b = np.zeros(2 * n, dtype=complex)
        b[k] = 1.0
        res = propagate_eigenfunction(b.reshape(n, 2), z, L, coins, direction)
        cols.append(res.psi.flat)
    return np.stack(cols, axis=1)


# -- covariance ---------------------------------------------------------------


def skew(k, l) -> int:
    return int(k[0] * l[1] - k[1] * l[0])


def covariance_deviation(flux: Flux, t: int, k, l, m, sign: int = +1) -> float:
    """``|A_kl e^{s i Phi k^l / 2} - A_{k+m,l+m} e^{s i Phi (k+m)^(l+m) / 2}|`` for ``A = W^t``.

    ``sign=+1`` is the phase that matches the symmetric gauge
    ``U_1 = e^{-i x_2 Phi/2}``, ``U_2 = e^{i x_1 Phi/2}``.
    """
    phi = flux.value
    km = (k[0] + m[0], k[1] + m[1])
    lm = (l[0] + m[0], l[1] + m[1])
    a = matrix_element_block(flux, t, k, l) * np.exp(sign * 0.5j * phi * skew(k, l))
    b = matrix_element_block(flux, t, km, lm) * np.exp(sign * 0.5j * phi * skew(km, lm))
    return float(np.max(np.abs(a - b)))


def covariance_check(flux: Flux, t: int, trials: int = 50, rng=None, reach: int = 20,
                     sign: int = +1) -> float:
    """Largest covariance deviation over random triples ``(k, l, m)``.

    ``l`` and ``m`` are drawn from ``[-reach, reach]^2``; ``k`` lies within
    the range ``t`` of ``l`` so the blocks are generically nonzero.
    """
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(trials):
        l = tuple(rng.integers(-reach, reach + 1, 2))
        d = tuple(rng.integers(-t, t + 1, 2)) if t > 0 else (0, 0)
        k = (l[0] + d[0], l[1] + d[1])
        m = tuple(rng.integers(-reach, reach + 1, 2))
        worst = max(worst, covariance_deviation(flux, t, k, l, m, sign))
    return worst


def diagonal_spread(flux: Flux, t: int, sites, gauge: str = "symmetric") -> float:
    """Spread of ``<x,s|W^t|x,s>`` over the given sites (max over spins)."""
    from .walks import diagonal_element

    worst = 0.0
    for s in (+1, -1):
        vals = np.array([diagonal_element(flux, t, x, s, gauge) for x in sites])
        worst = max(worst, float(np.max(np.abs(vals - vals[0]))))
    return worst


def core_weighted_measure(w_l, L: int, depth: int = 4) -> SpectralMeasure:
    """Eigenphase measure weighted by eigenvector mass on the core of ``Lambda_L``.

    The core is the sub-square at distance ``>= depth`` from the edge of the
    box. Averaging the local density over the core estimates the same limit
    measure as :func:`dos_measure` without the O(1/L) weight of edge states.
    """
    if depth > L:
        raise ValueError("core depth exceeds L")
    phases, vecs = eigendecompose_unitary(w_l)
    sites = Box(L).sites()
    core = np.repeat(np.max(np.abs(sites), axis=1) <= L - depth, 2)
    w = np.sum(np.abs(vecs[core]) ** 2, axis=0)
    keep = w > 0
    w = w[keep] / w[keep].sum()
    return SpectralMeasure(phases[keep], w, f"core(L={L}, depth={depth})", {"L": L})


def total_variation(a: SpectralMeasure, b: SpectralMeasure, bins: int = 32) -> float:
    """Total-variation distance between binned versions of two measures."""
    ha, _ = a.histogram(bins)
    hb, _ = b.histogram(bins)
    return 0.5 * float(np.abs(ha - hb).sum())
