"""Band spectra at rational flux by magnetic Bloch reduction.

In the Landau gauge (``U_1 = exp(-i x_2 Phi)``, ``U_2 = 1``) the walk is
invariant under ``x_1 -> x_1 + 1`` and ``x_2 -> x_2 + q``. Bloch waves
``psi(x_1, m + q n, s) = exp(i k_1 x_1 + i kappa n) phi(m, s)`` reduce it to
a ``2q x 2q`` fiber in the spin-major basis ``s * q + m``:

* ``T_1`` acts as ``diag(exp(-i (k_1 + m Phi)))``,
* ``T_2`` acts as the cyclic shift ``m -> m + 1`` with twist ``exp(-i kappa)``.

``kappa = q k_2`` ranges over [0, 2pi).
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arcs import SpectrumSet
from .lattice import HADAMARD, TWO_PI, Flux, axis_exp, reduced_fractions, wrap_angle

__all__ = [
    "BandSpectrum", "band_spectrum", "bloch_matrix", "bloch_matrix_1d", "butterfly",
    "fiber_eigenphases", "spectrum_1d", "write_butterfly_csv",
]


def _twisted_shift(q: int, twist):
    """Batched ``q x q`` matrices of ``m -> m + 1`` with ``exp(-i twist)`` on wrap."""
    twist = np.atleast_1d(np.asarray(twist, dtype=float))
    p = np.zeros(twist.shape + (q, q), dtype=complex)
    if q > 1:
        idx = np.arange(1, q)
        p[..., idx, idx - 1] = 1.0
    p[..., 0, q - 1] += np.exp(-1j * twist)
    return p


def _hadamard_spin(q: int):
    return np.kron(HADAMARD, np.eye(q))


def bloch_matrix(flux: Flux, k1, k2):
    """Bloch fiber(s) of the magnetic walk.

    Parameters
    ----------
    flux : Flux
    k1 : float or array
        Quasi-momentum along ``e_1`` in [0, 2pi).
    k2 : float or array
        Quasi-momentum along ``e_2`` in [0, 2pi/q); the twist across one
        magnetic unit cell is ``q * k2``.

    Returns
    -------
    ndarray
        ``(2q, 2q)`` unitary, or a stack ``(..., 2q, 2q)`` when ``k1, k2``
        are arrays.
    """
    return _fiber(flux, k1, flux.q * np.asarray(k2, dtype=float))


def _fiber(flux: Flux, k1, twist):
    q = flux.q
    k1, twist = np.broadcast_arrays(np.asarray(k1, dtype=float), np.asarray(twist, dtype=float))
    scalar = k1.ndim == 0
    k1 = np.atleast_1d(k1)
    twist = np.atleast_1d(twist)
    m = np.arange(q)
    d1 = np.exp(-1j * (k1[..., None] + m * flux.value))
    diag_shift1 = np.concatenate([d1, np.conj(d1)], axis=-1)
    p = _twisted_shift(q, twist)
    shift2 = np.zeros(k1.shape + (2 * q, 2 * q), dtype=complex)
    shift2[..., :q, :q] = p
    shift2[..., q:, q:] = np.conj(np.swapaxes(p, -1, -2))
    h = _hadamard_spin(q)
    fiber = diag_shift1[..., :, None] * (h @ shift2 @ h)
    return fiber[0] if scalar else fiber


def bloch_matrix_1d(flux: Flux, theta: float, k, axis: str = "sigma2"):
    """Fiber of the 1D walk ``S exp(i (Phi x + theta) sigma_axis)`` on a q-site cell.

    ``k`` is the quasi-momentum in [0, 2pi/q); the boundary twist is ``q k``.
    """
    q = flux.q
    k = np.asarray(k, dtype=float)
    scalar = k.ndim == 0
    twist = np.atleast_1d(q * k)
    m = np.arange(q)
    coins = axis_exp(flux.value * m + theta, axis)  # (q, 2, 2)
    coin = np.zeros((2 * q, 2 * q), dtype=complex)
    for a in range(2):
        for b in range(2):
            coin[a * q + m, b * q + m] = coins[:, a, b]
    p = _twisted_shift(q, twist)
    shift = np.zeros(twist.shape + (2 * q, 2 * q), dtype=complex)
    shift[..., :q, :q] = p
    shift[..., q:, q:] = np.conj(np.swapaxes(p, -1, -2))
    out = shift @ coin
    return out[0] if scalar else out


def fiber_eigenphases(mats) -> np.ndarray:
    """Sorted eigenphases in [0, 2pi) of a stack of small unitaries."""
    ev = np.linalg.eigvals(mats)
    return np.sort(wrap_angle(np.angle(ev)), axis=-1)


def _cell_arcs(phases: np.ndarray, periodic_axes=(0, 1)):
    """Arcs swept by every branch inside each grid cell.

    ``phases`` has shape ``(n1, n2, b)`` (sorted per point). For each cell
    the eigenphases at the three other corners are matched to the base
    corner by the cyclic relabelling that minimises total displacement;
    each branch then covers the smallest arc containing its four values.
    """
    if phases.ndim == 2:
        phases = phases[:, None, :]
    n1, n2, b = phases.shape
    base = phases
    corners = [np.roll(phases, -1, axis=0), np.roll(phases, -1, axis=1),
               np.roll(np.roll(phases, -1, axis=0), -1, axis=1)]
    if n2 == 1:
        corners = corners[:1]
    lo = np.zeros_like(base)
    hi = np.zeros_like(base)
    shifts = np.arange(b)
    for c in corners:
        # cost[r] = total displacement when branch j is matched to c[j + r]
        rolled = np.stack([np.roll(c, -r, axis=-1) for r in shifts], axis=-2)
        diff = np.mod(rolled - base[..., None, :] + np.pi, TWO_PI) - np.pi
        cost = np.abs(diff).sum(axis=-1)
        best = np.argmin(cost, axis=-1)
        d = np.take_along_axis(diff, best[..., None, None], axis=-2)[..., 0, :]
        lo = np.minimum(lo, d)
        hi = np.maximum(hi, d)
    return (base + lo).ravel(), (base + hi).ravel()


@dataclass(frozen=True)
class BandSpectrum:
    """Band data of the magnetic walk at one rational flux.

    ``branches[i, j, b]`` is the ``b``-th sorted eigenphase of the fiber at
    ``k_1 = 2 pi i / n_k`` and twist ``2 pi j / n_k``.
    """

    flux: Flux
    n_k: int
    branches: np.ndarray
    arcs: SpectrumSet
    max_modulus_error: float

    @property
    def n_branches(self) -> int:
        return self.branches.shape[-1]

    def measure(self) -> float:
        return self.arcs.measure()


def band_spectrum(flux: Flux, n_k: int = 128) -> BandSpectrum:
    """All ``2q`` bands sampled on an ``n_k x n_k`` quasi-momentum grid."""
    if n_k < 8:
        raise ValueError("n_k must be at least 8")
    grid = TWO_PI * np.arange(n_k) / n_k
    k1, tw = np.meshgrid(grid, grid, indexing="ij")
    fib = _fiber(flux, k1, tw)
    ev = np.linalg.eigvals(fib)
    modulus_err = float(np.max(np.abs(np.abs(ev) - 1.0)))
    phases = np.sort(wrap_angle(np.angle(ev)), axis=-1)
    lo, hi = _cell_arcs(phases)
    return BandSpectrum(flux, n_k, phases, SpectrumSet.from_arcs(lo, hi), modulus_err)


def spectrum_1d(flux: Flux, theta: float, n_k: int = 128, axis: str = "sigma2") -> SpectrumSet:
    """Spectrum of the 1D walk at fixed ``theta`` as arcs over ``n_k`` twists."""
    k = TWO_PI * np.arange(n_k) / (n_k * flux.q)
    phases = fiber_eigenphases(bloch_matrix_1d(flux, theta, k, axis))
    lo, hi = _cell_arcs(phases)
    return SpectrumSet.from_arcs(lo, hi)


def _butterfly_rows(args):
    flux, n_k = args
    arcs = band_spectrum(flux, n_k).arcs
    return [(flux.p, flux.q, flux.value, float(s), float(e)) for s, e in arcs.arcs()]


def butterfly(q_max: int, n_k: int = 64, jobs: int = 1):
    """Band arcs for every reduced ``p/q`` with ``q <= q_max``.

    Rows are ``(p, q, phi, arc_start, arc_end)`` sorted by ``(q, p, arc_start)``;
    ordering does not depend on ``jobs``.
    """
    fluxes = reduced_fractions(q_max)
    tasks = [(f, n_k) for f in fluxes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_butterfly_rows, tasks))
    else:
        chunks = [_butterfly_rows(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r[1], r[0], r[3]))
    return rows


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_butterfly_csv(rows, path=None) -> str:
    """Serialise butterfly rows; returns the CSV text and writes it if ``path`` is given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "q", "phi", "arc_start", "arc_end"])
    for p, q, phi, s, e in rows:
        writer.writerow([p, q, _fmt(phi), _fmt(s), _fmt(e)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_butterfly_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [(int(r["p"]), int(r["q"]), float(r["phi"]), float(r["arc_start"]),
                 float(r["arc_end"])) for r in reader]
