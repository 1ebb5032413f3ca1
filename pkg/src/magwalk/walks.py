"""One-step walk unitaries: the 2D magnetic walk and the 1D almost-Mathieu walk.

Two-dimensional walks have the shape ``W = S_1 C_1 S_2 C_2``. The spin-up
component is shifted by ``+e_alpha`` and the spin-down component by
``-e_alpha``; shifts may carry gauge phases (magnetic translations) and
may have a decoupling coin inserted between their two halves.

All operators act on a finite :class:`~magwalk.lattice.Box`. Amplitude
shifted off the box is dropped, so a raw box walk is *not* unitary near
its edge (``truncated=True``); spectral work uses Bloch fibers or the
decoupled restriction instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .lattice import (
    HADAMARD, IDENTITY2, SIGMA1, SIGMA3, Box, Flux, GaugeField, axis_matrix,
    check_unitary, pauli_exp, spin_index,
)

DEFAULT_MATRIX_CAP = 8192


@dataclass(frozen=True)
class CoinField:
    """Site-dependent coins ``C_1(x)``, ``C_2(x)``.

    Each entry is a callable ``(x1, x2) -> array (..., 2, 2)``.
    """

    first: Callable
    second: Callable
    name: str = "custom"

    def coin(self, j: int, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        fn = self.first if j == 1 else self.second
        c = np.asarray(fn(x1, x2), dtype=complex)
        shape = np.broadcast(x1, x2).shape + (2, 2)
        return np.broadcast_to(c, shape)


def constant_coins(c1=HADAMARD, c2=None, name="constant") -> CoinField:
    c1 = check_unitary(c1, name="coin")
    c2 = c1 if c2 is None else check_unitary(c2, name="coin")
    return CoinField(lambda x1, x2: c1, lambda x1, x2: c2, name)


def quasiperiodic_coins(flux: Flux) -> CoinField:
    """Hadamard coins dressed with the symmetric-gauge phases.

    ``C_1(x) = exp(-i Phi x_2 sigma_3 / 2) C_H`` and
    ``C_2(x) = exp(+i Phi x_1 sigma_3 / 2) C_H``. With plain (phase-free)
    shifts these reproduce the magnetic walk in the symmetric gauge.
    """
    phi = flux.value

    def first(x1, x2):
        return pauli_exp(-0.5 * phi * np.asarray(x2, dtype=float), SIGMA3) @ HADAMARD

    def second(x1, x2):
        return pauli_exp(0.5 * phi * np.asarray(x1, dtype=float), SIGMA3) @ HADAMARD

    return CoinField(first, second, "quasiperiodic")


def _as_grid(psi, box: Box) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape == box.shape:
        return psi
    if psi.shape == (box.dim,):
        return psi.reshape(box.shape)
    raise ValueError(f"state of shape {psi.shape} does not match box {box}")


@dataclass(frozen=True)
class StateVector:
    """Amplitudes ``psi(x, s)`` on a box, stored as ``(side, side, 2)``."""

    box: Box
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _as_grid(self.amplitudes, self.box).copy())

    @classmethod
    def zeros(cls, box: Box):
        return cls(box, np.zeros(box.shape, dtype=complex))

    @classmethod
    def point(cls, box: Box, x, s: int = +1):
        v = np.zeros(box.dim, dtype=complex)
        v[box.index(x, s)] = 1.0
        return cls(box, v)

    @property
    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))

    def __getitem__(self, key):
        x, s = key
        return self.flat[self.box.index(x, s)]


class Walk2D:
    """Matrix-free 2D walk ``S~_1 C_1 S~_2 C_2`` on a box.

    Parameters
    ----------
    box : Box
        Working box. Amplitude leaving it is dropped.
    coins : CoinField
        Coins ``C_1``, ``C_2``.
    gauge : GaugeField, optional
        Link phases used in the shifts. ``None`` means plain translations.
    decoupling_mask : ndarray of bool, optional
        Sites (shape ``(side, side)``) where a ``sigma_1`` coin is inserted
        between the spin-down and spin-up half-shifts.
    kind : str
        ``'magnetic2d'`` or ``'decoupled2d'``.
    """

    def __init__(self, box: Box, coins: CoinField, gauge: GaugeField | None = None,
                 decoupling_mask=None, kind: str = "magnetic2d"):
        self.box = box
        self.coins = coins
        self.gauge = gauge
        self.decoupling_mask = (None if decoupling_mask is None
                                else np.asarray(decoupling_mask, dtype=bool))
        if self.decoupling_mask is not None and self.decoupling_mask.shape != box.shape[:2]:
            raise ValueError("decoupling mask does not match box")
        self.kind = kind
        # raw truncation at the box edge breaks unitarity
        self.truncated = True

    def __repr__(self):
        return (f"Walk2D(kind={self.kind!r}, box={self.box}, coins={self.coins.name!r}, "
                f"gauge={None if self.gauge is None else self.gauge.kind!r})")

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def flux(self) -> Flux | None:
        return None if self.gauge is None else self.gauge.flux

    @cached_property
    def _coin_arrays(self):
        x1, x2 = self.box.coords()
        return self.coins.coin(1, x1, x2), self.coins.coin(2, x1, x2)

    @cached_property
    def _links(self):
        x1, x2 = self.box.coords()
        if self.gauge is None:
            ones = np.ones(x1.shape, dtype=complex)
            return ones, ones
        return (np.asarray(self.gauge.phase(x1, x2, 1), dtype=complex),
                np.asarray(self.gauge.phase(x1, x2, 2), dtype=complex))

    # -- matrix-free pieces -------------------------------------------------

    @staticmethod
    def _apply_coin(psi, c):
        return np.einsum("abij,abj->abi", c, psi)

    @staticmethod
    def _shift_up(psi, u, axis):
        out = psi.copy()
        out[..., 0] = 0.0
        if axis == 0:
            out[1:, :, 0] = u[:-1, :] * psi[:-1, :, 0]
        else:
            out[:, 1:, 0] = u[:, :-1] * psi[:, :-1, 0]
        return out

    @staticmethod
    def _shift_down(psi, u, axis):
        out = psi.copy()
        out[..., 1] = 0.0
        if axis == 0:
            out[:-1, :, 1] = np.conj(u[:-1, :]) * psi[1:, :, 1]
        else:
            out[:, :-1, 1] = np.conj(u[:, :-1]) * psi[:, 1:, 1]
        return out

    def _shift(self, psi, alpha):
        u = self._links[alpha - 1]
        axis = alpha - 1
        psi = self._shift_down(psi, u, axis)
        if self.decoupling_mask is not None:
            m = self.decoupling_mask
            psi = psi.copy()
            psi[m] = psi[m][:, ::-1]
        return self._shift_up(psi, u, axis)

    def apply(self, psi):
        """Apply one step. Accepts flat, grid-shaped or :class:`StateVector` input."""
        if isinstance(psi, StateVector):
            if psi.box != self.box:
                raise ValueError(f"state box {psi.box} does not match walk box {self.box}")
            return StateVector(self.box, self.apply(psi.amplitudes))
        flat = np.ndim(psi) == 1
        grid = _as_grid(psi, self.box)
        c1, c2 = self._coin_arrays
        out = self._apply_coin(grid, c2)
        out = self._shift(out, 2)
        out = self._apply_coin(out, c1)
        out = self._shift(out, 1)
        return out.reshape(-1) if flat else out

    def power(self, psi, t: int):
        for _ in range(t):
            psi = self.apply(psi)
        return psi

    # -- assembled form -----------------------------------------------------

    def _coin_matrix(self, c):
        n = self.box.n_sites
        data = np.ascontiguousarray(c.reshape(n, 2, 2))
        return sp.bsr_matrix((data, np.arange(n), np.arange(n + 1)),
                             shape=(2 * n, 2 * n)).tocsr()

    def _half_shift_matrix(self, alpha, spin):
        side = self.box.side
        idx = np.arange(self.box.n_sites).reshape(side, side)
        u = self._links[alpha - 1]
        sl_src = (slice(None, -1), slice(None)) if alpha == 1 else (slice(None), slice(None, -1))
        sl_dst = (slice(1, None), slice(None)) if alpha == 1 else (slice(None), slice(1, None))
        if spin == +1:
            # |x,+> -> U(x) |x+e,+>; spin-down untouched
            rows = 2 * idx[sl_dst].ravel()
            cols = 2 * idx[sl_src].ravel()
            vals = u[sl_src].ravel()
            keep = 2 * idx.ravel() + 1
        else:
            # |x+e,-> -> conj(U(x)) |x,->; spin-up untouched
            rows = 2 * idx[sl_src].ravel() + 1
            cols = 2 * idx[sl_dst].ravel() + 1
            vals = np.conj(u[sl_src].ravel())
            keep = 2 * idx.ravel()
        rows = np.concatenate([rows, keep])
        cols = np.concatenate([cols, keep])
        vals = np.concatenate([vals, np.ones(keep.size, dtype=complex)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def _decoupling_matrix(self):
        n = self.box.n_sites
        blocks = np.broadcast_to(IDENTITY2, (n, 2, 2)).copy()
        blocks[self.decoupling_mask.ravel()] = SIGMA1
        return sp.bsr_matrix((blocks, np.arange(n), np.arange(n + 1)),
                             shape=(2 * n, 2 * n)).tocsr()

    def _shift_matrix(self, alpha):
        up = self._half_shift_matrix(alpha, +1)
        down = self._half_shift_matrix(alpha, -1)
        if self.decoupling_mask is None:
            return up @ down
        return up @ self._decoupling_matrix() @ down

    def matrix(self, dense: bool = False, cap: int = DEFAULT_MATRIX_CAP):
        """Assemble the operator as a CSR matrix (or dense array)."""
        if self.dim > cap:
            raise ValueError(f"dimension {self.dim} exceeds matrix cap {cap}")
        c1, c2 = self._coin_arrays
        m = (self._shift_matrix(1) @ self._coin_matrix(c1)
             @ self._shift_matrix(2) @ self._coin_matrix(c2))
        m = m.tocsr()
        m.eliminate_zeros()
        return m.toarray() if dense else m


def build_magnetic_walk(g: GaugeField, box: Box) -> Walk2D:
    """Magnetic Hadamard walk with gauge-phase shifts on ``box``."""
    return Walk2D(box, constant_coins(HADAMARD, name="hadamard"), gauge=g)


def build_coin_walk(flux: Flux, box: Box) -> Walk2D:
    """The same walk written with plain shifts and quasi-periodic coins."""
    return Walk2D(box, quasiperiodic_coins(flux), gauge=None)


def free_walk(box: Box) -> Walk2D:
    """Flux-free Hadamard walk (no link phases at all)."""
    return Walk2D(box, constant_coins(HADAMARD, name="hadamard"), gauge=None)


def apply(w, psi):
    return w.apply(psi)


def matrix(w, dense: bool = False, cap: int = DEFAULT_MATRIX_CAP):
    return w.matrix(dense=dense, cap=cap)


def diagonal_element(flux: Flux, t: int, x, s: int, gauge: str = "symmetric") -> complex:
    """Exact ``<x,s|W^t|x,s>`` of the full-space magnetic walk.

    One step moves each coordinate by exactly one, so a window of
    half-width ``t + 1`` centred at ``x`` loses nothing.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = (int(x[0]), int(x[1]))
    box = Box(t + 1, center=x)
    w = build_magnetic_walk(GaugeField(flux, gauge), box)
    v = np.zeros(box.dim, dtype=complex)
    k = box.index(x, s)
    v[k] = 1.0
    return complex(w.power(v, t)[k])


def matrix_element_block(flux: Flux, t: int, k, l, gauge: str = "symmetric") -> np.ndarray:
    """2x2 block ``<k,i|W^t|l,j>`` of the full-space walk (exact, windowed)."""
    k = (int(k[0]), int(k[1]))
    l = (int(l[0]), int(l[1]))
    out = np.zeros((2, 2), dtype=complex)
    if max(abs(k[0] - l[0]), abs(k[1] - l[1])) > t:
        return out
    box = Box(t + 1, center=l)
    w = build_magnetic_walk(GaugeField(flux, gauge), box)
    for j, s in enumerate((+1, -1)):
        v = np.zeros(box.dim, dtype=complex)
        v[box.index(l, s)] = 1.0
        v = w.power(v, t)
        for i, r in enumerate((+1, -1)):
            out[i, j] = v[box.index(k, r)]
    return out


# -- one-dimensional walks --------------------------------------------------

class Walk1D:
    """``S C`` on sites ``-h..h`` with ``C(x) = exp(i (Phi x + theta) sigma_axis)``.

    ``S|x,s> = |x+s,s>``. With ``periodic=True`` the chain is closed into a
    ring of ``2h+1`` sites and the operator is exactly unitary.
    """

    def __init__(self, flux: Flux, theta: float, axis: str = "sigma2",
                 halfwidth: int = 8, periodic: bool = False, phi: float | None = None):
        if halfwidth < 1:
            raise ValueError("halfwidth must be >= 1")
        self.flux = flux
        self.phi = flux.value if phi is None else float(phi)
        self.theta = float(theta)
        self.axis = axis
        self.sigma = axis_matrix(axis)
        self.halfwidth = int(halfwidth)
        self.periodic = periodic
        self.truncated = not periodic
        self.kind = "amo1d_" + axis

    @property
    def n_sites(self) -> int:
        return 2 * self.halfwidth + 1

    @property
    def dim(self) -> int:
        return 2 * self.n_sites

    def positions(self):
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    @cached_property
    def coins(self):
        return pauli_exp(self.phi * self.positions() + self.theta, self.sigma)

    def apply(self, psi):
        psi = np.asarray(psi, dtype=complex).reshape(self.n_sites, 2)
        psi = np.einsum("aij,aj->ai", self.coins, psi)
        out = np.zeros_like(psi)
        if self.periodic:
            out[:, 0] = np.roll(psi[:, 0], 1)
            out[:, 1] = np.roll(psi[:, 1], -1)
        else:
            out[1:, 0] = psi[:-1, 0]
            out[:-1, 1] = psi[1:, 1]
        return out.reshape(-1)

    def matrix(self, dense: bool = False, cap: int = DEFAULT_MATRIX_CAP):
        if self.dim > cap:
            raise ValueError(f"dimension {self.dim} exceeds matrix cap {cap}")
        n = self.n_sites
        coin = sp.bsr_matrix((np.ascontiguousarray(self.coins), np.arange(n), np.arange(n + 1)),
                             shape=(2 * n, 2 * n))
        src = np.arange(n)
        if self.periodic:
            up_src, up_dst = src, (src + 1) % n
            dn_src, dn_dst = src, (src - 1) % n
        else:
            up_src, up_dst = src[:-1], src[1:]
            dn_src, dn_dst = src[1:], src[:-1]
        rows = np.concatenate([2 * up_dst, 2 * dn_dst + 1])
        cols = np.concatenate([2 * up_src, 2 * dn_src + 1])
        shift = sp.csr_matrix((np.ones(rows.size, dtype=complex), (rows, cols)),
                              shape=(2 * n, 2 * n))
        m = (shift @ coin).tocsr()
        return m.toarray() if dense else m


def build_amo_1d(flux: Flux, theta: float, axis: str = "sigma2", halfwidth: int = 8,
                 periodic: bool = False) -> Walk1D:
    """Unitary almost-Mathieu walk on ``2*halfwidth + 1`` sites."""
    return Walk1D(flux, theta, axis, halfwidth, periodic)


def spin_rotation_1d(n_sites: int) -> np.ndarray:
    """``1 (x) exp(i sigma_3 pi / 4)``; maps sigma_1 coins to sigma_2 coins."""
    v = pauli_exp(np.pi / 4, SIGMA3)
    return np.kron(np.eye(n_sites), v)


__all__ = [
    "CoinField", "StateVector", "Walk1D", "Walk2D", "apply", "build_amo_1d",
    "build_coin_walk", "build_magnetic_walk", "constant_coins", "diagonal_element",
    "free_walk", "matrix", "matrix_element_block", "pauli_exp", "quasiperiodic_coins",
    "spin_index", "spin_rotation_1d",
]
