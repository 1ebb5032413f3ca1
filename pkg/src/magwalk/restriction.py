"""Unitary finite-volume restriction of 2D walks by local decoupling.

A ``sigma_1`` coin placed between the two half-shifts on the contour
``Delta Lambda`` (upper/right edges of ``Lambda_L`` and lower/left edges of
``Lambda_{L+1}``) reflects every hop that would cross out of ``Lambda_L``.
The compression ``W_L = P_L W_d P_L^*`` is then exactly unitary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .lattice import Box, GaugeField
from .walks import Walk2D, constant_coins, quasiperiodic_coins

UNITARITY_TOL = 1e-12
WORKING_MARGIN = 3


class DecouplingError(RuntimeError):
    """Raised when a restricted walk fails the unitarity check."""


def _site_set(mask, box: Box) -> frozenset:
    x1, x2 = box.coords()
    return frozenset(zip(x1[mask].tolist(), x2[mask].tolist()))


@dataclass(frozen=True)
class BoundarySets:
    """Site sets attached to ``Lambda_L``, as boolean masks on a working box."""

    L: int
    box: Box
    interior: np.ndarray        # Lambda_L
    edge: np.ndarray            # outer ring of Lambda_L
    contour: np.ndarray         # Delta Lambda
    contour_hull: np.ndarray    # (Delta Lambda)_2
    determining: np.ndarray     # D
    determining_up: np.ndarray  # D', for the upward recursion

    def sites(self, name: str) -> frozenset:
        return _site_set(getattr(self, name), self.box)

    def count(self, name: str) -> int:
        return int(getattr(self, name).sum())


def boundary_sets(L: int, margin: int = WORKING_MARGIN) -> BoundarySets:
    if L < 2:
        raise ValueError(f"L must be >= 2, got {L}")
    box = Box(L + margin)
    x1, x2 = box.coords()
    interior = (np.abs(x1) <= L) & (np.abs(x2) <= L)
    edge = interior & ((np.abs(x1) == L) | (np.abs(x2) == L))
    big = (x1 >= -L - 1) & (x1 <= L) & (x2 >= -L - 1) & (x2 <= L)
    contour = big & ((x1 == -L - 1) | (x1 == L) | (x2 == -L - 1) | (x2 == L))
    # graph (l1) distance <= 2 from the contour
    hull = np.zeros_like(contour)
    cx1, cx2 = x1[contour], x2[contour]
    for d1 in range(-2, 3):
        for d2 in range(-2 + abs(d1), 3 - abs(d1)):
            hull |= np.isin((x1 - d1) * 100003 + (x2 - d2), cx1 * 100003 + cx2)
    determining = interior & ((x1 == -L) | np.isin(x2, [-L, L - 1, L]))
    determining_up = interior & ((x1 == -L) | np.isin(x2, [-L, -L + 1, L]))
    return BoundarySets(L, box, interior, edge, contour, hull, determining, determining_up)


def build_decoupled(g: GaugeField, L: int, form: str = "gauge",
                    insert_coin: bool = True) -> Walk2D:
    """Decoupled walk ``W_d`` on a box of half-width ``L + 3``.

    ``form='gauge'`` uses Hadamard coins with magnetic half-shifts;
    ``form='coins'`` uses plain half-shifts with the quasi-periodic
    symmetric-gauge coins (``g`` must then be symmetric and untransformed).
    ``insert_coin=False`` drops the decoupling coin; the result is a
    deliberately broken operator used for fault injection.
    """
    sets = boundary_sets(L)
    mask = sets.contour if insert_coin else np.zeros_like(sets.contour)
    if form == "gauge":
        coins = constant_coins(name="hadamard")
        return Walk2D(sets.box, coins, gauge=g, decoupling_mask=mask, kind="decoupled2d")
    if form == "coins":
        if g.kind != "symmetric":
            raise ValueError("coin form exists only for the symmetric gauge")
        return Walk2D(sets.box, quasiperiodic_coins(g.flux), gauge=None,
                      decoupling_mask=mask, kind="decoupled2d")
    raise ValueError(f"unknown form {form!r}")


def interior_indices(L: int, box: Box) -> np.ndarray:
    """Flat state indices of ``Lambda_L`` inside ``box``, in ``Box(L)`` order."""
    inner = Box(L, box.center)
    sites = inner.sites()
    idx = np.array([box.site_index(tuple(s)) for s in sites])
    return np.stack([2 * idx, 2 * idx + 1], axis=1).ravel()


def unitarity_deviation(m) -> float:
    if sp.issparse(m):
        d = (m.conj().T @ m - sp.identity(m.shape[0], format="csr")).tocoo()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def restrict(w_d: Walk2D, L: int, dense: bool = True, tol: float = UNITARITY_TOL,
             check: bool = True):
    """``W_L = P_L W_d P_L^*`` on ``l^2(Lambda_L) (x) C^2``.

    Raises :class:`DecouplingError` if the result deviates from unitarity
    by more than ``tol`` (max-entry norm of ``W_L^* W_L - I``).
    """
    idx = interior_indices(L, w_d.box)
    m = w_d.matrix().tocsr()[idx][:, idx]
    if check:
        dev = unitarity_deviation(m)
        if dev > tol:
            raise DecouplingError(f"restricted walk not unitary: deviation {dev:.3e} > {tol:g}")
    return m.toarray() if dense else m.tocsr()


def restricted_walk(g: GaugeField, L: int, dense: bool = True, **kw):
    """Convenience: ``restrict(build_decoupled(g, L), L)``."""
    return restrict(build_decoupled(g, L, **kw), L, dense=dense)
