"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array

from .lattice import Flux, parse_flux, reduce_flux


def check_flux(flux) -> Flux:
    """Coerce ``Flux``, ``"p/q"``, ``(p, q)`` or an integer into a reduced :class:`Flux`."""
    if isinstance(flux, Flux):
        return flux
    if isinstance(flux, str):
        return parse_flux(flux)
    if isinstance(flux, numbers.Integral):
        return reduce_flux(int(flux), 1)
    try:
        p, q = flux
    except (TypeError, ValueError):
        raise TypeError(f"cannot interpret {flux!r} as a rational flux") from None
    if not all(isinstance(v, numbers.Integral) for v in (p, q)):
        raise TypeError(f"flux numerator and denominator must be integers, got {flux!r}")
    return reduce_flux(int(p), int(q))


def check_fluxes(X) -> list[Flux]:
    """Validate a collection of fluxes.

    Accepts a single flux in any form understood by :func:`check_flux`,
    a sequence of :class:`Flux` objects or strings, or an integer
    array-like of shape ``(n_samples, 2)`` holding ``(p, q)`` rows.
    """
    if isinstance(X, (Flux, str, numbers.Integral)):
        return [check_flux(X)]
    if isinstance(X, tuple) and len(X) == 2 and all(isinstance(v, numbers.Integral) for v in X):
        return [check_flux(X)]
    X = list(X) if not isinstance(X, np.ndarray) else X
    if len(X) and all(isinstance(x, (Flux, str)) for x in X):
        return [check_flux(x) for x in X]
    arr = check_array(X, dtype=None, ensure_2d=True)
    if arr.shape[1] != 2:
        raise ValueError(f"expected (p, q) rows, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("flux rows must be integers")
        arr = arr.astype(np.int64)
    return [reduce_flux(int(p), int(q)) for p, q in arr]


def check_angles(theta) -> np.ndarray:
    theta = check_array(np.atleast_1d(np.asarray(theta, dtype=float)), ensure_2d=False)
    return theta


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
