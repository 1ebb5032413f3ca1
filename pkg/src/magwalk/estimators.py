"""scikit-learn style front ends.

The estimators take fluxes as samples (``Flux`` objects, ``"p/q"`` strings
or integer ``(p, q)`` rows), so parameter sweeps compose with
``sklearn.base.clone``, ``get_params``/``set_params`` and pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bloch import band_spectrum
from .lattice import GaugeField
from .measures import dos_measure, moment_compare, sdf_moments
from .restriction import build_decoupled, restrict
from .validation import check_angles, check_flux, check_fluxes, check_positive_int


class BandFeatures(TransformerMixin, BaseEstimator):
    """Map each flux to ``[phi, band measure, number of arcs, number of branches]``.

    Stateless: ``fit`` only validates parameters.
    """

    def __init__(self, n_k=64):
        self.n_k = n_k

    def fit(self, X=None, y=None):
        check_positive_int(self.n_k, "n_k", minimum=8)
        self.n_features_out_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self)
        rows = []
        for f in check_fluxes(X):
            b = band_spectrum(f, self.n_k)
            rows.append([f.value, b.measure(), len(b.arcs), b.n_branches])
        return np.asarray(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(["phi", "band_measure", "n_arcs", "n_branches"], dtype=object)


class DensityOfStates(BaseEstimator):
    """Eigenvalue-counting measure of the decoupled restriction ``W_L``.

    Parameters
    ----------
    L : int
        Half-width of the box ``[-L, L]^2``.
    gauge : {'symmetric', 'landau'}

    Attributes
    ----------
    flux_ : Flux
    measure_ : SpectralMeasure
    eigenphases_ : ndarray
    """

    def __init__(self, L=8, gauge="symmetric"):
        self.L = L
        self.gauge = gauge

    def fit(self, X, y=None):
        L = check_positive_int(self.L, "L", minimum=2)
        fluxes = check_fluxes(X)
        if len(fluxes) != 1:
            raise ValueError("DensityOfStates is fitted on a single flux")
        self.flux_ = fluxes[0]
        w_l = restrict(build_decoupled(GaugeField(self.flux_, self.gauge), L), L)
        self.measure_ = dos_measure(w_l, L)
        self.eigenphases_ = self.measure_.eigenphases
        return self

    def predict(self, theta):
        """Integrated density of states ``k_L(theta)``."""
        check_is_fitted(self)
        return self.measure_.cdf(check_angles(theta))

    def moments(self, T):
        check_is_fitted(self)
        return self.measure_.moments(T)

    def score(self, X=None, y=None, T=6):
        """Negative largest moment deviation from the exact trace moments."""
        check_is_fitted(self)
        sdf = sdf_moments(self.flux_, T, self.gauge)
        return -moment_compare(self.measure_, sdf, T).max()


class TraceMoments(TransformerMixin, BaseEstimator):
    """Exact moments ``tau_2(W^t)``, ``t = 0..T``, one row per flux (complex)."""

    def __init__(self, T=6, gauge="symmetric"):
        self.T = T
        self.gauge = gauge

    def fit(self, X=None, y=None):
        check_positive_int(self.T, "T", minimum=0)
        self.n_features_out_ = self.T + 1
        return self

    def transform(self, X):
        check_is_fitted(self)
        return np.stack([sdf_moments(check_flux(f), self.T, self.gauge).values
                         for f in check_fluxes(X)])
