"""Set-level comparisons of spectra: symmetries, 1D/2D coincidence, bandwidth scans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arcs import SpectrumSet, hausdorff_distance
from .bloch import band_spectrum, spectrum_1d
from .lattice import TWO_PI, ConvergentSequence, Flux


@dataclass(frozen=True)
class SymmetryReport:
    flux: Flux
    conjugation: float    # d(conj(S_phi), S_{-phi})
    reflection: float     # d(-S_phi, S_phi)
    flux_reversal: float  # d(S_phi, S_{-phi})

    def max(self) -> float:
        return max(self.conjugation, self.reflection, self.flux_reversal)


def symmetry_report(flux: Flux, s: SpectrumSet, s_minus: SpectrumSet) -> SymmetryReport:
    """Distances probing ``z -> z*`` with ``Phi -> -Phi``, ``z -> -z``, and ``Phi -> -Phi``."""
    return SymmetryReport(
        flux,
        hausdorff_distance(s.transformed("conj"), s_minus),
        hausdorff_distance(s.transformed("negate"), s),
        hausdorff_distance(s, s_minus),
    )


def band_symmetry_report(flux: Flux, n_k: int = 32) -> SymmetryReport:
    s = band_spectrum(flux, n_k).arcs
    s_minus = band_spectrum(flux.negate(), n_k).arcs
    return symmetry_report(flux, s, s_minus)


@dataclass(frozen=True)
class Comparison1D2D:
    flux: Flux
    distance: float
    grid_tolerance: float
    two_d: SpectrumSet
    one_d: SpectrumSet


def compare_1d_2d(flux: Flux, theta_grid: int = 32, n_k: int = 64,
                  axis: str = "sigma1") -> Comparison1D2D:
    """Hausdorff distance between the 2D band set and the union of 1D spectra.

    The 1D union runs over ``theta_grid`` equispaced phase offsets in
    [0, 2pi). ``axis='sigma1'`` is the direct image of the 2D walk's
    algebraic element in the 1D representation.
    """
    two_d = band_spectrum(flux, n_k).arcs
    thetas = TWO_PI * np.arange(theta_grid) / theta_grid
    one_d = SpectrumSet.empty()
    for th in thetas:
        one_d = one_d.union(spectrum_1d(flux, th, n_k, axis))
    return Comparison1D2D(flux, hausdorff_distance(two_d, one_d), TWO_PI / n_k, two_d, one_d)


def bandwidth_scan(seq: ConvergentSequence, n_k: int = 64):
    """``[(flux, arc-length measure of the 2D band set)]`` along the convergents."""
    return [(f, band_spectrum(f, n_k).measure()) for f in seq]


def gap_count_scan(seq: ConvergentSequence, n_k: int = 64):
    return [(f, band_spectrum(f, n_k).arcs.gap_count()) for f in seq]
