"""Magnetic quantum walks on Z^2: gauges, walk operators, Bloch bands,
unitary finite restrictions and spectral measures."""

from .analysis import band_symmetry_report, bandwidth_scan, compare_1d_2d, symmetry_report
from .arcs import SpectrumSet, from_samples, hausdorff_distance, lebesgue_measure
from .bloch import (
    BandSpectrum, band_spectrum, bloch_matrix, bloch_matrix_1d, butterfly, spectrum_1d,
    write_butterfly_csv,
)
from .estimators import BandFeatures, DensityOfStates, TraceMoments
from .lattice import (
    HADAMARD, Box, ConvergentSequence, Flux, GaugeField, GaugeTransform, classify_coin,
    continued_fraction_convergents, gauge_phase, golden_convergents, parse_flux,
    plaquette_phase, reduce_flux, reduced_fractions,
)
from .measures import (
    MomentSequence, SpectralMeasure, core_weighted_measure, covariance_check,
    diagonal_spread, dos_measure, eigendecompose_unitary, max_multiplicity,
    moment_compare, multiplicity_bound, propagate_eigenfunction, sdf_moments,
)
from .restriction import (
    BoundarySets, DecouplingError, boundary_sets, build_decoupled, restrict, restricted_walk,
)
from .walks import (
    StateVector, Walk1D, Walk2D, build_amo_1d, build_coin_walk, build_magnetic_walk,
    diagonal_element, quasiperiodic_coins,
)

__version__ = "0.1.0"
