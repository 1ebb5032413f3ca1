"""Lattice geometry, flux arithmetic, gauge fields and coin classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-12

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


PAULI_AXES = {"sigma1": SIGMA1, "sigma2": SIGMA2, "sigma3": SIGMA3}


def pauli_exp(angle, sigma):
    """``exp(i * angle * sigma)`` for a Pauli matrix, vectorised over ``angle``."""
    angle = np.asarray(angle, dtype=float)[..., None, None]
    return np.cos(angle) * IDENTITY2 + 1j * np.sin(angle) * sigma


def axis_matrix(axis: str) -> np.ndarray:
    try:
        return PAULI_AXES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of {sorted(PAULI_AXES)}, got {axis!r}") from None


def axis_exp(angle, axis: str) -> np.ndarray:
    return pauli_exp(angle, axis_matrix(axis))


def wrap_angle(theta):
    """Map angles into [0, 2pi)."""
    out = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def angle_distance(a, b):
    """Arc-length distance between angles on the unit circle."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True, order=True)
class Flux:
    """Rational magnetic flux per plaquette, ``Phi = 2 pi p / q``.

    Build instances through :func:`reduce_flux`; the constructor assumes
    the fraction is already reduced with ``0 <= p < q``.
    """

    numerator: int
    denominator: int

    @property
    def p(self) -> int:
        return self.numerator

    @property
    def q(self) -> int:
        return self.denominator

    @property
    def value(self) -> float:
        return float(wrap_angle(TWO_PI * self.numerator / self.denominator))

    def negate(self) -> "Flux":
        """Flux ``2 pi - Phi`` (equivalently ``-Phi``)."""
        return reduce_flux(-self.numerator, self.denominator)

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


def reduce_flux(p: int, q: int) -> Flux:
    """Reduce ``p/q`` and normalise the numerator into ``[0, q)``."""
    p, q = int(p), int(q)
    if q == 0:
        raise ValueError("flux denominator must be nonzero")
    if q < 0:
        raise ValueError(f"flux denominator must be positive, got {q}")
    g = math.gcd(p, q)
    p, q = p // g, q // g
    return Flux(p % q, q)


def parse_flux(text: str) -> Flux:
    """Parse ``"P/Q"`` (or a bare integer) into a reduced :class:`Flux`."""
    text = text.strip()
    if "/" in text:
        p, q = text.split("/", 1)
        return reduce_flux(int(p), int(q))
    return reduce_flux(int(text), 1)


def reduced_fractions(q_max: int) -> list[Flux]:
    """All reduced fluxes ``p/q`` with ``q <= q_max``, ordered by ``(q, p)``."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    return [Flux(p, q) for q in range(1, q_max + 1)
            for p in range(q) if math.gcd(p, q) == 1]


@dataclass(frozen=True)
class ConvergentSequence:
    target: float
    convergents: tuple[Flux, ...]

    def __iter__(self):
        return iter(self.convergents)

    def __len__(self):
        return len(self.convergents)

    def __getitem__(self, i):
        return self.convergents[i]


def golden_convergents(n: int) -> ConvergentSequence:
    """First ``n`` convergents of the golden mean ``(sqrt(5) - 1) / 2``.

    These are the Fibonacci ratios 1/2, 2/3, 3/5, ...; the trivial
    convergents 0/1 and 1/1 are skipped.
    """
    if n < 1:
        raise ValueError("need at least one convergent")
    a, b = 1, 2
    out = []
    for _ in range(n):
        out.append(reduce_flux(a, b))
        a, b = b, a + b
    return ConvergentSequence((math.sqrt(5.0) - 1.0) / 2.0, tuple(out))


def continued_fraction_convergents(x: float, n: int) -> ConvergentSequence:
    """Continued-fraction convergents of ``x`` in [0, 1) with denominator > 1."""
    if not 0.0 <= x < 1.0:
        raise ValueError("target must lie in [0, 1)")
    out = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    y = x
    for _ in range(n + 64):
        a = math.floor(y)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > 1:
            f = reduce_flux(h1, k1)
            if not out or f.denominator > out[-1].denominator:
                out.append(f)
        if len(out) == n:
            break
        frac_part = y - a
        if frac_part < 1e-15:
            break
        y = 1.0 / frac_part
    return ConvergentSequence(x, tuple(out))


def check_unitary(c, tol: float = ANGLE_TOL, name: str = "matrix"):
    c = np.asarray(c, dtype=complex)
    if c.ndim < 2 or c.shape[-1] != c.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {c.shape}")
    eye = np.eye(c.shape[-1])
    dev = np.max(np.abs(np.conj(np.swapaxes(c, -1, -2)) @ c - eye))
    if dev > tol:
        raise ValueError(f"{name} is not unitary (deviation {dev:.3e})")
    return c


def classify_coin(c) -> str:
    """Return ``'diagonal'``, ``'off_diagonal'`` or ``'generic'``."""
    c = check_unitary(c, name="coin")
    if c.shape != (2, 2):
        raise ValueError("coin must be 2x2")
    if abs(c[0, 1]) <= ANGLE_TOL and abs(c[1, 0]) <= ANGLE_TOL:
        return "diagonal"
    if abs(c[0, 0]) <= ANGLE_TOL and abs(c[1, 1]) <= ANGLE_TOL:
        return "off_diagonal"
    return "generic"


@dataclass(frozen=True)
class GaugeTransform:
    """Site phases ``G(x)`` stored on a rectangular window; 1 outside it."""

    phases: np.ndarray
    origin: tuple[int, int]

    @classmethod
    def random(cls, half_width: int, rng=None, center=(0, 0)):
        rng = np.random.default_rng(rng)
        n = 2 * half_width + 1
        phases = np.exp(1j * rng.uniform(0.0, TWO_PI, size=(n, n)))
        return cls(phases, (center[0] - half_width, center[1] - half_width))

    def __call__(self, x1, x2):
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        i = x1 - self.origin[0]
        j = x2 - self.origin[1]
        n1, n2 = self.phases.shape
        inside = (i >= 0) & (i < n1) & (j >= 0) & (j < n2)
        out = np.ones(np.broadcast(i, j).shape, dtype=complex)
        ii = np.broadcast_to(i, out.shape)[inside]
        jj = np.broadcast_to(j, out.shape)[inside]
        out[inside] = self.phases[ii, jj]
        return out


@dataclass(frozen=True)
class GaugeField:
    """Unit link phases ``U_alpha(x)`` realising a homogeneous flux.

    ``kind`` selects the closed form: ``'symmetric'`` uses
    ``U_1 = exp(-i x_2 Phi / 2)``, ``U_2 = exp(i x_1 Phi / 2)``;
    ``'landau'`` uses ``U_1 = exp(-i x_2 Phi)``, ``U_2 = 1``. An optional
    :class:`GaugeTransform` ``G`` maps ``U_alpha(x)`` to
    ``G(x + e_alpha) U_alpha(x) G(x)^-1``.
    """

    flux: Flux
    base: str = "symmetric"
    transform: GaugeTransform | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.base not in ("symmetric", "landau"):
            raise ValueError(f"unknown gauge kind {self.base!r}")

    @property
    def kind(self) -> str:
        return "transformed" if self.transform is not None else self.base

    def phase(self, x1, x2, alpha: int):
        """Vectorised ``U_alpha(x)`` for integer coordinate arrays."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        phi = self.flux.value
        if alpha == 1:
            if self.base == "symmetric":
                u = np.exp(-0.5j * phi * x2) * np.ones_like(x1)
            else:
                u = np.exp(-1j * phi * x2) * np.ones_like(x1)
        elif alpha == 2:
            if self.base == "symmetric":
                u = np.exp(0.5j * phi * x1) * np.ones_like(x2)
            else:
                u = np.ones(np.broadcast(x1, x2).shape, dtype=complex)
        else:
            raise ValueError("direction must be 1 or 2")
        if self.transform is not None:
            ix1 = np.asarray(x1).astype(int)
            ix2 = np.asarray(x2).astype(int)
            d1, d2 = (1, 0) if alpha == 1 else (0, 1)
            u = self.transform(ix1 + d1, ix2 + d2) * u * np.conj(self.transform(ix1, ix2))
        return u

    def with_transform(self, transform: GaugeTransform) -> "GaugeField":
        return GaugeField(self.flux, self.base, transform)


def gauge_phase(g: GaugeField, x, alpha: int) -> complex:
    return complex(g.phase(x[0], x[1], alpha))


def plaquette_phase(g: GaugeField, x1, x2=None):
    """Field strength ``F_12(x)`` in [0, 2pi) from the link commutator.

    ``exp(-i F) = conj(U_1(x)) conj(U_2(x + e_1)) U_1(x + e_2) U_2(x)``.
    Accepts a site tuple or coordinate arrays.
    """
    if x2 is None:
        x1, x2 = x1
    x1 = np.asarray(x1)
    x2 = np.asarray(x2)
    prod = (np.conj(g.phase(x1, x2, 1)) * np.conj(g.phase(x1 + 1, x2, 2))
            * g.phase(x1, x2 + 1, 1) * g.phase(x1, x2, 2))
    out = wrap_angle(-np.angle(prod))
    # snap values within rounding of 2pi back to 0
    out = np.where(TWO_PI - out < 1e-13, 0.0, out)
    return float(out) if out.ndim == 0 else out


SPIN_UP, SPIN_DOWN = +1, -1


def spin_index(s: int) -> int:
    if s == SPIN_UP:
        return 0
    if s == SPIN_DOWN:
        return 1
    raise ValueError(f"spin must be +1 or -1, got {s}")


@dataclass(frozen=True)
class Box:
    """The square ``center + [-L, L]^2`` with a fixed site ordering.

    Sites are enumerated row-major in ``(x_1, x_2)``; the flat state index
    of ``(x, s)`` is ``2 * site + (0 if s == +1 else 1)``.
    """

    L: int
    center: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.L < 0:
            raise ValueError("box half-width must be nonnegative")

    @property
    def side(self) -> int:
        return 2 * self.L + 1

    @property
    def n_sites(self) -> int:
        return self.side ** 2

    @property
    def dim(self) -> int:
        return 2 * self.n_sites

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.side, self.side, 2)

    def coords(self):
        """Coordinate grids ``(X1, X2)`` of shape ``(side, side)``."""
        r1 = np.arange(-self.L, self.L + 1) + self.center[0]
        r2 = np.arange(-self.L, self.L + 1) + self.center[1]
        return np.meshgrid(r1, r2, indexing="ij")

    def sites(self) -> np.ndarray:
        x1, x2 = self.coords()
        return np.stack([x1.ravel(), x2.ravel()], axis=1)

    def contains(self, x) -> bool:
        return (abs(x[0] - self.center[0]) <= self.L
                and abs(x[1] - self.center[1]) <= self.L)

    def site_index(self, x) -> int:
        if not self.contains(x):
            raise IndexError(f"site {tuple(x)} outside box")
        i = x[0] - self.center[0] + self.L
        j = x[1] - self.center[1] + self.L
        return int(i * self.side + j)

    def index(self, x, s: int) -> int:
        return 2 * self.site_index(x) + spin_index(s)

    def unindex(self, k: int):
        site, sp = divmod(int(k), 2)
        i, j = divmod(site, self.side)
        x = (i - self.L + self.center[0], j - self.L + self.center[1])
        return x, (SPIN_UP if sp == 0 else SPIN_DOWN)
