"""Closed subsets of the unit circle represented as finite unions of arcs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import TWO_PI, angle_distance, wrap_angle

MERGE_EPS = 1e-12


def _merge(starts, ends, tol=MERGE_EPS):
    """Merge arcs ``[s, e]`` (``s`` in [0, 2pi), ``e >= s``) on the circle."""
    starts = np.asarray(starts, dtype=float).ravel()
    ends = np.asarray(ends, dtype=float).ravel()
    if starts.size == 0:
        return np.empty(0), np.empty(0)
    if np.any(ends - starts >= TWO_PI - tol):
        return np.array([0.0]), np.array([TWO_PI])
    order = np.argsort(starts, kind="stable")
    s = starts[order]
    e = ends[order]
    # running maximum of ends marks where a new component begins
    run_end = np.maximum.accumulate(e)
    new = np.empty(s.size, dtype=bool)
    new[0] = True
    new[1:] = s[1:] > run_end[:-1] + tol
    comp = np.cumsum(new) - 1
    ms = s[new]
    me = np.zeros(ms.size)
    np.maximum.at(me, comp, e)
    # components that wrap past 2pi may swallow the first ones
    while ms.size > 1 and me[-1] - TWO_PI >= ms[0] - tol:
        me[-1] = max(me[-1], me[0] + TWO_PI)
        ms, me = ms[1:], me[1:]
    if me[-1] - ms[-1] >= TWO_PI - tol or (ms.size == 1 and me[0] - TWO_PI >= ms[0] - tol):
        return np.array([0.0]), np.array([TWO_PI])
    return ms, me


@dataclass(frozen=True)
class SpectrumSet:
    """Disjoint closed arcs ``[start_i, end_i]`` sorted by start.

    Starts lie in [0, 2pi); an end may exceed 2pi for the arc that wraps
    through angle 0. The full circle is the single arc ``[0, 2pi]``.
    """

    starts: np.ndarray
    ends: np.ndarray

    @classmethod
    def empty(cls):
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def full(cls):
        return cls(np.array([0.0]), np.array([TWO_PI]))

    @classmethod
    def from_arcs(cls, starts, ends, tol: float = MERGE_EPS):
        """Arcs from ``starts`` (any real) running counter-clockwise to ``ends``."""
        starts = np.asarray(starts, dtype=float).ravel()
        ends = np.asarray(ends, dtype=float).ravel()
        if np.any(ends < starts):
            raise ValueError("arc ends must not precede starts")
        s0 = wrap_angle(starts)
        ms, me = _merge(s0, s0 + (ends - starts), tol)
        return cls(ms, me)

    def __len__(self):
        return int(self.starts.size)

    @property
    def is_empty(self) -> bool:
        return self.starts.size == 0

    @property
    def is_full(self) -> bool:
        return self.starts.size == 1 and self.ends[0] - self.starts[0] >= TWO_PI - MERGE_EPS

    @property
    def lengths(self) -> np.ndarray:
        return self.ends - self.starts

    def measure(self) -> float:
        return float(np.sum(self.lengths))

    def gap_count(self) -> int:
        return 0 if self.is_full else len(self)

    def arcs(self):
        return list(zip(self.starts.tolist(), self.ends.tolist()))

    def contains(self, theta, tol: float = 0.0):
        theta = wrap_angle(np.asarray(theta, dtype=float))
        if self.is_empty:
            return np.zeros(np.shape(theta), dtype=bool)
        if self.is_full:
            return np.ones(np.shape(theta), dtype=bool)
        idx = np.searchsorted(self.starts, theta + tol, side="right") - 1
        inside = (idx >= 0) & (theta <= self.ends[np.maximum(idx, 0)] + tol)
        wrap_end = self.ends[-1] - TWO_PI
        inside |= theta <= wrap_end + tol
        return inside

    def endpoints(self) -> np.ndarray:
        if self.is_full or self.is_empty:
            return np.empty(0)
        return np.sort(wrap_angle(np.concatenate([self.starts, self.ends])))

    def gap_midpoints(self) -> np.ndarray:
        if self.is_full or self.is_empty:
            return np.empty(0)
        nxt = np.roll(self.starts, -1)
        nxt[-1] += TWO_PI
        return wrap_angle(0.5 * (self.ends + nxt))

    def distance_to(self, theta) -> np.ndarray:
        """Circle distance from each angle to the set."""
        if self.is_empty:
            raise ValueError("distance to an empty set is undefined")
        theta = wrap_angle(np.atleast_1d(np.asarray(theta, dtype=float)))
        if self.is_full:
            return np.zeros(theta.shape)
        ep = self.endpoints()
        j = np.searchsorted(ep, theta)
        left = ep[(j - 1) % ep.size]
        right = ep[j % ep.size]
        d = np.minimum(angle_distance(theta, left), angle_distance(theta, right))
        return np.where(self.contains(theta), 0.0, d)

    def transformed(self, kind: str) -> "SpectrumSet":
        """Image under ``'conj'`` (z -> z*) or ``'negate'`` (z -> -z)."""
        if self.is_empty or self.is_full:
            return self
        if kind == "conj":
            return SpectrumSet.from_arcs(-self.ends, -self.starts)
        if kind == "negate":
            return self.rotated(np.pi)
        raise ValueError(f"unknown transform {kind!r}")

    def rotated(self, angle: float) -> "SpectrumSet":
        if self.is_empty or self.is_full:
            return self
        return SpectrumSet.from_arcs(self.starts + angle, self.ends + angle)

    def union(self, other: "SpectrumSet") -> "SpectrumSet":
        return SpectrumSet.from_arcs(np.concatenate([self.starts, other.starts]),
                                     np.concatenate([self.ends, other.ends]))


def from_samples(phases, tol: float) -> SpectrumSet:
    """Union of closed ``tol``-neighbourhoods of sample phases."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    phases = np.asarray(phases, dtype=float).ravel()
    return SpectrumSet.from_arcs(phases - tol, phases + tol)


def lebesgue_measure(s: SpectrumSet) -> float:
    return s.measure()


def hausdorff_distance(a: SpectrumSet, b: SpectrumSet) -> float:
    """Symmetric Hausdorff distance in the arc-length metric.

    On each gap of the other set the distance function is a tent peaking
    at the gap midpoint, so it suffices to evaluate at this set's
    endpoints and at the other set's gap midpoints lying inside this set.
    """
    if a.is_empty or b.is_empty:
        raise ValueError("Hausdorff distance needs nonempty sets")

    def one_sided(x: SpectrumSet, y: SpectrumSet) -> float:
        cand = [x.endpoints()]
        mids = y.gap_midpoints()
        if mids.size:
            cand.append(mids[x.contains(mids)])
        cand = np.concatenate(cand)
        if cand.size == 0:
            return 0.0
        return float(np.max(y.distance_to(cand)))

    return max(one_sided(a, b), one_sided(b, a))
