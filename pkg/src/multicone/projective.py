"""Projective line geometry: directions, arcs and multicones.

A direction is a line through the origin, represented by its angle in
[0, pi). The projective line is a circle of circumference pi (equivalently,
the doubled-angle model: theta -> 2*theta turns lines into circle points),
so a "projective interval" is a circular arc of length < pi and a multicone
is a proper finite union of disjoint closed arcs.

All distances are the angle between lines, which lives in [0, pi/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .planar import as_array

PI = math.pi

# Arcs closer than this are merged during canonicalization.
MERGE_EPS = 1e-12


class NotProper(Exception):
    """The arc family covers the whole projective line (or is empty)."""


def norm_direction(theta) -> float:
    """Reduce an angle to the canonical direction representative in [0, pi)."""
    t = float(theta) % PI
    return 0.0 if t == PI else t


def proj_distance(t1, t2) -> float:
    """Angle between the lines of directions t1 and t2, in [0, pi/2]."""
    d = abs(norm_direction(t1) - norm_direction(t2)) % PI
    return min(d, PI - d)


def act_direction(m, theta) -> float:
    """Image direction of the line at angle theta under the matrix m."""
    a = as_array(m)
    c, s = math.cos(theta), math.sin(theta)
    x = a[0, 0] * c + a[0, 1] * s
    y = a[1, 0] * c + a[1, 1] * s
    return math.atan2(y, x) % PI


def act_directions(m, thetas) -> np.ndarray:
    """Vectorized act_direction."""
    a = as_array(m)
    th = np.asarray(thetas, dtype=float)
    x = a[0, 0] * np.cos(th) + a[0, 1] * np.sin(th)
    y = a[1, 0] * np.cos(th) + a[1, 1] * np.sin(th)
    return np.arctan2(y, x) % PI


@dataclass(frozen=True)
class ProjInterval:
    """Closed arc on the projective circle: {start + t : 0 <= t <= length}."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length < PI):
            raise ValueError(f"arc length must lie in (0, pi), got {self.length}")
        object.__setattr__(self, "start", norm_direction(self.start))

    @property
    def end(self) -> float:
        return norm_direction(self.start + self.length)

    @property
    def midpoint(self) -> float:
        return norm_direction(self.start + 0.5 * self.length)

    def offset_of(self, theta) -> float:
        """Arc-length coordinate of theta measured forward from start."""
        return (norm_direction(theta) - self.start) % PI

    def contains(self, theta, tol=0.0) -> bool:
        off = self.offset_of(theta)
        return off <= self.length + tol or off >= PI - tol

    def distance_to(self, theta) -> float:
        off = self.offset_of(theta)
        if off <= self.length:
            return 0.0
        return min(off - self.length, PI - off)


def act_interval(m, arc: ProjInterval) -> ProjInterval:
    """Image of an arc under an invertible matrix.

    A projective map is a circle homeomorphism, so the image is the arc
    between the endpoint images that contains the midpoint image.
    """
    p = act_direction(m, arc.start)
    q = act_direction(m, arc.end)
    mid = act_direction(m, arc.midpoint)
    length = (q - p) % PI
    if length == 0.0:
        # Numerically collapsed: return a degenerate sliver around p.
        return ProjInterval(p - 1e-15, 2e-15)
    forward = ProjInterval(p, length)
    if forward.contains(mid):
        return forward
    return ProjInterval(q, PI - length)


def _merge_line_intervals(intervals, eps):
    """Merge [s, e] intervals on the real line when gaps are <= eps."""
    out = []
    for s, e in sorted(intervals):
        if out and s <= out[-1][1] + eps:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    return out


class Multicone:
    """Proper finite union of disjoint closed arcs on the projective circle.

    Canonical form: arcs sorted by start angle, pairwise gaps larger than
    the merge tolerance, total length strictly less than pi.
    """

    __slots__ = ("arcs",)

    def __init__(self, arcs, merge_eps=MERGE_EPS):
        canon = _canonicalize(arcs, merge_eps)
        self.arcs = tuple(canon)

    @classmethod
    def from_arcs(cls, arcs, merge_eps=MERGE_EPS):
        return cls(arcs, merge_eps)

    @classmethod
    def neighborhood(cls, directions, radius, merge_eps=MERGE_EPS):
        """Closed radius-neighborhood of a finite set of directions."""
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        dirs = np.atleast_1d(np.asarray(directions, dtype=float))
        if dirs.size == 0:
            raise NotProper("empty direction set")
        if 2.0 * radius >= PI:
            raise NotProper("neighborhood radius covers the projective line")
        return cls([ProjInterval(t - radius, 2.0 * radius) for t in dirs], merge_eps)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    @property
    def total_length(self) -> float:
        return float(sum(a.length for a in self.arcs))

    def boundary_points(self) -> list[float]:
        pts = []
        for a in self.arcs:
            pts.append(a.start)
            pts.append(a.end)
        return pts

    def contains_direction(self, theta, tol=0.0) -> bool:
        return any(a.contains(theta, tol) for a in self.arcs)

    def distance_to(self, theta) -> float:
        return min(a.distance_to(theta) for a in self.arcs)

    def complement(self):
        """Closure of the complement, again a multicone."""
        n = len(self.arcs)
        gaps = []
        for i, a in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % n]
            gap = (nxt.start - a.end) % PI if n > 1 else PI - a.length
            gaps.append(ProjInterval(a.end, gap))
        return Multicone(gaps)

    def union(self, other, merge_eps=MERGE_EPS):
        return Multicone(list(self.arcs) + list(other.arcs), merge_eps)

    def apply(self, m, merge_eps=MERGE_EPS):
        """Image multicone under an invertible matrix."""
        return Multicone([act_interval(m, a) for a in self.arcs], merge_eps)

    def fatten(self, radius, merge_eps=MERGE_EPS):
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        return Multicone(
            [ProjInterval(a.start - radius, a.length + 2.0 * radius) for a in self.arcs],
            merge_eps,
        )

    def sym_diff_length(self, other) -> float:
        """Total length of the symmetric difference with another multicone."""
        cuts = sorted(set(self.boundary_points()) | set(other.boundary_points()))
        if not cuts:
            return 0.0
        total = 0.0
        for i, lo in enumerate(cuts):
            hi = cuts[(i + 1) % len(cuts)]
            seg = (hi - lo) % PI if len(cuts) > 1 else PI
            if seg == 0.0:
                continue
            mid = (lo + 0.5 * seg) % PI
            if self.contains_direction(mid) != other.contains_direction(mid):
                total += seg
        return total

    def is_close(self, other, tol=1e-9) -> bool:
        return self.sym_diff_length(other) <= tol

    def __repr__(self):
        inner = ", ".join(f"({a.start:.6f},{a.length:.6f})" for a in self.arcs)
        return f"Multicone[{inner}]"


def _canonicalize(arcs, eps):
    arcs = list(arcs)
    if not arcs:
        raise NotProper("a multicone needs at least one arc")
    for a in arcs:
        if not isinstance(a, ProjInterval):
            raise TypeError("arcs must be ProjInterval instances")
    # Lift every arc at three consecutive offsets and merge on the line; the
    # merged intervals starting in [pi, 2*pi) are exactly the circular arcs.
    lifted = []
    for a in arcs:
        for k in (0, 1, 2):
            lifted.append((a.start + k * PI, a.start + k * PI + a.length))
    merged = _merge_line_intervals(lifted, eps)
    out = []
    for s, e in merged:
        if e - s >= PI - eps:
            raise NotProper("arcs cover the projective line")
        if PI <= s < 2.0 * PI:
            out.append(ProjInterval(s - PI, e - s))
    if not out:
        raise NotProper("canonicalization lost all arcs")
    total = sum(a.length for a in out)
    if total >= PI - eps:
        raise NotProper("total arc length reaches pi")
    out.sort(key=lambda a: a.start)
    return out


@dataclass(frozen=True)
class ContainmentAnswer:
    """Result of a strict-containment query, with margin or witness."""

    strict: bool
    # Smallest distance from the inner set to the complement of the outer
    # set (capped at pi/2), present when strict.
    margin: float | None = None
    # A direction of the inner set outside the outer interior, when not.
    witness: float | None = None


def strictly_inside(inner: Multicone, outer: Multicone) -> ContainmentAnswer:
    """Is the inner multicone contained in the interior of the outer one?"""
    worst = PI
    for ia in inner.arcs:
        best = None
        for oa in outer.arcs:
            off = (ia.start - oa.start) % PI
            head = off
            tail = oa.length - off - ia.length
            if head <= oa.length and tail >= 0.0:
                cand = min(head, tail)
                if best is None or cand > best:
                    best = cand
        if best is None or best <= 0.0:
            witness = _escape_point(ia, outer)
            return ContainmentAnswer(False, witness=witness)
        worst = min(worst, best)
    return ContainmentAnswer(True, margin=min(worst, PI / 2.0))


def contained(inner: Multicone, outer: Multicone, tol=0.0) -> bool:
    """Non-strict containment, inner within outer up to tol."""
    for ia in inner.arcs:
        ok = False
        for oa in outer.arcs:
            off = ((ia.start - oa.start + tol) % PI) - tol
            if off >= -tol and off + ia.length <= oa.length + tol:
                ok = True
                break
        if not ok:
            return False
    return True


def _escape_point(arc: ProjInterval, outer: Multicone) -> float:
    """Some point of the arc that is not in the interior of outer."""
    for theta in (arc.start, arc.end, arc.midpoint):
        if not outer.contains_direction(theta):
            return theta
    # The arc touches the boundary: one of its endpoints is a boundary point.
    for theta in outer.boundary_points():
        if arc.contains(theta, tol=1e-15):
            return norm_direction(theta)
    return arc.start
