"""Horizontal lines: classification, joins, the skew hyperbola, sampling.

A line is the left translate of a horizontal 1-parameter subgroup,
represented by a base point and a direction angle in [0, pi).  Two
lines are parallel when their planar projections are; skew lines are
disjoint and not parallel.  A pair of skew lines determines a planar
hyperbola whose tangent segments lift to the lines meeting both: in
coordinates where the projections are the axes and area is preserved,
the hyperbola is x*y = C with 2C the height gap over the projection
crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PreconditionError, SchemaError
from .hgroup import Box, HPoint, TangentVec, exp, mul, pi, plane_height

__all__ = [
    "Line",
    "PairClass",
    "Hyperbola",
    "line_from",
    "classify_pair",
    "join_to_line",
    "hyperbola_of_skew",
    "sample_lines",
    "substream",
]

# Exact-geometry predicates use 1e-10; root-finding constructions 1e-8.
COINCIDENCE_TOL = 1e-10
CONSTRUCTION_TOL = 1e-8


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic child generator for (seed, key); safe across threads."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class Line:
    """base point plus direction angle in [0, pi)."""

    base: HPoint
    angle: float

    def direction(self) -> tuple[float, float]:
        return (math.cos(self.angle), math.sin(self.angle))

    def point(self, t: float) -> HPoint:
        ux, uy = self.direction()
        return mul(self.base, exp(TangentVec(t * ux, t * uy, 0.0)))

    def point_batch(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinates (a, b, c) of the line at each parameter value."""
        ts = np.asarray(ts, dtype=float)
        ux, uy = self.direction()
        a = self.base.a + ts * ux
        b = self.base.b + ts * uy
        c = self.base.c + 0.5 * ts * ts * ux * uy + self.base.a * ts * uy
        return a, b, c

    def planar_offset(self, w) -> float:
        """Signed perpendicular offset of a planar point from pi(line)."""
        ux, uy = self.direction()
        return (w[0] - self.base.a) * uy - (w[1] - self.base.b) * ux

    def height_at(self, w) -> float:
        """c-coordinate of the line over a planar point of its projection."""
        return plane_height(self.base, w)

    def param_of(self, w) -> float:
        ux, uy = self.direction()
        return (w[0] - self.base.a) * ux + (w[1] - self.base.b) * uy

    def contains(self, q: HPoint, tol: float = COINCIDENCE_TOL) -> bool:
        if abs(self.planar_offset(pi(q))) > tol:
            return False
        return abs(q.c - self.height_at(pi(q))) <= tol

    def containment_residual(self, q: HPoint) -> float:
        """max of the planar offset and the height mismatch at q."""
        return max(abs(self.planar_offset(pi(q))), abs(q.c - self.height_at(pi(q))))

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "angle": self.angle}

    @staticmethod
    def from_json(data: object) -> "Line":
        if not (isinstance(data, dict) and "base" in data and "angle" in data):
            raise SchemaError('Line must be {"base": [a,b,c], "angle": phi}')
        return line_from(HPoint.from_json(data["base"]), float(data["angle"]))


def line_from(base: HPoint, angle: float) -> Line:
    """Canonical line through ``base``: angle reduced mod pi, base kept."""
    if not (math.isfinite(angle) and all(map(math.isfinite, (base.a, base.b, base.c)))):
        raise PreconditionError("line parameters must be finite")
    return Line(base, angle % math.pi)


@dataclass(frozen=True)
class PairClass:
    tag: str
    witness: Optional[HPoint] = None

    TAGS = (
        "equal",
        "intersecting",
        "parallel_same_projection",
        "parallel_distinct_projection",
        "skew",
    )

    def to_json(self) -> dict:
        out: dict = {"tag": self.tag}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def classify_pair(l1: Line, l2: Line, tol: float = COINCIDENCE_TOL) -> PairClass:
    """Mutually exclusive classification of a line pair."""
    angle_gap = (l1.angle - l2.angle) % math.pi
    angle_gap = min(angle_gap, math.pi - angle_gap)
    if angle_gap <= tol:
        offset = l1.planar_offset(pi(l2.base))
        if abs(offset) <= tol:
            if abs(l2.base.c - l1.height_at(pi(l2.base))) <= tol:
                return PairClass("equal")
            return PairClass("parallel_same_projection")
        return PairClass("parallel_distinct_projection")
    w0 = _projection_crossing(l1, l2)
    h1 = l1.height_at(w0)
    h2 = l2.height_at(w0)
    if abs(h1 - h2) <= tol:
        return PairClass("intersecting", HPoint(w0[0], w0[1], h1))
    return PairClass("skew")


def _projection_crossing(l1: Line, l2: Line) -> tuple[float, float]:
    u1, u2 = l1.direction(), l2.direction()
    cross = u1[0] * u2[1] - u1[1] * u2[0]
    dx = l2.base.a - l1.base.a
    dy = l2.base.b - l1.base.b
    t1 = (dx * u2[1] - dy * u2[0]) / cross
    return (l1.base.a + t1 * u1[0], l1.base.b + t1 * u1[1])


def join_to_line(p: HPoint, line: Line) -> list[Line]:
    """All lines through ``p`` meeting ``line``.

    A point q = line(t) is joinable to p exactly when (p, q) is a
    horizontal pair, i.e. the height of line at t matches the plane of
    p there.  The quadratic terms of both height profiles share the
    coefficient ux*uy/2 and cancel identically, so the equation is
    affine in t: at most one joining line exists.
    """
    if line.contains(p):
        raise PreconditionError("point lies on the line; joins are degenerate")
    ux, uy = line.direction()
    a1 = line.base.a - p.a
    b1 = line.base.b - p.b
    f0 = line.base.c - plane_height(p, pi(line.base))
    slope = 0.5 * (a1 * uy - b1 * ux)
    if abs(slope) <= 1e-300:
        return []
    t = -f0 / slope
    q = line.point(t)
    dx = q.a - p.a
    dy = q.b - p.b
    return [line_from(p, math.atan2(dy, dx))]


@dataclass(frozen=True)
class Hyperbola:
    """Normal form x*y = C of the tangency hyperbola of a skew pair.

    ``transform`` sends the plane to coordinates where the two
    projections are the x- and y-axes; the linear part has determinant
    +1, so areas are preserved and the tangent segments of the
    hyperbola cut off triangles of signed area 2C at the origin.
    """

    linear: tuple[tuple[float, float], tuple[float, float]]
    translation: tuple[float, float]
    C: float

    def det(self) -> float:
        (m00, m01), (m10, m11) = self.linear
        return m00 * m11 - m01 * m10

    def transform(self, w) -> tuple[float, float]:
        (m00, m01), (m10, m11) = self.linear
        return (
            m00 * w[0] + m01 * w[1] + self.translation[0],
            m10 * w[0] + m11 * w[1] + self.translation[1],
        )

    def inverse_transform(self, xy) -> tuple[float, float]:
        (m00, m01), (m10, m11) = self.linear
        det = self.det()
        x = xy[0] - self.translation[0]
        y = xy[1] - self.translation[1]
        return ((m11 * x - m01 * y) / det, (-m10 * x + m00 * y) / det)

    def tangent_segment(self, s: float) -> tuple[tuple[float, float], tuple[float, float]]:
        """Planar endpoints (on the two asymptotes) of the tangent at s."""
        if s == 0.0:
            raise PreconditionError("tangency parameter must be nonzero")
        return (
            self.inverse_transform((2.0 * s, 0.0)),
            self.inverse_transform((0.0, 2.0 * self.C / s)),
        )

    def to_json(self) -> dict:
        return {
            "linear": [list(self.linear[0]), list(self.linear[1])],
            "translation": list(self.translation),
            "C": self.C,
        }


def hyperbola_of_skew(l1: Line, l2: Line) -> Hyperbola:
    """The hyperbola whose tangent lifts join two skew lines."""
    klass = classify_pair(l1, l2)
    if klass.tag != "skew":
        raise PreconditionError(f"expected a skew pair, got {klass.tag}")
    u1, u2 = l1.direction(), l2.direction()
    cross = u1[0] * u2[1] - u1[1] * u2[0]
    if cross < 0.0:
        u2 = (-u2[0], -u2[1])
        cross = -cross
    # inverse of the column matrix [u1 u2], scaled to determinant one
    s = math.sqrt(cross)
    m00, m01 = u2[1] / cross, -u2[0] / cross
    m10, m11 = -u1[1] / cross, u1[0] / cross
    linear = ((s * m00, s * m01), (s * m10, s * m11))
    w0 = _projection_crossing(l1, l2)
    height_gap = l2.height_at(w0) - l1.height_at(w0)
    translation = (
        -(linear[0][0] * w0[0] + linear[0][1] * w0[1]),
        -(linear[1][0] * w0[0] + linear[1][1] * w0[1]),
    )
    return Hyperbola(linear, translation, 0.5 * height_gap)


def sample_lines(window: Box, n: int, seed: int) -> list[Line]:
    """i.i.d. draws from the kinematic measure on lines meeting the window.

    The measure is the product of a uniform direction angle on [0, pi),
    a uniform signed planar offset across the window's circumscribed
    disk, and a uniform base height over the window's c-range; a line
    is kept iff it meets that circumscribed cylinder, which with these
    ranges is automatic.  Each item draws from its own (seed, index)
    substream, so the output is identical however the work is split.
    """
    if n < 1:
        raise PreconditionError(f"need at least one line, got {n}")
    radius = window.planar_circumradius
    cx, cy = window.planar_center
    c_lo, c_hi = window.c
    out = []
    for i in range(n):
        rng = substream(seed, i)
        phi = rng.uniform(0.0, math.pi)
        offset = rng.uniform(-radius, radius)
        height = rng.uniform(c_lo, c_hi)
        nx, ny = -math.sin(phi), math.cos(phi)
        base = HPoint(cx + offset * nx, cy + offset * ny, height)
        out.append(Line(base, phi))
    return out
