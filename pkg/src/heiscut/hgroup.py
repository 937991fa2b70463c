"""Arithmetic in the 3-dimensional Heisenberg group.

Group elements are kept in matrix coordinates ``(a, b, c)``, i.e. the
upper unitriangular matrix with first row ``(1, a, c)`` and second row
``(0, 1, b)``.  The product law is

    (a, b, c) * (a', b', c') = (a + a', b + b', c + c' + a*b')

and the abelianization map ``pi`` keeps ``(a, b)``.  The Lie algebra
basis ``X, Y, Z`` satisfies ``[X, Y] = Z`` with ``X, Y`` horizontal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import PreconditionError, SchemaError

__all__ = [
    "HPoint",
    "TangentVec",
    "Polyline2D",
    "Box",
    "IDENTITY",
    "mul",
    "inv",
    "exp",
    "log",
    "dilate",
    "pi",
    "plane_height",
    "lift_polyline",
]


@dataclass(frozen=True)
class HPoint:
    """A group element in matrix coordinates (a, b, c)."""

    a: float
    b: float
    c: float

    def to_json(self) -> list[float]:
        return [self.a, self.b, self.c]

    @staticmethod
    def from_json(data: object) -> "HPoint":
        if not (isinstance(data, (list, tuple)) and len(data) == 3):
            raise SchemaError(f"HPoint must be a JSON array [a, b, c], got {data!r}")
        a, b, c = (float(v) for v in data)
        return HPoint(a, b, c)


@dataclass(frozen=True)
class TangentVec:
    """A Lie algebra element x*X + y*Y + z*Z; the horizontal plane is z = 0."""

    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Polyline2D:
    """A piecewise-linear planar path, the projection of a broken horizontal line."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise PreconditionError("Polyline2D needs at least 2 vertices")
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in self.vertices):
            raise PreconditionError("Polyline2D vertices must be finite")

    @staticmethod
    def of(points: Iterable[Sequence[float]]) -> "Polyline2D":
        return Polyline2D(tuple((float(p[0]), float(p[1])) for p in points))

    def to_json(self) -> list[list[float]]:
        return [[x, y] for x, y in self.vertices]

    @staticmethod
    def from_json(data: object) -> "Polyline2D":
        if not isinstance(data, (list, tuple)):
            raise SchemaError("Polyline2D must be a JSON array of [x, y] pairs")
        try:
            return Polyline2D.of(data)
        except (TypeError, IndexError) as exc:
            raise SchemaError(f"bad Polyline2D vertex: {exc}") from exc

    def shoelace_area(self) -> float:
        """Signed area of the closed polygon, counterclockwise positive."""
        acc = 0.0
        pts = self.vertices
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            acc += x0 * y1 - x1 * y0
        return 0.5 * acc


@dataclass(frozen=True)
class Box:
    """An axis-aligned coordinate box, used as a sampling / support window."""

    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]

    def __post_init__(self) -> None:
        for lo, hi in (self.a, self.b, self.c):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise PreconditionError(f"degenerate window range ({lo}, {hi})")

    def contains(self, p: HPoint) -> bool:
        return (
            self.a[0] <= p.a <= self.a[1]
            and self.b[0] <= p.b <= self.b[1]
            and self.c[0] <= p.c <= self.c[1]
        )

    @property
    def planar_center(self) -> tuple[float, float]:
        return (0.5 * (self.a[0] + self.a[1]), 0.5 * (self.b[0] + self.b[1]))

    @property
    def planar_circumradius(self) -> float:
        return math.hypot(self.a[1] - self.a[0], self.b[1] - self.b[0]) / 2.0

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "c": list(self.c)}

    @staticmethod
    def from_json(data: object) -> "Box":
        if not (isinstance(data, dict) and set(data) >= {"a", "b", "c"}):
            raise SchemaError("window must be an object with ranges a, b, c")
        rng = {k: (float(data[k][0]), float(data[k][1])) for k in ("a", "b", "c")}
        return Box(rng["a"], rng["b"], rng["c"])


IDENTITY = HPoint(0.0, 0.0, 0.0)


def mul(p: HPoint, q: HPoint) -> HPoint:
    return HPoint(p.a + q.a, p.b + q.b, p.c + q.c + p.a * q.b)


def inv(p: HPoint) -> HPoint:
    return HPoint(-p.a, -p.b, p.a * p.b - p.c)


def exp(v: TangentVec) -> HPoint:
    return HPoint(v.x, v.y, v.z + 0.5 * v.x * v.y)


def log(p: HPoint) -> TangentVec:
    return TangentVec(p.a, p.b, p.c - 0.5 * p.a * p.b)


def exp_z(t: float) -> HPoint:
    """exp(t Z), a central element; the fiber through the identity."""
    return HPoint(0.0, 0.0, t)


def dilate(p: HPoint, lam: float) -> HPoint:
    """The scaling automorphism: degree 1 on a, b and degree 2 on c."""
    if not lam > 0.0:
        raise PreconditionError(f"dilation factor must be positive, got {lam}")
    return HPoint(lam * p.a, lam * p.b, lam * lam * p.c)


def pi(p: HPoint) -> tuple[float, float]:
    """Abelianization: the planar projection (a, b)."""
    return (p.a, p.b)


def plane_height(x: HPoint, w: Sequence[float]) -> float:
    """Height over ``w`` of the horizontal plane centered at ``x``.

    The plane is the union of the lines through ``x``; it is the graph of
    this quadratic over the projection plane.  ``y`` lies on the plane of
    ``x`` iff ``y.c == plane_height(x, pi(y))``, and that relation is
    symmetric in ``x`` and ``y``.
    """
    w1, w2 = float(w[0]), float(w[1])
    return x.c + 0.5 * (w1 - x.a) * (w2 - x.b) + x.a * (w2 - x.b)


def lift_polyline(start: HPoint, path: Polyline2D) -> tuple[HPoint, list[float]]:
    """Horizontal lift of a planar polyline, starting at ``start``.

    Returns the endpoint and the c-coordinate at every vertex.  For a
    closed path the endpoint is ``start * exp(A Z)`` where ``A`` is the
    signed (shoelace) area, counterclockwise positive.
    """
    x0, y0 = path.vertices[0]
    scale = max(1.0, abs(start.a), abs(start.b), abs(x0), abs(y0))
    if max(abs(start.a - x0), abs(start.b - y0)) > 1e-12 * scale:
        raise PreconditionError(
            f"pi(start)={pi(start)} does not match first vertex {(x0, y0)}"
        )
    cur = start
    heights = [start.c]
    for (xa, ya), (xb, yb) in zip(path.vertices, path.vertices[1:]):
        step = exp(TangentVec(xb - xa, yb - ya, 0.0))
        cur = mul(cur, step)
        heights.append(cur.c)
    return cur, heights
