"""Carnot-Caratheodory distance and geodesics.

Geodesics are horizontal lifts of circular arcs.  For the relative
element ``g = inv(p) * q`` write ``w = pi(g)``, ``l = |w|`` and let
``z`` be the z-coordinate of ``log(g)`` (the area the path must enclose
relative to the straight chord).  A minimizing arc with central angle
``theta`` has chord ``l``, radius ``l / (2 sin(theta/2))``, and encloses
the circular-segment area

    area(theta) = l^2 (theta - sin theta) / (8 sin^2(theta/2)),

so ``theta`` solves ``area(theta) = |z|`` and the distance is
``l * theta / (2 sin(theta/2))``.  The degenerate cases are the straight
chord (``z = 0``, distance ``l``) and the full isoperimetric circle
(``l = 0``, distance ``sqrt(4 pi |z|)``).

``grid_oracle_distance`` is an independent check: a shortest path over a
lattice graph whose edges are straight horizontal moves composed via the
group law.  It never undershoots the true distance (every graph path is
a horizontal path) and converges from above as the step shrinks.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, PreconditionError, WindowError
from .hgroup import Box, HPoint, TangentVec, exp, inv, mul, pi

__all__ = [
    "Geodesic",
    "cc_distance",
    "cc_distance_batch",
    "cc_geodesic",
    "grid_oracle_distance",
    "DEFAULT_ORACLE_WINDOW",
]

_TWO_PI = 2.0 * math.pi
# Seam thresholds: below these the arc is treated as a chord / a full circle.
_CHORD_SEAM = 1e-14
_VERTICAL_SEAM = 1e-14
# area(pi) / l^2; above this ratio the central angle exceeds pi.
_RATIO_AT_PI = math.pi / 8.0


def _theta_minus_sin(theta: float) -> float:
    """theta - sin(theta), via the Taylor series when cancellation looms."""
    if theta >= 0.9:
        return theta - math.sin(theta)
    t2 = theta * theta
    term = theta * t2 / 6.0
    acc = term
    k = 1
    while True:
        term *= -t2 / ((2 * k + 2) * (2 * k + 3))
        acc += term
        k += 1
        if abs(term) <= 1e-18 * abs(acc):
            return acc


def _segment_ratio(theta: float) -> float:
    """area(theta) / l^2 for theta in (0, pi]."""
    s = math.sin(0.5 * theta)
    return _theta_minus_sin(theta) / (8.0 * s * s)


def _segment_ratio_top(u: float) -> float:
    """area(2 pi - u) / l^2 for u in (0, pi]; no cancellation near the top."""
    s = math.sin(0.5 * u)
    return (_TWO_PI - u + math.sin(u)) / (8.0 * s * s)


def _ratio_derivative(theta: float) -> float:
    """d/d theta of area(theta)/l^2, positive on (0, 2 pi)."""
    one_minus_cos = 2.0 * math.sin(0.5 * theta) ** 2
    num = one_minus_cos * one_minus_cos - _theta_minus_sin(theta) * math.sin(theta)
    return num / (4.0 * one_minus_cos * one_minus_cos)


def _bisect_newton(f, df, lo: float, hi: float, n_bisect: int, n_newton: int) -> float:
    # Geometric midpoints: the root can sit anywhere in (1e-16, pi), and
    # log-space bisection keeps the RELATIVE bracket width shrinking.
    flo = f(lo)
    for _ in range(n_bisect):
        mid = math.sqrt(lo * hi)
        if mid == lo or mid == hi:
            break
        if (f(mid) > 0.0) == (flo > 0.0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    x = math.sqrt(lo * hi)
    for _ in range(n_newton):
        d = df(x)
        if d == 0.0 or not math.isfinite(d):
            break
        step = f(x) / d
        x_new = x - step
        if not (0.0 < x_new <= math.pi):
            break
        x = x_new
    return x


def _solve_arc(ratio: float) -> tuple[float, float, float]:
    """Solve area(theta)/l^2 = ratio for theta in (0, 2 pi).

    Returns ``(theta, sin(theta/2), cos(theta/2))`` with the half-angle
    functions evaluated in the branch variable actually solved for, so
    no precision is lost near the full circle.  The ratio function is
    strictly increasing, so bisection brackets safely; a few Newton
    steps polish to machine precision.  Above the half-turn the solve
    runs in u = 2 pi - theta to stay well conditioned.
    """
    if ratio <= _RATIO_AT_PI:
        theta = _bisect_newton(
            lambda t: _segment_ratio(t) - ratio,
            _ratio_derivative,
            1e-16,
            math.pi,
            n_bisect=60,
            n_newton=3,
        )
        return theta, math.sin(0.5 * theta), math.cos(0.5 * theta)
    u = _bisect_newton(
        lambda v: _segment_ratio_top(v) - ratio,
        lambda v: -_ratio_derivative(_TWO_PI - v),
        1e-16,
        math.pi,
        n_bisect=60,
        n_newton=3,
    )
    return _TWO_PI - u, math.sin(0.5 * u), -math.cos(0.5 * u)


def _reduced(p: HPoint, q: HPoint) -> tuple[float, float, float, float]:
    """(da, db, l, z) of the relative element inv(p) * q."""
    g = mul(inv(p), q)
    da, db = g.a, g.b
    z = g.c - 0.5 * da * db
    return da, db, math.hypot(da, db), z


def cc_distance(p: HPoint, q: HPoint) -> float:
    """Left-invariant Carnot-Caratheodory distance."""
    _, _, ell, z = _reduced(p, q)
    az = abs(z)
    if az <= _CHORD_SEAM * max(1.0, ell * ell):
        return ell
    if ell <= _VERTICAL_SEAM * max(1.0, math.sqrt(az)):
        return math.sqrt(4.0 * math.pi * az)
    theta, sin_half, _ = _solve_arc(az / (ell * ell))
    return ell * theta / (2.0 * sin_half)


def cc_distance_batch(
    pa: np.ndarray,
    pb: np.ndarray,
    pc: np.ndarray,
    qa: np.ndarray,
    qb: np.ndarray,
    qc: np.ndarray,
) -> np.ndarray:
    """Vectorized ``cc_distance`` on coordinate arrays."""
    pa, pb, pc, qa, qb, qc = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (pa, pb, pc, qa, qb, qc))
    )
    da = qa - pa
    db = qb - pb
    # c-coordinate of inv(p) * q, then the balanced height z.
    crel = (pa * pb - pc) + qc - pa * qb
    z = crel - 0.5 * da * db
    ell = np.hypot(da, db)
    az = np.abs(z)

    out = np.array(ell, dtype=float, copy=True)
    chord = az <= _CHORD_SEAM * np.maximum(1.0, ell * ell)
    vertical = (~chord) & (ell <= _VERTICAL_SEAM * np.maximum(1.0, np.sqrt(az)))
    out[vertical] = np.sqrt(4.0 * math.pi * az[vertical])

    arc = ~(chord | vertical)
    if np.any(arc):
        ratio = az[arc] / (ell[arc] * ell[arc])
        theta, sin_half = _solve_theta_batch(ratio)
        out[arc] = ell[arc] * theta / (2.0 * sin_half)
    return out


def _segment_ratio_np(theta: np.ndarray) -> np.ndarray:
    s = np.sin(0.5 * theta)
    denom = 8.0 * s * s
    direct = theta - np.sin(theta)
    t2 = theta * theta
    # Series for theta - sin(theta) through theta^17; ample below 0.9.
    coeffs = [
        1.0 / 6.0,
        -1.0 / 120.0,
        1.0 / 5040.0,
        -1.0 / 362880.0,
        1.0 / 39916800.0,
        -1.0 / 6227020800.0,
        1.0 / 1307674368000.0,
        -1.0 / 355687428096000.0,
    ]
    poly = np.zeros_like(theta)
    for c in reversed(coeffs):
        poly = poly * t2 + c
    series = theta * t2 * poly
    num = np.where(theta >= 0.9, direct, series)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 0.0, num / denom, 0.0)


def _solve_theta_batch(ratio: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bisection (plus Newton polish) for the arc angle.

    Returns ``(theta, sin(theta/2))`` with the half-angle sine taken
    from the branch variable actually solved for.
    """
    ratio = np.asarray(ratio, dtype=float)
    top = ratio > _RATIO_AT_PI
    lo = np.full_like(ratio, 1e-16)
    hi = np.full_like(ratio, math.pi)

    def f(x: np.ndarray) -> np.ndarray:
        # Increasing in x on both branches after the sign flip: the solve
        # runs in theta below the half-turn and in u = 2 pi - theta above.
        val_low = _segment_ratio_np(x) - ratio
        val_top = _segment_ratio_top_np(x) - ratio
        return np.where(top, -val_top, val_low)

    def df(x: np.ndarray) -> np.ndarray:
        return np.where(
            top, _ratio_derivative_np(_TWO_PI - x), _ratio_derivative_np(x)
        )

    for _ in range(60):
        mid = np.sqrt(lo * hi)
        pos = f(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    x = np.sqrt(lo * hi)
    for _ in range(2):
        d = df(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(d != 0.0, f(x) / d, 0.0)
        x_new = x - step
        ok = (x_new > 0.0) & (x_new < math.pi) & np.isfinite(x_new)
        x = np.where(ok, x_new, x)
    sin_half = np.sin(0.5 * x)
    return np.where(top, _TWO_PI - x, x), sin_half


def _segment_ratio_top_np(u: np.ndarray) -> np.ndarray:
    s = np.sin(0.5 * u)
    return (_TWO_PI - u + np.sin(u)) / (8.0 * s * s)


def _ratio_derivative_np(theta: np.ndarray) -> np.ndarray:
    one_minus_cos = 2.0 * np.sin(0.5 * theta) ** 2
    t2 = theta * theta
    coeffs = [
        1.0 / 6.0,
        -1.0 / 120.0,
        1.0 / 5040.0,
        -1.0 / 362880.0,
        1.0 / 39916800.0,
        -1.0 / 6227020800.0,
        1.0 / 1307674368000.0,
        -1.0 / 355687428096000.0,
    ]
    poly = np.zeros_like(theta)
    for c in reversed(coeffs):
        poly = poly * t2 + c
    tms = np.where(theta >= 0.9, theta - np.sin(theta), theta * t2 * poly)
    num = one_minus_cos * one_minus_cos - tms * np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / (4.0 * one_minus_cos * one_minus_cos)


@dataclass(frozen=True)
class Geodesic:
    """Samples of a length-minimizing horizontal path."""

    samples: tuple[HPoint, ...]
    length: float
    central_angle: float

    def to_json(self) -> dict:
        return {
            "samples": [p.to_json() for p in self.samples],
            "length": self.length,
            "theta": self.central_angle,
        }


def _arc_lift_samples(
    da: float, db: float, z: float, n: int
) -> tuple[list[tuple[float, float, float]], float, float]:
    """Sample the lift (from the identity) of the minimizing circular arc.

    Returns coordinate triples relative to the identity, the length, and
    the central angle.  The planar arc runs from the origin to (da, db);
    its orientation is the sign of ``z`` (counterclockwise encloses
    positive area), and the height is the exact primitive of ``a db``.
    """
    ell = math.hypot(da, db)
    sigma = 1.0 if z >= 0.0 else -1.0
    az = abs(z)

    if ell <= _VERTICAL_SEAM * max(1.0, math.sqrt(az)):
        # Full circle through the origin enclosing area |z|.
        r = math.sqrt(az / math.pi)
        ox, oy = r, 0.0
        alpha0 = math.pi
        theta = _TWO_PI
    else:
        theta, sin_half, cos_half = _solve_arc(az / (ell * ell))
        r = ell / (2.0 * sin_half)
        ux, uy = da / ell, db / ell
        nx, ny = -uy, ux
        h = r * cos_half
        ox = 0.5 * da + sigma * h * nx
        oy = 0.5 * db + sigma * h * ny
        alpha0 = math.atan2(0.0 - oy, 0.0 - ox)

    pts = []
    sin_a0 = math.sin(alpha0)
    sin_2a0 = math.sin(2.0 * alpha0)
    for i in range(n):
        s = i / (n - 1)
        phi = alpha0 + sigma * theta * s
        x = ox + r * math.cos(phi)
        y = oy + r * math.sin(phi)
        c = ox * r * (math.sin(phi) - sin_a0) + r * r * (
            0.5 * (phi - alpha0) + 0.25 * (math.sin(2.0 * phi) - sin_2a0)
        )
        pts.append((x, y, c))
    return pts, r * theta, theta


def cc_geodesic(p: HPoint, q: HPoint, n: int) -> Geodesic:
    """``n`` samples of a minimizing path from ``p`` to ``q``."""
    if n < 2:
        raise PreconditionError(f"need at least 2 samples, got {n}")
    da, db, ell, z = _reduced(p, q)
    az = abs(z)
    if az <= _CHORD_SEAM * max(1.0, ell * ell):
        samples = []
        for i in range(n):
            t = i / (n - 1)
            samples.append(mul(p, exp(TangentVec(t * da, t * db, 0.0))))
        return Geodesic(tuple(samples), ell, 0.0)
    rel, length, theta = _arc_lift_samples(da, db, z, n)
    samples = tuple(mul(p, HPoint(x, y, c)) for x, y, c in rel)
    return Geodesic(samples, length, theta)


# ---------------------------------------------------------------------------
# Independent lattice-graph oracle.
# ---------------------------------------------------------------------------

DEFAULT_ORACLE_WINDOW = Box((-4.0, 4.0), (-4.0, 4.0), (-8.0, 8.0))

# Planar steps by neighborhood size.  Larger sets tighten the directional
# (Finsler) bias of the limiting metric: 4 moves limit to the l1 metric,
# 16 keep the worst-case norm excess below 2.8 percent.
_STEPS = {
    4: ((1, 0), (0, 1), (-1, 0), (0, -1)),
    8: (
        (1, 0), (0, 1), (-1, 0), (0, -1),
        (1, 1), (1, -1), (-1, 1), (-1, -1),
    ),
    16: (
        (1, 0), (0, 1), (-1, 0), (0, -1),
        (1, 1), (1, -1), (-1, 1), (-1, -1),
        (2, 1), (1, 2), (-1, 2), (-2, 1),
        (-2, -1), (-1, -2), (1, -2), (2, -1),
    ),
    32: (
        (1, 0), (0, 1), (-1, 0), (0, -1),
        (1, 1), (1, -1), (-1, 1), (-1, -1),
        (2, 1), (1, 2), (-1, 2), (-2, 1),
        (-2, -1), (-1, -2), (1, -2), (2, -1),
        (3, 1), (1, 3), (-1, 3), (-3, 1),
        (-3, -1), (-1, -3), (1, -3), (3, -1),
        (3, 2), (2, 3), (-2, 3), (-3, 2),
        (-3, -2), (-2, -3), (2, -3), (3, -2),
    ),
}


def _snap_state(p: HPoint, eps: float) -> tuple[int, int, int]:
    # c lives on a half-pitch lattice so that diagonal moves stay exact.
    return (
        round(p.a / eps),
        round(p.b / eps),
        round(2.0 * p.c / (eps * eps)),
    )


def _uni_astar_kernel(si, sj, sk, ti, tj, tk,
                      i_lo, i_hi, j_lo, j_hi, k_lo, k_hi,
                      di_arr, dj_arr, cost_arr, eps, use_h):
    """Unidirectional A* over packed lattice states (numba-compatible).

    With ``use_h`` the remaining distance is bounded below by
    max(|w|, sqrt(4 pi |z|) - |w|), an isoperimetric-inequality bound
    independent of the analytic arc solver.  The bound is admissible
    but not consistent, so states reopen lazily; with lazy reopening
    the first goal pop is still optimal.  Distances live in an
    open-addressing hash table (key -1 = empty slot).  Returns the
    optimal cost, or -1.0 if the goal is unreachable in the index box.
    """
    w_j = j_hi - j_lo + 1
    w_k = k_hi - k_lo + 1
    start = ((si - i_lo) * w_j + (sj - j_lo)) * w_k + (sk - k_lo)
    goal = ((ti - i_lo) * w_j + (tj - j_lo)) * w_k + (tk - k_lo)
    half_pitch = 0.5 * eps * eps
    four_pi = 4.0 * math.pi
    n_steps = di_arr.shape[0]

    ht_cap = 1 << 14
    ht_mask = ht_cap - 1
    ht_keys = np.full(ht_cap, -1, np.int64)
    ht_vals = np.empty(ht_cap, np.float64)
    ht_used = 1
    idx = (start * 2654435761) & ht_mask
    ht_keys[idx] = start
    ht_vals[idx] = 0.0

    cap = 4096
    hf = np.empty(cap, np.float64)
    hg = np.empty(cap, np.float64)
    hs = np.empty(cap, np.int64)
    hf[0] = 0.0
    hg[0] = 0.0
    hs[0] = start
    size = 1

    while size > 0:
        g0 = hg[0]
        s0 = hs[0]
        size -= 1
        hf[0] = hf[size]
        hg[0] = hg[size]
        hs[0] = hs[size]
        pos = 0
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            if child + 1 < size and hf[child + 1] < hf[child]:
                child += 1
            if hf[child] < hf[pos]:
                hf[pos], hf[child] = hf[child], hf[pos]
                hg[pos], hg[child] = hg[child], hg[pos]
                hs[pos], hs[child] = hs[child], hs[pos]
                pos = child
            else:
                break

        if s0 == goal:
            return g0
        idx = (s0 * 2654435761) & ht_mask
        while ht_keys[idx] != s0:
            idx = (idx + 1) & ht_mask
        if g0 > ht_vals[idx]:
            continue

        k = s0 % w_k + k_lo
        rem = s0 // w_k
        j = rem % w_j + j_lo
        i = rem // w_j + i_lo

        for m in range(n_steps):
            di = di_arr[m]
            dj = dj_arr[m]
            ni = i + di
            nj = j + dj
            if ni < i_lo or ni > i_hi or nj < j_lo or nj > j_hi:
                continue
            nk = k + di * dj + 2 * i * dj
            if nk < k_lo or nk > k_hi:
                continue
            ng = g0 + cost_arr[m]
            key = ((ni - i_lo) * w_j + (nj - j_lo)) * w_k + (nk - k_lo)

            idx = (key * 2654435761) & ht_mask
            while True:
                k0 = ht_keys[idx]
                if k0 == key or k0 == -1:
                    break
                idx = (idx + 1) & ht_mask
            if ht_keys[idx] == key:
                if ht_vals[idx] <= ng:
                    continue
                ht_vals[idx] = ng
            else:
                ht_keys[idx] = key
                ht_vals[idx] = ng
                ht_used += 1
                if 5 * ht_used > 3 * ht_cap:
                    new_cap = ht_cap * 4
                    new_mask = new_cap - 1
                    new_keys = np.full(new_cap, -1, np.int64)
                    new_vals = np.empty(new_cap, np.float64)
                    for slot in range(ht_cap):
                        k0 = ht_keys[slot]
                        if k0 != -1:
                            j2 = (k0 * 2654435761) & new_mask
                            while new_keys[j2] != -1:
                                j2 = (j2 + 1) & new_mask
                            new_keys[j2] = k0
                            new_vals[j2] = ht_vals[slot]
                    ht_keys = new_keys
                    ht_vals = new_vals
                    ht_cap = new_cap
                    ht_mask = new_mask

            if use_h:
                da = (ti - ni) * eps
                db = (tj - nj) * eps
                w = math.sqrt(da * da + db * db)
                crel = (tk - nk) * half_pitch - (ni * eps) * db
                z = crel - 0.5 * da * db
                vert = math.sqrt(four_pi * abs(z)) - w
                h = max(w, vert, 0.0)
            else:
                h = 0.0
            if size >= cap:
                cap = cap * 2
                nhf = np.empty(cap, np.float64)
                nhg = np.empty(cap, np.float64)
                nhs = np.empty(cap, np.int64)
                nhf[:size] = hf[:size]
                nhg[:size] = hg[:size]
                nhs[:size] = hs[:size]
                hf = nhf
                hg = nhg
                hs = nhs
            pos = size
            hf[pos] = ng + h
            hg[pos] = ng
            hs[pos] = key
            size += 1
            while pos > 0:
                parent = (pos - 1) // 2
                if hf[pos] < hf[parent]:
                    hf[pos], hf[parent] = hf[parent], hf[pos]
                    hg[pos], hg[parent] = hg[parent], hg[pos]
                    hs[pos], hs[parent] = hs[parent], hs[pos]
                    pos = parent
                else:
                    break
    return -1.0


def _bidi_dijkstra_kernel(si, sj, sk, ti, tj, tk,
                          i_lo, i_hi, j_lo, j_hi, k_lo, k_hi,
                          di_arr, dj_arr, cost_arr):
    """Bidirectional Dijkstra over packed lattice states (numba-compatible).

    The move set is closed under negation and every move is a group
    right-translation, so the graph is undirected and the same
    transition formula serves both frontiers.  Terminates by the
    standard sum rule: once top_f + top_b >= best meeting cost, no
    cheaper path remains.  Distances live in open-addressing hash
    tables (key -1 = empty slot).  Returns the optimal cost, or -1.0
    if the frontiers never meet.
    """
    w_j = j_hi - j_lo + 1
    w_k = k_hi - k_lo + 1
    start = ((si - i_lo) * w_j + (sj - j_lo)) * w_k + (sk - k_lo)
    goal = ((ti - i_lo) * w_j + (tj - j_lo)) * w_k + (tk - k_lo)
    n_steps = di_arr.shape[0]
    best = math.inf

    f_cap = 1 << 14
    f_mask = f_cap - 1
    f_keys = np.full(f_cap, -1, np.int64)
    f_vals = np.empty(f_cap, np.float64)
    f_used = 1
    idx = (start * 2654435761) & f_mask
    f_keys[idx] = start
    f_vals[idx] = 0.0

    b_cap = 1 << 14
    b_mask = b_cap - 1
    b_keys = np.full(b_cap, -1, np.int64)
    b_vals = np.empty(b_cap, np.float64)
    b_used = 1
    idx = (goal * 2654435761) & b_mask
    b_keys[idx] = goal
    b_vals[idx] = 0.0

    cap_f = 4096
    hg_f = np.empty(cap_f, np.float64)
    hs_f = np.empty(cap_f, np.int64)
    size_f = 1
    hg_f[0] = 0.0
    hs_f[0] = start
    cap_b = 4096
    hg_b = np.empty(cap_b, np.float64)
    hs_b = np.empty(cap_b, np.int64)
    size_b = 1
    hg_b[0] = 0.0
    hs_b[0] = goal

    while size_f > 0 and size_b > 0:
        if hg_f[0] + hg_b[0] >= best:
            return best
        forward = hg_f[0] <= hg_b[0]
        if forward:
            hg, hs, size, cap = hg_f, hs_f, size_f, cap_f
            ht_keys, ht_vals, ht_used, ht_cap, ht_mask = f_keys, f_vals, f_used, f_cap, f_mask
            ot_keys, ot_vals, ot_mask = b_keys, b_vals, b_mask
        else:
            hg, hs, size, cap = hg_b, hs_b, size_b, cap_b
            ht_keys, ht_vals, ht_used, ht_cap, ht_mask = b_keys, b_vals, b_used, b_cap, b_mask
            ot_keys, ot_vals, ot_mask = f_keys, f_vals, f_mask

        g0 = hg[0]
        s0 = hs[0]
        size -= 1
        hg[0] = hg[size]
        hs[0] = hs[size]
        pos = 0
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            if child + 1 < size and hg[child + 1] < hg[child]:
                child += 1
            if hg[child] < hg[pos]:
                hg[pos], hg[child] = hg[child], hg[pos]
                hs[pos], hs[child] = hs[child], hs[pos]
                pos = child
            else:
                break

        idx = (s0 * 2654435761) & ht_mask
        while ht_keys[idx] != s0:
            idx = (idx + 1) & ht_mask
        if ht_vals[idx] >= g0:
            k = s0 % w_k + k_lo
            rem = s0 // w_k
            j = rem % w_j + j_lo
            i = rem // w_j + i_lo

            for m in range(n_steps):
                di = di_arr[m]
                dj = dj_arr[m]
                ni = i + di
                nj = j + dj
                if ni < i_lo or ni > i_hi or nj < j_lo or nj > j_hi:
                    continue
                nk = k + di * dj + 2 * i * dj
                if nk < k_lo or nk > k_hi:
                    continue
                ng = g0 + cost_arr[m]
                key = ((ni - i_lo) * w_j + (nj - j_lo)) * w_k + (nk - k_lo)

                idx = (key * 2654435761) & ht_mask
                while True:
                    k0 = ht_keys[idx]
                    if k0 == key or k0 == -1:
                        break
                    idx = (idx + 1) & ht_mask
                if ht_keys[idx] == key:
                    if ht_vals[idx] <= ng:
                        continue
                    ht_vals[idx] = ng
                else:
                    ht_keys[idx] = key
                    ht_vals[idx] = ng
                    ht_used += 1
                    if 5 * ht_used > 3 * ht_cap:
                        new_cap = ht_cap * 4
                        new_mask = new_cap - 1
                        new_keys = np.full(new_cap, -1, np.int64)
                        new_vals = np.empty(new_cap, np.float64)
                        for slot in range(ht_cap):
                            k0 = ht_keys[slot]
                            if k0 != -1:
                                j2 = (k0 * 2654435761) & new_mask
                                while new_keys[j2] != -1:
                                    j2 = (j2 + 1) & new_mask
                                new_keys[j2] = k0
                                new_vals[j2] = ht_vals[slot]
                        ht_keys = new_keys
                        ht_vals = new_vals
                        ht_cap = new_cap
                        ht_mask = new_mask

                idx = (key * 2654435761) & ot_mask
                while True:
                    k0 = ot_keys[idx]
                    if k0 == key or k0 == -1:
                        break
                    idx = (idx + 1) & ot_mask
                if ot_keys[idx] == key:
                    total = ng + ot_vals[idx]
                    if total < best:
                        best = total

                if size >= cap:
                    cap = cap * 2
                    nhg = np.empty(cap, np.float64)
                    nhs = np.empty(cap, np.int64)
                    nhg[:size] = hg[:size]
                    nhs[:size] = hs[:size]
                    hg = nhg
                    hs = nhs
                pos = size
                hg[pos] = ng
                hs[pos] = key
                size += 1
                while pos > 0:
                    parent = (pos - 1) // 2
                    if hg[pos] < hg[parent]:
                        hg[pos], hg[parent] = hg[parent], hg[pos]
                        hs[pos], hs[parent] = hs[parent], hs[pos]
                        pos = parent
                    else:
                        break

        if forward:
            hg_f, hs_f, size_f, cap_f = hg, hs, size, cap
            f_keys, f_vals, f_used, f_cap, f_mask = ht_keys, ht_vals, ht_used, ht_cap, ht_mask
        else:
            hg_b, hs_b, size_b, cap_b = hg, hs, size, cap
            b_keys, b_vals, b_used, b_cap, b_mask = ht_keys, ht_vals, ht_used, ht_cap, ht_mask

    if best < math.inf:
        return best
    return -1.0


_KERNELS: dict[str, object] = {}


def _get_kernels():
    """JIT-compile the search kernels when numba is available."""
    if "uni" not in _KERNELS:
        try:
            import numba

            _KERNELS["uni"] = numba.njit(cache=True)(_uni_astar_kernel)
            _KERNELS["bidi"] = numba.njit(cache=True)(_bidi_dijkstra_kernel)
        except Exception:  # pragma: no cover - numba is normally present
            _KERNELS["uni"] = _uni_astar_kernel
            _KERNELS["bidi"] = _bidi_dijkstra_kernel
    return _KERNELS


def grid_oracle_distance(
    p: HPoint,
    q: HPoint,
    eps: float,
    window: Box = DEFAULT_ORACLE_WINDOW,
    neighborhood: int = 16,
    heuristic: str = "auto",
) -> float:
    """Shortest-path distance over the horizontal lattice graph.

    Vertices are lattice states ``(i eps, j eps, k eps^2 / 2)``; edges
    move by a straight horizontal segment ``(di eps, dj eps)`` composed
    via the group law, at cost equal to the segment length.  The value
    upper-bounds ``cc_distance`` (every graph path is a horizontal
    path) and converges from above as ``eps`` shrinks; the residual
    directional bias of the 16-move neighborhood is below 2.8 percent.

    ``heuristic`` selects the search strategy, never the value:
    ``"lower-bound"`` runs A* with an admissible bound on the remaining
    distance derived from the isoperimetric inequality (independent of
    the analytic arc solver), ``"zero"`` is plain Dijkstra,
    ``"bidirectional"`` meets two Dijkstra frontiers in the middle, and
    ``"auto"`` picks by regime.
    """
    if eps <= 0.0:
        raise PreconditionError(f"step must be positive, got {eps}")
    if neighborhood not in _STEPS:
        raise PreconditionError(f"neighborhood must be one of {sorted(_STEPS)}")
    if heuristic not in ("auto", "lower-bound", "zero", "bidirectional"):
        raise PreconditionError(f"unknown heuristic {heuristic!r}")
    for name, point in (("p", p), ("q", q)):
        if not window.contains(point):
            raise WindowError(f"{name}={point} outside oracle window {window}")

    i_lo = math.ceil(window.a[0] / eps)
    i_hi = math.floor(window.a[1] / eps)
    j_lo = math.ceil(window.b[0] / eps)
    j_hi = math.floor(window.b[1] / eps)
    k_half = 2.0 / (eps * eps)
    k_lo = math.ceil(window.c[0] * k_half)
    k_hi = math.floor(window.c[1] * k_half)

    start = _snap_state(p, eps)
    goal = _snap_state(q, eps)
    for i, j, k in (start, goal):
        if not (i_lo <= i <= i_hi and j_lo <= j <= j_hi and k_lo <= k <= k_hi):
            raise WindowError("snapped endpoint escaped the oracle window")
    if start == goal:
        return 0.0

    moves = _STEPS[neighborhood]
    di_arr = np.array([m[0] for m in moves], dtype=np.int64)
    dj_arr = np.array([m[1] for m in moves], dtype=np.int64)
    cost_arr = np.array([eps * math.hypot(*m) for m in moves], dtype=np.float64)

    kernels = _get_kernels()
    mode = heuristic
    if mode == "auto":
        # Vertical-dominated journeys favor the bidirectional frontier;
        # otherwise the isoperimetric bound makes unidirectional A*
        # explore a thin corridor.  Value is identical either way.
        da = (goal[0] - start[0]) * eps
        db = (goal[1] - start[1]) * eps
        w = math.hypot(da, db)
        crel = (goal[2] - start[2]) * (0.5 * eps * eps) - (start[0] * eps) * db
        z = crel - 0.5 * da * db
        vert = math.sqrt(4.0 * math.pi * abs(z)) - w
        mode = "bidirectional" if vert > 2.0 * w else "lower-bound"
    if mode == "bidirectional":
        out = kernels["bidi"](
            start[0], start[1], start[2],
            goal[0], goal[1], goal[2],
            i_lo, i_hi, j_lo, j_hi, k_lo, k_hi,
            di_arr, dj_arr, cost_arr,
        )
    else:
        out = kernels["uni"](
            start[0], start[1], start[2],
            goal[0], goal[1], goal[2],
            i_lo, i_hi, j_lo, j_hi, k_lo, k_hi,
            di_arr, dj_arr, cost_arr,
            eps,
            mode == "lower-bound",
        )
    if out < 0.0:
        raise NumericError("grid oracle exhausted the window without reaching the target")
    return float(out)
