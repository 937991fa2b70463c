import math

import numpy as np
import pytest

from heiscut.ccmetric import (
    DEFAULT_ORACLE_WINDOW,
    cc_distance,
    cc_distance_batch,
    cc_geodesic,
    grid_oracle_distance,
    _segment_ratio,
    _segment_ratio_top,
    _solve_arc,
    _TWO_PI,
)
from heiscut.errors import PreconditionError, WindowError
from heiscut.hgroup import Box, HPoint, IDENTITY, dilate, exp_z, mul, inv


def rand_points(rng, n, scale=2.0):
    arr = rng.uniform(-scale, scale, (n, 3))
    return [HPoint(*row) for row in arr]


def snap(p, eps):
    """Round onto the oracle lattice (pitch eps, half-pitch eps^2/2 in c)."""
    half = eps * eps / 2
    return HPoint(round(p.a / eps) * eps, round(p.b / eps) * eps, round(p.c / half) * half)


class TestDistance:
    def test_vertical_formula(self):
        for t in (1.0, 0.25, 7.5, 1e-6, 1e3):
            assert cc_distance(IDENTITY, exp_z(t)) == pytest.approx(
                math.sqrt(4 * math.pi * t), rel=1e-12
            )
        assert cc_distance(IDENTITY, exp_z(1.0)) == pytest.approx(3.5449077018110318)

    def test_chord_case(self):
        # z = 6 - 3*4/2 = 0: straight horizontal chord of length 5
        assert cc_distance(IDENTITY, HPoint(3, 4, 6)) == 5.0

    def test_symmetry_and_zero(self):
        p, q = HPoint(0.3, 1.2, -0.4), HPoint(-1.0, 0.2, 0.9)
        assert cc_distance(p, p) == 0.0
        assert cc_distance(p, q) == pytest.approx(cc_distance(q, p), rel=1e-12)

    def test_left_invariance(self):
        rng = np.random.default_rng(11)
        for g, p, q in zip(*(rand_points(rng, 400) for _ in range(3))):
            d1 = cc_distance(p, q)
            d2 = cc_distance(mul(g, p), mul(g, q))
            assert d2 == pytest.approx(d1, rel=1e-10)

    def test_dilation_homogeneity(self):
        rng = np.random.default_rng(12)
        lams = rng.uniform(0.1, 10.0, 400)
        for lam, p, q in zip(lams, rand_points(rng, 400), rand_points(rng, 400)):
            d1 = cc_distance(p, q)
            assert cc_distance(dilate(p, lam), dilate(q, lam)) == pytest.approx(
                lam * d1, rel=1e-10
            )

    def test_triangle_inequality(self):
        rng = np.random.default_rng(13)
        for p, q, r in zip(*(rand_points(rng, 300) for _ in range(3))):
            assert cc_distance(p, r) <= cc_distance(p, q) + cc_distance(q, r) + 1e-10

    def test_root_solve_residual(self):
        rng = np.random.default_rng(14)
        for _ in range(2000):
            w = 10.0 ** rng.uniform(-13, 13)
            theta, sin_half, _ = _solve_arc(w)
            if theta > math.pi:
                u = _TWO_PI - theta
                area = (_TWO_PI - u + math.sin(u)) / (8 * sin_half * sin_half)
            else:
                area = _segment_ratio(theta)
            assert abs(area - w) < 1e-12 * max(1.0, w)

    def test_seam_continuity(self):
        # fine sweeps crossing the chord seam (log-z -> 0 at fixed l = 1)
        # and the vertical seam (l -> 0 at fixed z = 1)
        prev = None
        for z in np.linspace(0.0, 1e-13, 500):
            d = cc_distance(IDENTITY, HPoint(1, 0, z))
            if prev is not None:
                assert abs(d - prev) < 1e-6
            prev = d
        prev = None
        for ell in np.linspace(0.0, 1e-13, 500):
            d = cc_distance(IDENTITY, HPoint(ell, 0, 1.0))
            if prev is not None:
                assert abs(d - prev) < 1e-6
            prev = d
        # wider crossings stay monotone-continuous at coarse resolution
        for z in np.linspace(0.0, 1e-3, 2000):
            d = cc_distance(IDENTITY, HPoint(1, 0, z))
            assert 1.0 <= d < 1.0 + 1e-2

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(15)
        P = rng.uniform(-3, 3, (500, 3))
        Q = rng.uniform(-3, 3, (500, 3))
        batch = cc_distance_batch(P[:, 0], P[:, 1], P[:, 2], Q[:, 0], Q[:, 1], Q[:, 2])
        for row_p, row_q, d in zip(P, Q, batch):
            assert d == pytest.approx(cc_distance(HPoint(*row_p), HPoint(*row_q)), rel=1e-12)


class TestGeodesic:
    def test_straight_segment(self):
        geo = cc_geodesic(IDENTITY, HPoint(1, 0, 0), 5)
        for i, s in enumerate(geo.samples):
            t = i / 4
            assert s.a == pytest.approx(t, abs=1e-15)
            assert s.b == 0.0
            assert s.c == 0.0
        assert geo.length == pytest.approx(1.0)
        assert geo.central_angle == 0.0

    def test_isoperimetric_circle(self):
        geo = cc_geodesic(IDENTITY, exp_z(1.0), 64)
        end = geo.samples[-1]
        assert end.a == pytest.approx(0.0, abs=1e-12)
        assert end.b == pytest.approx(0.0, abs=1e-12)
        assert end.c == pytest.approx(1.0, rel=1e-12)
        assert geo.length == pytest.approx(math.sqrt(4 * math.pi), rel=1e-12)
        assert geo.central_angle == pytest.approx(2 * math.pi)
        # projections trace a circle of enclosed area 1
        xs = np.array([s.a for s in geo.samples])
        ys = np.array([s.b for s in geo.samples])
        assert circle_fit_residual(xs, ys) < 1e-9

    def test_endpoint_and_length_match(self):
        rng = np.random.default_rng(16)
        for p, q in zip(rand_points(rng, 100), rand_points(rng, 100)):
            geo = cc_geodesic(p, q, 17)
            end = geo.samples[-1]
            assert max(abs(end.a - q.a), abs(end.b - q.b), abs(end.c - q.c)) < 1e-8
            assert geo.length == pytest.approx(cc_distance(p, q), abs=1e-8)

    def test_projection_on_circle_or_line(self):
        rng = np.random.default_rng(17)
        for p, q in zip(rand_points(rng, 50), rand_points(rng, 50)):
            geo = cc_geodesic(p, q, 33)
            xs = np.array([s.a for s in geo.samples])
            ys = np.array([s.b for s in geo.samples])
            if geo.central_angle == 0.0:
                # straight: collinearity residual
                dx, dy = xs[-1] - xs[0], ys[-1] - ys[0]
                cross = (xs - xs[0]) * dy - (ys - ys[0]) * dx
                assert np.max(np.abs(cross)) < 1e-9
            else:
                assert circle_fit_residual(xs, ys) < 1e-9

    def test_consecutive_samples_nearly_horizontal(self):
        # chord z-residual shrinks like (arc step)^3
        geo = cc_geodesic(IDENTITY, HPoint(0.6, -0.2, 0.4), 200)
        for s0, s1 in zip(geo.samples, geo.samples[1:]):
            g = mul(inv(s0), s1)
            z = g.c - 0.5 * g.a * g.b
            assert abs(z) < 1e-6

    def test_polygonal_length_additive(self):
        # consecutive samples lie on the same minimizing arc, so the
        # pairwise CC distances are exactly additive at every sampling
        # rate -- convergence is immediate, stronger than first order
        p, q = HPoint(0.2, 0.1, 0.0), HPoint(-0.5, 0.7, 0.9)
        d = cc_distance(p, q)

        def poly_len(n):
            geo = cc_geodesic(p, q, n)
            acc = 0.0
            for s0, s1 in zip(geo.samples, geo.samples[1:]):
                acc += cc_distance(s0, s1)
            return acc

        for n in (4, 16, 64, 128):
            assert poly_len(n) == pytest.approx(d, abs=1e-9)

    def test_sample_count_validation(self):
        with pytest.raises(PreconditionError):
            cc_geodesic(IDENTITY, HPoint(1, 0, 0), 1)

    def test_json_shape(self):
        geo = cc_geodesic(IDENTITY, HPoint(1, 0, 0), 3)
        data = geo.to_json()
        assert set(data) == {"samples", "length", "theta"}
        assert len(data["samples"]) == 3


def circle_fit_residual(xs, ys):
    """Largest deviation from the algebraically fitted circle (Kasa fit)."""
    A = np.column_stack([2 * xs, 2 * ys, np.ones_like(xs)])
    b = xs * xs + ys * ys
    (cx, cy, c0), *_ = np.linalg.lstsq(A, b, rcond=None)
    r = math.sqrt(max(c0 + cx * cx + cy * cy, 0.0))
    return float(np.max(np.abs(np.hypot(xs - cx, ys - cy) - r)))


class TestGridOracle:
    def test_axis_path(self):
        assert grid_oracle_distance(IDENTITY, HPoint(1, 0, 0), 1 / 32) == pytest.approx(
            1.0, rel=0.03
        )

    def test_agreement_generic_pair(self):
        # module example: within 2 percent on (1, 0, 0.5)
        d = cc_distance(IDENTITY, HPoint(1, 0, 0.5))
        o = grid_oracle_distance(IDENTITY, HPoint(1, 0, 0.5), 1 / 32)
        assert o >= d - 1e-9
        assert o == pytest.approx(d, rel=0.02)

    def test_never_undershoots(self):
        # on lattice-aligned endpoints every graph path is a horizontal
        # path, so the graph value can never be below the CC distance
        rng = np.random.default_rng(18)
        eps = 1 / 16
        for _ in range(10):
            p = snap(HPoint(*rng.uniform(-0.4, 0.4, 3) * [1, 1, 0.25]), eps)
            q = snap(HPoint(*rng.uniform(-0.4, 0.4, 3) * [1, 1, 0.25]), eps)
            o = grid_oracle_distance(p, q, eps)
            assert o >= cc_distance(p, q) - 1e-9

    def test_refinement_improves(self):
        rng = np.random.default_rng(19)
        better = 0
        total = 0
        for _ in range(8):
            p = snap(HPoint(*rng.uniform(-0.3, 0.3, 3) * [1, 1, 0.2]), 1 / 16)
            q = snap(HPoint(*rng.uniform(-0.3, 0.3, 3) * [1, 1, 0.2]), 1 / 16)
            d = cc_distance(p, q)
            if d < 0.05:
                continue
            coarse = grid_oracle_distance(p, q, 1 / 16)
            fine = grid_oracle_distance(p, q, 1 / 32)
            total += 1
            if abs(fine - d) <= abs(coarse - d) + 1e-12:
                better += 1
        assert total >= 5
        assert better >= total - 1

    def test_modes_agree(self):
        p, q = HPoint(0.125, 0, 0), HPoint(-0.25, 0.25, 0.125)
        vals = {
            mode: grid_oracle_distance(p, q, 1 / 8, heuristic=mode)
            for mode in ("auto", "lower-bound", "zero", "bidirectional")
        }
        assert len({round(v, 12) for v in vals.values()}) == 1

    def test_window_enforced(self):
        with pytest.raises(WindowError):
            grid_oracle_distance(IDENTITY, HPoint(100, 0, 0), 1 / 8)
        with pytest.raises(WindowError):
            grid_oracle_distance(
                IDENTITY, HPoint(0.5, 0, 0.75), 1 / 8,
                window=Box((-1, 1), (-1, 1), (-0.5, 0.5)),
            )

    def test_bad_arguments(self):
        with pytest.raises(PreconditionError):
            grid_oracle_distance(IDENTITY, HPoint(1, 0, 0), -0.1)
        with pytest.raises(PreconditionError):
            grid_oracle_distance(IDENTITY, HPoint(1, 0, 0), 1 / 8, neighborhood=5)
        with pytest.raises(PreconditionError):
            grid_oracle_distance(IDENTITY, HPoint(1, 0, 0), 1 / 8, heuristic="magic")


@pytest.mark.slow
class TestGridOracleVertical:
    def test_vertical_example(self):
        # d(e, exp Z) = sqrt(4 pi); the graph value converges from above
        target = math.sqrt(4 * math.pi)
        o = grid_oracle_distance(IDENTITY, exp_z(1.0), 1 / 32)
        assert o >= target - 1e-9
        assert o == pytest.approx(target, rel=0.05)
