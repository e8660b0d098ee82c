import math

import numpy as np
import pytest

from constwidth import bodies as bo
from constwidth import geometry as geo
from constwidth.errors import (
    DegenerateIntersection,
    DiameterExceeded,
    EmptyIntersection,
)
from constwidth.geometry import EUCLIDEAN, HYPERBOLIC, SPHERICAL

ALL = [EUCLIDEAN, SPHERICAL, HYPERBOLIC]


def triangle_vertices(g, D, rot=0.0):
    R = geo.regular_triangle_circumradius(D, g)
    z0 = geo.reference_point(g)
    e1, e2 = geo.frame(g, z0)
    return np.array([
        geo.exp_map(g, z0, math.cos(a) * e1 + math.sin(a) * e2, R)
        for a in (rot, rot + 2 * math.pi / 3, rot + 4 * math.pi / 3)
    ])


def reuleaux(g, D=1.0, rot=0.0):
    return bo.build(triangle_vertices(g, D, rot), D, g)


def lens(g, D=1.0):
    z0 = geo.reference_point(g)
    e1, _ = geo.frame(g, z0)
    return bo.build(np.array([z0, geo.exp_map(g, z0, e1, D)]), D, g)


def random_cloud(g, n, rng, radius):
    z0 = geo.reference_point(g)
    e1, e2 = geo.frame(g, z0)
    th = rng.uniform(0, 2 * math.pi, n)
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    return geo.exp_map(g, z0, np.outer(np.cos(th), e1) + np.outer(np.sin(th), e2), r)


def stretch_to_diameter(g, pts, D):
    """Scale radially from the reference point until the diameter is D."""
    from scipy.optimize import brentq

    z0 = geo.reference_point(g)
    rays = []
    for p in pts:
        if float(geo.distance(g, z0, p)) < 1e-13:
            rays.append((None, 0.0))
        else:
            rays.append(geo.log_dir(g, z0, p))

    def at_scale(s):
        return np.array([
            z0 if u is None else geo.exp_map(g, z0, u, s * t) for u, t in rays
        ])

    def dm(s):
        return bo.pairwise_diameter(g, at_scale(s))[0] - D

    if dm(1.0) >= 0:
        return pts
    hi = 2.0
    while dm(hi) < 0 and hi < 64:
        hi *= 2
    return at_scale(brentq(dm, 1.0, hi, xtol=1e-13))


class TestBuild:
    @pytest.mark.parametrize("g", ALL)
    def test_lens_shape(self, g):
        b = lens(g)
        assert len(b.arcs) == 2
        assert len(b.vertices) == 2
        assert b.active == (True, True)

    @pytest.mark.parametrize("g", ALL)
    def test_reuleaux_shape(self, g):
        b = reuleaux(g)
        assert len(b.arcs) == 3
        assert all(b.active)
        for a in b.arcs:
            assert a.circle.radius == 1.0

    @pytest.mark.parametrize("g", ALL)
    def test_chain_is_closed_and_ccw(self, g):
        b = reuleaux(g, rot=0.3)
        for i, a in enumerate(b.arcs):
            nxt = b.arcs[(i + 1) % len(b.arcs)]
            assert float(geo.distance(g, a.end.coords, nxt.start.coords)) <= 1e-9
        psi = b._arc_psi
        assert np.all(np.diff(np.unwrap(np.concatenate([psi, psi[:1]]))) > 0)

    def test_single_center_is_ball(self):
        b = bo.build(np.zeros((1, 2)), 1.0, EUCLIDEAN)
        assert b.is_ball
        assert bo.diameter(b) == pytest.approx(2.0, abs=1e-12)

    def test_empty_intersection(self):
        pts = np.array([[0.0, 0.0], [5.0, 0.0]])
        with pytest.raises(EmptyIntersection):
            bo.build(pts, 1.0, EUCLIDEAN)

    def test_degenerate_intersection(self):
        pts = np.array([[0.0, 0.0], [2.0, 0.0]])
        with pytest.raises((DegenerateIntersection, EmptyIntersection)):
            bo.build(pts, 1.0, EUCLIDEAN)

    def test_redundant_center_flagged_inactive(self):
        pts = np.array([[0.0, 0.0], [0.9, 0.0], [0.45, 0.01]])
        b = bo.build(pts, 1.0, EUCLIDEAN)
        assert b.active[0] and b.active[1]
        assert not b.active[2]
        assert len(b.centers) == 3  # retained

    @pytest.mark.parametrize("g", ALL)
    def test_membership_vertices_and_centers(self, g):
        b = reuleaux(g)
        assert bool(np.all(b.contains(b._vertices_arr)))
        assert bool(np.all(b.contains(b._centers_arr)))
        # far point is not a member
        z0 = geo.reference_point(g)
        e1, _ = geo.frame(g, z0)
        assert not b.contains(geo.exp_map(g, z0, e1, 1.4))

    def test_build_deterministic(self):
        a = reuleaux(EUCLIDEAN, rot=0.2)
        b = reuleaux(EUCLIDEAN, rot=0.2)
        assert np.array_equal(a._vertices_arr, b._vertices_arr)
        assert [x.a0 for x in a.arcs] == [x.a0 for x in b.arcs]


class TestDiameter:
    @pytest.mark.parametrize("g", ALL)
    def test_lens_matches_dense_oracle(self, g):
        b = lens(g)
        value = bo.diameter(b)
        pts, _, _ = b.boundary_samples(4096)
        dm_oracle, _ = bo.pairwise_diameter(g, pts)
        assert value >= dm_oracle - 1e-12
        assert value == pytest.approx(dm_oracle, abs=1e-7)
        if g.kappa == 0:
            assert value == pytest.approx(math.sqrt(3.0), abs=1e-12)

    @pytest.mark.parametrize("g", ALL)
    def test_reuleaux_diameter_is_width(self, g):
        assert bo.diameter(reuleaux(g)) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("g", ALL)
    def test_completed_bodies_match_dense_oracle(self, g):
        rng = np.random.default_rng(3)
        for _ in range(3):
            pts = stretch_to_diameter(g, random_cloud(g, 6, rng, 0.5), 1.0)
            b = bo.complete(pts, 1.0, g)
            value = bo.diameter(b)
            sample, _, _ = b.boundary_samples(4096)
            oracle, _ = bo.pairwise_diameter(g, sample)
            assert value == pytest.approx(oracle, abs=1e-6)
            assert value >= oracle - 1e-12

    def test_result_at_least_vertex_diameter(self):
        b = lens(EUCLIDEAN)
        vmax, _ = bo.pairwise_diameter(EUCLIDEAN, b._vertices_arr)
        assert bo.diameter(b) >= vmax - 1e-12


class TestTOperator:
    @pytest.mark.parametrize("g", ALL)
    def test_two_points_give_lens(self, g):
        z0 = geo.reference_point(g)
        e1, _ = geo.frame(g, z0)
        far = geo.exp_map(g, z0, e1, 1.0)
        b = bo.t_operator([geo.Point(g, z0), geo.Point(g, far)], 1.0)
        assert len(b.arcs) == 2
        assert bool(np.all(b.contains(np.array([z0, far]))))

    @pytest.mark.parametrize("g", ALL)
    def test_triangle_gives_reuleaux(self, g):
        verts = triangle_vertices(g, 1.0)
        b = bo.t_operator(verts, 1.0, g)
        assert len(b.arcs) == 3
        ok, margin = bo.is_complete(b, "farthest")
        assert ok and margin <= 1e-9

    def test_single_point_gives_ball(self):
        b = bo.t_operator(np.zeros((1, 2)), 1.0, EUCLIDEAN)
        assert b.is_ball
        assert b.arcs[0].circle.radius == 1.0

    def test_diameter_exceeded(self):
        pts = np.array([[0.0, 0.0], [1.5, 0.0]])
        with pytest.raises(DiameterExceeded):
            bo.t_operator(pts, 1.0, EUCLIDEAN)

    @pytest.mark.parametrize("g", ALL)
    def test_monotone_under_inclusion(self, g):
        rng = np.random.default_rng(11)
        small = random_cloud(g, 4, rng, 0.4)
        extra = random_cloud(g, 3, rng, 0.4)
        big = np.concatenate([small, extra])
        t_small = bo.t_operator(small, 1.0, g)
        t_big = bo.t_operator(big, 1.0, g)
        probe, _, _ = t_big.boundary_samples(128)
        assert bool(np.all(t_small.contains(probe, tol=1e-9)))

    @pytest.mark.parametrize("g", ALL)
    def test_double_application_shrinks_diameter(self, g):
        # intersection of all width-balls whose centers cover T(X) has
        # diameter at most the width
        rng = np.random.default_rng(5)
        pts = random_cloud(g, 5, rng, 0.45)
        t1 = bo.t_operator(pts, 1.0, g)
        samples, _, _ = t1.boundary_samples(600)
        t2 = bo.build(np.concatenate([samples, t1._vertices_arr]), 1.0, g)
        assert bo.diameter(t2) <= 1.0 + 1e-4  # finite-sample envelope slack

    def test_perimeter_shrinks_under_refinement(self):
        g = EUCLIDEAN
        rng = np.random.default_rng(8)
        pts = random_cloud(g, 5, rng, 0.45)
        t1 = bo.t_operator(pts, 1.0, g)
        y = t1.arcs[0].midpoint()
        t2 = bo.t_operator(np.concatenate([pts, y[None, :]]), 1.0, g)
        assert t2.perimeter() <= t1.perimeter() + 1e-9


class TestRadii:
    def test_ball_radii(self):
        b = bo.ball_body(EUCLIDEAN, np.zeros(2), 0.7)
        c, R = bo.circumdisk(b)
        w, r = bo.indisk(b)
        assert R == pytest.approx(0.7, abs=1e-12)
        assert r == pytest.approx(0.7, abs=1e-12)
        assert np.allclose(c.coords, 0) and np.allclose(w.coords, 0)

    @pytest.mark.parametrize("g", ALL)
    def test_reuleaux_radii(self, g):
        D = 1.0
        b = reuleaux(g, D, rot=0.77)
        c, R = bo.circumdisk(b)
        w, r = bo.indisk(b)
        R_law = geo.regular_triangle_circumradius(D, g)
        assert R == pytest.approx(R_law, abs=1e-9)
        assert r == pytest.approx(D - R_law, abs=1e-9)
        assert abs(r + R - D) <= 1e-9
        assert float(geo.distance(g, c.coords, w.coords)) <= 1e-6

    def test_lens_circumdisk_by_symmetry(self):
        b = lens(EUCLIDEAN)
        c, R = bo.circumdisk(b)
        assert np.allclose(c.coords, [0.5, 0.0], atol=1e-8)
        assert R == pytest.approx(math.sqrt(3) / 2, abs=1e-8)

    @pytest.mark.parametrize("g", ALL)
    def test_random_completions_r_plus_R(self, g):
        rng = np.random.default_rng(21)
        for _ in range(6):
            pts = stretch_to_diameter(g, random_cloud(g, 6, rng, 0.5), 1.0)
            b = bo.complete(pts, 1.0, g)
            _, R = bo.circumdisk(b)
            _, r = bo.indisk(b)
            assert abs(r + R - 1.0) <= 1e-7
            # Jung sandwich
            assert 0.5 - 1e-9 <= R <= geo.regular_triangle_circumradius(1.0, g) + 1e-9


class TestIsComplete:
    @pytest.mark.parametrize("g", ALL)
    @pytest.mark.parametrize("mode", ["farthest", "dekster", "fixpoint"])
    def test_reuleaux_complete(self, g, mode):
        ok, margin = bo.is_complete(reuleaux(g), mode)
        assert ok and margin <= 1e-7

    @pytest.mark.parametrize("g", ALL)
    @pytest.mark.parametrize("mode", ["farthest", "dekster", "fixpoint"])
    def test_lens_incomplete(self, g, mode):
        ok, margin = bo.is_complete(lens(g), mode)
        assert not ok and margin > 0.1

    @pytest.mark.parametrize("mode", ["farthest", "dekster", "fixpoint"])
    def test_half_width_ball_complete(self, mode):
        for g in ALL:
            b = bo.ball_body(g, geo.reference_point(g), 0.5, width=1.0)
            ok, margin = bo.is_complete(b, mode)
            assert ok, (g.name, mode, margin)


class TestComplete:
    @pytest.mark.parametrize("g", ALL)
    def test_triangle_completes_to_reuleaux(self, g):
        verts = triangle_vertices(g, 1.0)
        b = bo.complete(verts, 1.0, g)
        assert len(b.centers) == 3
        assert sum(b.active) == 3
        ok, margin = bo.is_complete(b, "farthest")
        assert ok and margin <= 1e-9

    @pytest.mark.parametrize("g", ALL)
    def test_point_completes_to_half_width_ball(self, g):
        z0 = geo.reference_point(g)
        b = bo.complete(np.array([z0]), 1.0, g)
        assert b.is_ball
        assert b.arcs[0].circle.radius == pytest.approx(0.5, abs=1e-9)
        assert b.width == 1.0
        assert bo.diameter(b) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("g", ALL)
    def test_random_sets_complete_and_contain(self, g):
        rng = np.random.default_rng(100)
        for _ in range(8):
            pts = stretch_to_diameter(g, random_cloud(g, 6, rng, 0.5), 1.0)
            b = bo.complete(pts, 1.0, g)
            ok, margin = bo.is_complete(b, "farthest")
            assert ok and margin <= 1e-7
            assert bool(np.all(b.contains(pts, tol=1e-7)))

    def test_diameter_exceeded(self):
        with pytest.raises(DiameterExceeded):
            bo.complete(np.array([[0.0, 0.0], [1.2, 0.0]]), 1.0, EUCLIDEAN)

    @pytest.mark.parametrize("g", ALL)
    def test_idempotence(self, g):
        rng = np.random.default_rng(55)
        pts = stretch_to_diameter(g, random_cloud(g, 5, rng, 0.5), 1.0)
        b1 = bo.complete(pts, 1.0, g)
        if b1.is_ball:
            return
        b2 = bo.complete(b1._vertices_arr, 1.0, g)
        assert bo.hausdorff(b1, b2, n=512) <= 1e-7


class TestHausdorff:
    @pytest.mark.parametrize("g", ALL)
    def test_self_distance(self, g):
        b = reuleaux(g)
        assert bo.hausdorff(b, b, n=256) <= 1e-12

    @pytest.mark.parametrize("g", ALL)
    def test_concentric_balls(self, g):
        z0 = geo.reference_point(g)
        b1 = bo.ball_body(g, z0, 0.3)
        b2 = bo.ball_body(g, z0, 0.55)
        assert bo.hausdorff(b1, b2) == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize("g", ALL)
    def test_reuleaux_vs_circumdisk(self, g):
        b = reuleaux(g)
        c, R = bo.circumdisk(b)
        _, r = bo.indisk(b)
        ball = bo.ball_body(g, c.coords, R, width=1.0)
        got = bo.hausdorff(b, ball)
        assert got == pytest.approx(R - r, abs=1e-6)
        # independent dense-sampling oracle
        pts, _, _ = ball.boundary_samples(20000)
        oracle = float(np.max(b.distance_to_boundary_from_outside(pts)))
        assert got == pytest.approx(oracle, abs=1e-5)

    def test_mismatched_geometry(self):
        from constwidth.errors import MismatchedGeometry

        with pytest.raises(MismatchedGeometry):
            bo.hausdorff(reuleaux(EUCLIDEAN), reuleaux(SPHERICAL))


class TestIsometryAction:
    @pytest.mark.parametrize("g", ALL)
    def test_moved_body_keeps_measurements(self, g):
        b = reuleaux(g)
        iso = geo.pose_isometry(g, triangle_vertices(g, 0.6)[0], 0.9)
        moved = bo.apply_isometry(b, iso)
        assert bo.diameter(moved) == pytest.approx(bo.diameter(b), abs=1e-9)
        _, R1 = bo.circumdisk(b)
        _, R2 = bo.circumdisk(moved)
        assert R1 == pytest.approx(R2, abs=1e-9)

    def test_reflection_of_chain_body(self):
        g = EUCLIDEAN
        b = reuleaux(g, rot=0.25)
        # reflection about the x-axis, orientation-reversing
        mat = np.array([[1.0, 0.0], [0.0, -1.0]])
        iso = geo.Isometry(g, mat, np.zeros(2))
        moved = bo.apply_isometry(b, iso)
        assert bo.diameter(moved) == pytest.approx(1.0, abs=1e-9)


class TestSerialization:
    @pytest.mark.parametrize("g", ALL)
    def test_round_trip_uniform(self, g):
        b = reuleaux(g, rot=0.4)
        d = bo.body_to_dict(b)
        b2 = bo.body_from_dict(d)
        assert bo.hausdorff(b, b2, n=256) <= 1e-12
        assert b2.uniform

    def test_round_trip_ball(self):
        b = bo.ball_body(HYPERBOLIC, geo.reference_point(HYPERBOLIC), 0.5, width=1.0)
        d = bo.body_to_dict(b)
        b2 = bo.body_from_dict(d)
        assert b2.is_ball
        assert b2.arcs[0].circle.radius == pytest.approx(0.5, abs=1e-12)

    def test_rejects_malformed(self):
        from constwidth.errors import ValidationError

        with pytest.raises(ValidationError):
            bo.body_from_dict({"geometry": "flatland", "width": 1.0, "centers": [[0, 0]]})
        with pytest.raises(ValidationError):
            bo.body_from_dict({"geometry": "euclidean", "width": -1.0, "centers": [[0, 0]]})
        with pytest.raises(ValidationError):
            bo.body_from_dict({"geometry": "euclidean", "width": 1.0, "centers": []})
