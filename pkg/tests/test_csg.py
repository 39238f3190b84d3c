import math
import random

import numpy as np
import pytest
from scipy.optimize import minimize

from midair.csg import (
    Box,
    Cylinder,
    DegenerateAxisError,
    Leaf,
    LeafNotOperatorError,
    NonPositiveScaleError,
    Op,
    OpKind,
    Primitive,
    RotateAbout,
    Scene,
    ScaleAxes,
    Sphere,
    Translate,
    UnknownIdError,
    UnknownNodeError,
    apply_pose_delta,
    contains,
    contains_batch,
    iter_nodes,
    leaves_under,
    node_aabb,
    primitive_aabb,
    selection_aabb,
    set_operator,
    signed_distance,
    signed_distance_batch,
)
from midair.geometry import Pose, Rotation, Vec3

from .conftest import FIXTURE_NAMES, load_fixture


def single(kind, pose=None, name="s", pid="a"):
    return Scene(name, {pid: Primitive(pid, kind, pose or Pose.identity())}, Leaf(pid))


def pair(kind_a, pose_a, kind_b, pose_b, op):
    prims = {
        "a": Primitive("a", kind_a, pose_a),
        "b": Primitive("b", kind_b, pose_b),
    }
    return Scene("pair", prims, Op(op, (Leaf("a"), Leaf("b")), "r"))


def at(x, y, z):
    return Pose(Vec3(x, y, z), Rotation.identity(), Vec3(1, 1, 1))


class TestSignedDistance:
    def test_sphere_center(self):
        s = single(Sphere(1.0))
        assert signed_distance(s, s.root, Vec3(0, 0, 0)) == -1.0
        assert signed_distance(s, s.root, Vec3(2, 0, 0)) == 1.0

    def test_union_min_rule_at_second_center(self):
        s = pair(Sphere(1.0), at(0, 0, 0), Sphere(1.0), at(3, 0, 0), OpKind.UNION)
        assert signed_distance(s, s.root, Vec3(3, 0, 0)) == -1.0

    def test_difference_carves_out(self):
        s = pair(Box(Vec3(1, 1, 1)), at(0, 0, 0), Sphere(1.2), at(0, 0, 0), OpKind.DIFFERENCE)
        assert signed_distance(s, s.root, Vec3(0, 0, 0)) > 0
        assert not contains(s, s.root, Vec3(0, 0, 0))
        # box corners survive the carve
        assert contains(s, s.root, Vec3(0.95, 0.95, 0.95))

    def test_intersection_of_disjoint_spheres_is_empty(self):
        s = pair(Sphere(1.0), at(0, 0, 0), Sphere(1.0), at(5, 0, 0), OpKind.INTERSECTION)
        rng = random.Random(7)
        for _ in range(500):
            p = Vec3(rng.uniform(-6, 6), rng.uniform(-2, 2), rng.uniform(-2, 2))
            assert not contains(s, s.root, p)
            assert signed_distance(s, s.root, p) > 0

    def test_cylinder_local_frame(self):
        s = single(Cylinder(0.5, 2.0))
        assert contains(s, s.root, Vec3(0, 0.99, 0))  # along local y
        assert not contains(s, s.root, Vec3(0, 1.01, 0))
        assert not contains(s, s.root, Vec3(0.51, 0, 0))
        assert signed_distance(s, s.root, Vec3(0, 0, 0)) < 0

    def test_membership_boundary_closed(self):
        s = single(Sphere(1.0))
        assert contains(s, s.root, Vec3(1, 0, 0))  # closed surface
        assert contains(s, s.root, Vec3(0, 0, 0.5))


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_sdf_sign_matches_membership_oracle(name):
    scene = load_fixture(name)
    box = node_aabb(scene, scene.root)
    rng = np.random.default_rng(11)
    lo = np.array(box.min.as_tuple()) - 0.3
    hi = np.array(box.max.as_tuple()) + 0.3
    pts = lo + rng.random((2000, 3)) * (hi - lo)
    d = signed_distance_batch(scene, scene.root, pts)
    inside = contains_batch(scene, scene.root, pts)
    off_surface = np.abs(d) > 1e-9
    assert np.array_equal(d[off_surface] < 0, inside[off_surface])


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_batch_agrees_with_scalar(name):
    scene = load_fixture(name)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2.0, 2.0, size=(200, 3))
    d = signed_distance_batch(scene, scene.root, pts)
    inside = contains_batch(scene, scene.root, pts)
    for i, p in enumerate(pts):
        v = Vec3(*p)
        assert d[i] == pytest.approx(signed_distance(scene, scene.root, v), abs=1e-12)
        assert bool(inside[i]) == contains(scene, scene.root, v)


def test_union_sign_symmetry():
    ab = pair(Sphere(1.0), at(0, 0, 0), Box(Vec3(0.5, 2, 0.5)), at(1, 0, 0), OpKind.UNION)
    ba = pair(Box(Vec3(0.5, 2, 0.5)), at(1, 0, 0), Sphere(1.0), at(0, 0, 0), OpKind.UNION)
    rng = random.Random(5)
    for _ in range(500):
        p = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3))
        da, db = signed_distance(ab, ab.root, p), signed_distance(ba, ba.root, p)
        if abs(da) > 1e-9 or abs(db) > 1e-9:
            assert (da < 0) == (db < 0)


def test_difference_is_asymmetric():
    ab = pair(Box(Vec3(1, 1, 1)), at(0, 0, 0), Sphere(1.2), at(0, 0, 0), OpKind.DIFFERENCE)
    ba = pair(Sphere(1.2), at(0, 0, 0), Box(Vec3(1, 1, 1)), at(0, 0, 0), OpKind.DIFFERENCE)
    rng = random.Random(9)
    differs = False
    for _ in range(2000):
        p = Vec3(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        if contains(ab, ab.root, p) != contains(ba, ba.root, p):
            differs = True
            break
    assert differs


def test_conservative_bound_on_scaled_sphere():
    """|signed_distance| never exceeds the true distance to the surface,
    checked against a numerically minimized distance to an ellipsoid
    (sphere under non-uniform scale)."""
    pose = Pose(Vec3(0, 0, 0), Rotation.identity(), Vec3(2.0, 1.0, 0.5))
    scene = single(Sphere(1.0), pose)

    def surface_point(angles):
        theta, phi = angles
        local = Vec3(math.sin(theta) * math.cos(phi), math.cos(theta), math.sin(theta) * math.sin(phi))
        return pose.world_point(local)

    rng = random.Random(13)
    for _ in range(40):
        p = Vec3(rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(-1.5, 1.5))
        d = signed_distance(scene, scene.root, p)
        # coarse scan then local polish for the true distance
        best = min(
            ((t, f) for t in np.linspace(0.01, math.pi - 0.01, 24) for f in np.linspace(0, 2 * math.pi, 48)),
            key=lambda a: surface_point(a).distance_to(p),
        )
        res = minimize(lambda a: surface_point((a[0], a[1])).distance_to(p), best, method="Nelder-Mead")
        true_dist = float(res.fun)
        assert abs(d) <= true_dist + 1e-6


class TestApplyPoseDelta:
    def test_translate_single(self, lamp):
        out = apply_pose_delta(lamp, {"sphere1"}, Translate(Vec3(1, 0, 0)))
        assert out.primitives["sphere1"].pose.translation == Vec3(1, 1.5, 0)
        for pid in ("box1", "cyl1", "box2", "sphere2"):
            assert out.primitives[pid] == lamp.primitives[pid]
        assert out.root == lamp.root

    def test_rotate_quarter_turn_maps_x_to_minus_z(self):
        s = single(Box(Vec3(1, 1, 1)), at(2, 0, 0))
        out = apply_pose_delta(s, {"a"}, RotateAbout(Vec3(0, 1, 0), math.pi / 2, Vec3(2, 0, 0)))
        r = out.primitives["a"].pose.rotation
        assert r.rotate(Vec3(1, 0, 0)).distance_to(Vec3(0, 0, -1)) < 1e-9
        assert out.primitives["a"].pose.translation.distance_to(Vec3(2, 0, 0)) < 1e-12

    def test_rotation_moves_translation_about_pivot(self):
        s = single(Sphere(1.0), at(1, 0, 0))
        out = apply_pose_delta(s, {"a"}, RotateAbout(Vec3(0, 1, 0), math.pi, Vec3(0, 0, 0)))
        assert out.primitives["a"].pose.translation.distance_to(Vec3(-1, 0, 0)) < 1e-9

    def test_group_scale_doubles_center_distance(self):
        s = pair(Sphere(0.5), at(-1, 0, 0), Sphere(0.5), at(1, 0, 0), OpKind.UNION)
        out = apply_pose_delta(s, {"a", "b"}, ScaleAxes(Vec3(2, 1, 1), Vec3(0, 0, 0)))
        ta = out.primitives["a"].pose.translation
        tb = out.primitives["b"].pose.translation
        assert abs(ta.distance_to(tb) - 4.0) < 1e-12
        assert out.primitives["a"].pose.scale == Vec3(2, 1, 1)

    def test_isometries_preserve_pairwise_center_distances(self, lamp):
        ids = list(lamp.primitives)
        before = {
            (i, j): lamp.primitives[i].pose.translation.distance_to(lamp.primitives[j].pose.translation)
            for i in ids
            for j in ids
        }
        rotated = apply_pose_delta(lamp, ids, RotateAbout(Vec3(1, 2, 3), 1.1, Vec3(0.5, -0.2, 0.7)))
        moved = apply_pose_delta(rotated, ids, Translate(Vec3(3, -1, 2)))
        for (i, j), d in before.items():
            after = moved.primitives[i].pose.translation.distance_to(moved.primitives[j].pose.translation)
            assert abs(after - d) < 1e-9

    def test_errors(self, lamp):
        with pytest.raises(UnknownIdError):
            apply_pose_delta(lamp, {"ghost"}, Translate(Vec3(1, 0, 0)))
        with pytest.raises(DegenerateAxisError):
            apply_pose_delta(lamp, {"sphere1"}, RotateAbout(Vec3(0, 0, 0), 1.0, Vec3(0, 0, 0)))
        with pytest.raises(NonPositiveScaleError):
            apply_pose_delta(lamp, {"sphere1"}, ScaleAxes(Vec3(0, 1, 1), Vec3(0, 0, 0)))

    def test_scale_stays_in_pose_bounds(self):
        s = single(Sphere(1.0))
        out = s
        for _ in range(5):
            out = apply_pose_delta(out, {"a"}, ScaleAxes(Vec3(1e-3, 1, 1), Vec3(0, 0, 0)))
        assert out.primitives["a"].pose.scale.x >= 1e-6  # floor, never invalid


class TestBounds:
    def test_unit_sphere_box(self):
        s = single(Sphere(1.0))
        box = node_aabb(s, s.root)
        assert box.min.distance_to(Vec3(-1, -1, -1)) < 1e-12
        assert box.max.distance_to(Vec3(1, 1, 1)) < 1e-12

    def test_disjoint_intersection_is_empty(self):
        s = pair(Box(Vec3(1, 1, 1)), at(0, 0, 0), Box(Vec3(1, 1, 1)), at(5, 0, 0), OpKind.INTERSECTION)
        assert node_aabb(s, s.root) is None

    def test_difference_bounded_by_left_child(self):
        s = pair(Box(Vec3(1, 1, 1)), at(0, 0, 0), Sphere(3.0), at(0, 0, 0), OpKind.DIFFERENCE)
        box = node_aabb(s, s.root)
        left = primitive_aabb(s.primitives["a"])
        assert box.min == left.min and box.max == left.max

    def test_rotated_box_aabb_is_exact(self):
        q = Rotation.from_axis_angle(Vec3(0, 0, 1), math.pi / 4)
        prim = Primitive("a", Box(Vec3(1, 1, 1)), Pose(Vec3(0, 0, 0), q, Vec3(1, 1, 1)))
        box = primitive_aabb(prim)
        assert abs(box.max.x - math.sqrt(2)) < 1e-9
        assert abs(box.max.z - 1.0) < 1e-9

    def test_rotated_cylinder_aabb(self):
        q = Rotation.from_axis_angle(Vec3(0, 0, 1), math.pi / 2)  # axis now along x
        prim = Primitive("a", Cylinder(0.5, 2.0), Pose(Vec3.zero(), q, Vec3(1, 1, 1)))
        box = primitive_aabb(prim)
        assert abs(box.max.x - 1.0) < 1e-9
        assert abs(box.max.y - 0.5) < 1e-9
        assert abs(box.max.z - 0.5) < 1e-9

    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_no_interior_point_escapes_node_aabb(self, name):
        scene = load_fixture(name)
        box = node_aabb(scene, scene.root)
        rng = np.random.default_rng(23)
        lo = np.array(box.min.as_tuple()) - 1.0
        hi = np.array(box.max.as_tuple()) + 1.0
        pts = lo + rng.random((4000, 3)) * (hi - lo)
        inside = contains_batch(scene, scene.root, pts)
        for p in pts[inside]:
            assert box.contains(Vec3(*p))

    def test_selection_aabb_union(self, lamp):
        box = selection_aabb(lamp, ["sphere1", "box1"])
        assert abs(box.max.y - 2.0) < 1e-12  # sphere1 top
        assert abs(box.min.y - 0.65) < 1e-12  # box1 bottom
        assert selection_aabb(lamp, []) is None


class TestTreeOps:
    def test_set_operator_same_kind_is_identity(self, lamp):
        assert set_operator(lamp, "grip", OpKind.UNION) is lamp

    def test_union_to_difference_binary(self, lamp):
        out = set_operator(lamp, "grip", OpKind.DIFFERENCE)
        node = out.node_by_id("grip")
        assert node.kind is OpKind.DIFFERENCE
        assert [c.primitive_id for c in node.children] == ["sphere1", "box1"]
        # other nodes untouched
        assert out.node_by_id("base_cut").kind is OpKind.DIFFERENCE
        assert lamp.node_by_id("grip").kind is OpKind.UNION

    def test_nary_union_to_difference_rebrackets(self):
        prims = {
            "a": Primitive("a", Sphere(1.0), at(0, 0, 0)),
            "b": Primitive("b", Sphere(0.6), at(0.9, 0, 0)),
            "c": Primitive("c", Sphere(0.6), at(-0.9, 0, 0)),
        }
        scene = Scene("t", prims, Op(OpKind.UNION, (Leaf("a"), Leaf("b"), Leaf("c")), "r"))
        out = set_operator(scene, "r", OpKind.DIFFERENCE)
        root = out.root
        assert root.kind is OpKind.DIFFERENCE and len(root.children) == 2
        assert root.children[0] == Leaf("a")
        rhs = root.children[1]
        assert rhs.kind is OpKind.UNION
        assert [c.primitive_id for c in rhs.children] == ["b", "c"]
        assert rhs.node_id == "r.rhs"

        # membership matches a AND NOT (b OR c) on random points
        rng = random.Random(31)
        for _ in range(1000):
            p = Vec3(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            in_a = contains(scene, Leaf("a"), p)
            in_b = contains(scene, Leaf("b"), p)
            in_c = contains(scene, Leaf("c"), p)
            assert contains(out, out.root, p) == (in_a and not (in_b or in_c))

    def test_fresh_node_id_avoids_collision(self):
        prims = {
            "a": Primitive("a", Sphere(1.0), at(0, 0, 0)),
            "b": Primitive("b", Sphere(0.6), at(0.9, 0, 0)),
            "c": Primitive("c", Sphere(0.6), at(-0.9, 0, 0)),
            "r.rhs": Primitive("r.rhs", Sphere(0.2), at(2, 0, 0)),
        }
        scene = Scene(
            "t", prims, Op(OpKind.UNION, (Leaf("a"), Leaf("b"), Leaf("c"), Leaf("r.rhs")), "r")
        )
        out = set_operator(scene, "r", OpKind.DIFFERENCE)
        assert out.root.children[1].node_id == "r.rhs+"

    def test_set_operator_errors(self, lamp):
        with pytest.raises(UnknownNodeError):
            set_operator(lamp, "ghost", OpKind.UNION)
        with pytest.raises(LeafNotOperatorError):
            set_operator(lamp, "sphere1", OpKind.UNION)

    def test_leaves_under(self, lamp):
        assert leaves_under(lamp, "root") == ["sphere1", "box1", "cyl1", "box2", "sphere2"]
        assert leaves_under(lamp, "grip") == ["sphere1", "box1"]
        assert leaves_under(lamp, "cyl1") == ["cyl1"]
        with pytest.raises(UnknownNodeError):
            leaves_under(lamp, "nope")

    def test_iter_nodes_preorder(self, lamp):
        ids = [n.node_id if isinstance(n, Op) else n.primitive_id for n in iter_nodes(lamp.root)]
        assert ids == ["root", "grip", "sphere1", "box1", "cyl1", "base_cut", "box2", "sphere2"]

    def test_scene_invariants_enforced(self):
        with pytest.raises(ValueError, match="missing"):
            Scene("x", {}, Leaf("a"))
        with pytest.raises(ValueError, match="not referenced"):
            Scene(
                "x",
                {"a": Primitive("a", Sphere(1.0)), "b": Primitive("b", Sphere(1.0))},
                Leaf("a"),
            )
