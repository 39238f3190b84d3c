import math

import pytest

from midair.csg import Leaf, Op, OpKind, Primitive, Scene, Sphere
from midair.geometry import Pose, Rotation, Vec3
from midair.sceneio import SceneSyntaxError, SchemaError, parse_scene, serialize_scene, structural_equal

from .conftest import FIXTURE_NAMES, scene_path

MINIMAL = """
{
  "name": "one",
  "primitives": [
    {"id": "a", "kind": "sphere", "params": {"radius": 1.0}}
  ],
  "root": {"leaf": "a"}
}
"""


def test_minimal_document_defaults_to_identity_pose():
    scene = parse_scene(MINIMAL)
    assert scene.name == "one"
    prim = scene.primitives["a"]
    assert isinstance(prim.kind, Sphere) and prim.kind.radius == 1.0
    assert prim.pose.translation == Vec3(0, 0, 0)
    assert prim.pose.scale == Vec3(1, 1, 1)
    assert prim.pose.rotation.as_tuple() == (1.0, 0.0, 0.0, 0.0)
    assert isinstance(scene.root, Leaf)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_round_trip_bytes_and_structure(name):
    text = scene_path(name).read_text(encoding="utf-8")
    scene = parse_scene(text)
    out = serialize_scene(scene)
    assert out == text  # fixtures are stored in canonical form
    assert structural_equal(parse_scene(out), scene)


def test_serialization_deterministic():
    scene = parse_scene(MINIMAL)
    assert serialize_scene(scene) == serialize_scene(parse_scene(serialize_scene(scene)))


def test_rotated_pose_round_trips_with_unit_quaternion():
    q = Rotation.from_axis_angle(Vec3(0, 1, 0), math.pi / 2)
    scene = Scene(
        "rot",
        {"b": Primitive("b", Sphere(1.0), Pose(Vec3(0, 0, 0), q, Vec3(1, 1, 1)))},
        Leaf("b"),
    )
    back = parse_scene(serialize_scene(scene))
    r = back.primitives["b"].pose.rotation
    assert abs(math.sqrt(r.w**2 + r.x**2 + r.y**2 + r.z**2) - 1.0) < 1e-9
    assert structural_equal(back, scene)


def test_negative_quaternion_serializes_canonically():
    q = Rotation.from_axis_angle(Vec3(0, 1, 0), 1.0)
    neg = Rotation(-q.w, -q.x, -q.y, -q.z)
    scene = Scene("c", {"a": Primitive("a", Sphere(1.0), Pose(Vec3.zero(), neg, Vec3(1, 1, 1)))}, Leaf("a"))
    text = serialize_scene(scene)
    assert f'"rotation": [{q.w:.9g}' in text


class TestStrictErrors:
    def test_malformed_json(self):
        with pytest.raises(SceneSyntaxError):
            parse_scene("{not json")

    def test_duplicate_object_keys(self):
        doc = '{"name": "x", "name": "y", "primitives": [], "root": {}}'
        with pytest.raises(SceneSyntaxError, match="duplicate"):
            parse_scene(doc)

    def test_unknown_top_level_key(self):
        doc = MINIMAL.replace('"name": "one",', '"name": "one", "extra": 1,')
        with pytest.raises(SchemaError, match="unknown keys"):
            parse_scene(doc)

    def test_unknown_primitive_key(self):
        doc = MINIMAL.replace('"kind": "sphere",', '"kind": "sphere", "color": "red",')
        with pytest.raises(SchemaError, match="unknown keys"):
            parse_scene(doc)

    def test_unknown_kind(self):
        with pytest.raises(SchemaError, match="unknown primitive kind"):
            parse_scene(MINIMAL.replace('"sphere"', '"torus"'))

    def test_wrong_params_for_kind(self):
        with pytest.raises(SchemaError):
            parse_scene(MINIMAL.replace('{"radius": 1.0}', '{"radius": 1.0, "height": 2.0}'))

    def test_difference_arity(self):
        doc = """
        {"name": "x",
         "primitives": [
           {"id": "a", "kind": "sphere", "params": {"radius": 1}},
           {"id": "b", "kind": "sphere", "params": {"radius": 1}},
           {"id": "c", "kind": "sphere", "params": {"radius": 1}}],
         "root": {"op": "difference", "id": "r",
                  "children": [{"leaf": "a"}, {"leaf": "b"}, {"leaf": "c"}]}}
        """
        with pytest.raises(SchemaError, match="difference takes exactly 2"):
            parse_scene(doc)

    def test_union_needs_two_children(self):
        doc = """
        {"name": "x",
         "primitives": [{"id": "a", "kind": "sphere", "params": {"radius": 1}}],
         "root": {"op": "union", "id": "r", "children": [{"leaf": "a"}]}}
        """
        with pytest.raises(SchemaError, match="at least 2"):
            parse_scene(doc)

    def test_duplicate_primitive_id(self):
        doc = """
        {"name": "x",
         "primitives": [
           {"id": "a", "kind": "sphere", "params": {"radius": 1}},
           {"id": "a", "kind": "sphere", "params": {"radius": 2}}],
         "root": {"leaf": "a"}}
        """
        with pytest.raises(SchemaError, match="duplicate primitive id"):
            parse_scene(doc)

    def test_dangling_leaf(self):
        with pytest.raises(SchemaError, match="unknown primitive"):
            parse_scene(MINIMAL.replace('{"leaf": "a"}', '{"leaf": "zz"}'))

    def test_orphan_primitive(self):
        doc = """
        {"name": "x",
         "primitives": [
           {"id": "a", "kind": "sphere", "params": {"radius": 1}},
           {"id": "b", "kind": "sphere", "params": {"radius": 1}}],
         "root": {"leaf": "a"}}
        """
        with pytest.raises(SchemaError, match="not referenced"):
            parse_scene(doc)

    def test_leaf_referenced_twice(self):
        doc = """
        {"name": "x",
         "primitives": [{"id": "a", "kind": "sphere", "params": {"radius": 1}}],
         "root": {"op": "union", "id": "r", "children": [{"leaf": "a"}, {"leaf": "a"}]}}
        """
        with pytest.raises(SchemaError, match="more than one leaf"):
            parse_scene(doc)

    def test_node_id_collides_with_primitive_id(self):
        doc = """
        {"name": "x",
         "primitives": [
           {"id": "a", "kind": "sphere", "params": {"radius": 1}},
           {"id": "b", "kind": "sphere", "params": {"radius": 1}}],
         "root": {"op": "union", "id": "a", "children": [{"leaf": "a"}, {"leaf": "b"}]}}
        """
        with pytest.raises(SchemaError, match="duplicate node id"):
            parse_scene(doc)

    def test_unknown_operator(self):
        doc = """
        {"name": "x",
         "primitives": [
           {"id": "a", "kind": "sphere", "params": {"radius": 1}},
           {"id": "b", "kind": "sphere", "params": {"radius": 1}}],
         "root": {"op": "xor", "id": "r", "children": [{"leaf": "a"}, {"leaf": "b"}]}}
        """
        with pytest.raises(SchemaError, match="unknown operator"):
            parse_scene(doc)

    def test_non_positive_dimension(self):
        with pytest.raises(ValueError):
            parse_scene(MINIMAL.replace('"radius": 1.0', '"radius": -1.0'))

    def test_non_finite_number(self):
        with pytest.raises(ValueError):
            parse_scene(MINIMAL.replace('"radius": 1.0', '"radius": Infinity'))

    def test_boolean_is_not_a_number(self):
        with pytest.raises(SchemaError):
            parse_scene(MINIMAL.replace('"radius": 1.0', '"radius": true'))

    def test_rotation_must_have_four_components(self):
        doc = MINIMAL.replace(
            '"params": {"radius": 1.0}',
            '"params": {"radius": 1.0}, "pose": {"rotation": [1.0, 0.0, 0.0]}',
        )
        with pytest.raises(SchemaError, match="4 numbers"):
            parse_scene(doc)


def test_structural_equal_tolerance():
    a = parse_scene(MINIMAL)
    nudged = Scene(
        "one",
        {"a": Primitive("a", Sphere(1.0 + 1e-12), Pose.identity())},
        Leaf("a"),
    )
    assert structural_equal(a, nudged)
    changed = Scene("one", {"a": Primitive("a", Sphere(1.1), Pose.identity())}, Leaf("a"))
    assert not structural_equal(a, changed)


def test_structural_equal_detects_tree_difference():
    doc = """
    {"name": "x",
     "primitives": [
       {"id": "a", "kind": "sphere", "params": {"radius": 1}},
       {"id": "b", "kind": "sphere", "params": {"radius": 1}}],
     "root": {"op": "union", "id": "r", "children": [{"leaf": "a"}, {"leaf": "b"}]}}
    """
    a = parse_scene(doc)
    b = parse_scene(doc.replace('"op": "union"', '"op": "intersection"'))
    assert not structural_equal(a, b)


def test_structural_equal_rotation_sign_insensitive():
    q = Rotation.from_axis_angle(Vec3(1, 0, 0), 0.8)
    neg = Rotation(-q.w, -q.x, -q.y, -q.z)
    a = Scene("s", {"a": Primitive("a", Sphere(1.0), Pose(Vec3.zero(), q, Vec3(1, 1, 1)))}, Leaf("a"))
    b = Scene("s", {"a": Primitive("a", Sphere(1.0), Pose(Vec3.zero(), neg, Vec3(1, 1, 1)))}, Leaf("a"))
    assert structural_equal(a, b)
