"""Headless solid modeler: CSG scenes, signed-distance meshing, and a
deterministic gesture+voice interaction session, replayable from scripts."""

from .geometry import Aabb, Pose, Rotation, Vec3
from .csg import (
    Box,
    Cylinder,
    OpKind,
    Leaf,
    Op,
    Primitive,
    Scene,
    Sphere,
    Translate,
    RotateAbout,
    ScaleAxes,
    apply_pose_delta,
    contains,
    node_aabb,
    set_operator,
    signed_distance,
)
from .sceneio import SceneSyntaxError, SchemaError, parse_scene, serialize_scene, structural_equal
from .mesher import GridSpec, TriangleMesh, export_mesh, mesh_volume, monte_carlo_volume, polygonize

__all__ = [
    "Aabb", "Pose", "Rotation", "Vec3",
    "Box", "Cylinder", "Sphere", "OpKind", "Leaf", "Op", "Primitive", "Scene",
    "Translate", "RotateAbout", "ScaleAxes", "apply_pose_delta",
    "contains", "node_aabb", "set_operator", "signed_distance",
    "SceneSyntaxError", "SchemaError", "parse_scene", "serialize_scene", "structural_equal",
    "GridSpec", "TriangleMesh", "export_mesh", "mesh_volume", "monte_carlo_volume", "polygonize",
]
