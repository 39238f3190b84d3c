"""CSG tree model and solid evaluation.

A scene is a set of posed primitives (sphere / box / cylinder) combined
by a tree of Boolean operators. Two independent evaluation routes are
provided on purpose:

* ``signed_distance`` combines per-primitive distance fields with
  min/max rules (union = min, intersection = max, difference =
  max(left, -right)); sign-exact, magnitude conservative under
  anisotropic scale.
* ``contains`` runs exact point-membership tests through the same tree
  with plain Boolean logic and never touches the distance math, so it
  can serve as an oracle for the signed-distance route.

Scenes are immutable values: every editing operation returns a new
Scene, sharing untouched primitives and subtrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Union

import numpy as np

from .geometry import SCALE_MAX, SCALE_MIN, Aabb, Pose, Rotation, Vec3


class UnknownIdError(KeyError):
    """A primitive id is not present in the scene."""


class UnknownNodeError(KeyError):
    """A node token names neither an operator node nor a leaf."""


class LeafNotOperatorError(ValueError):
    """An operator-only action was aimed at a leaf node."""


class DegenerateAxisError(ValueError):
    """Rotation axis has (near-)zero length."""


class NonPositiveScaleError(ValueError):
    """Scale factors must be strictly positive."""


# --------------------------------------------------------------------------
# shapes and tree nodes


@dataclass(frozen=True, slots=True)
class Sphere:
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"sphere radius must be positive, got {self.radius}")


@dataclass(frozen=True, slots=True)
class Box:
    half_extents: Vec3

    def __post_init__(self) -> None:
        if self.half_extents.min_component() <= 0:
            raise ValueError(f"box half extents must be positive, got {self.half_extents}")


@dataclass(frozen=True, slots=True)
class Cylinder:
    """Capped cylinder, axis along local y, centered at the local origin."""

    radius: float
    height: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"cylinder radius must be positive, got {self.radius}")
        if not (math.isfinite(self.height) and self.height > 0):
            raise ValueError(f"cylinder height must be positive, got {self.height}")


PrimitiveKind = Union[Sphere, Box, Cylinder]


@dataclass(frozen=True, slots=True)
class Primitive:
    id: str
    kind: PrimitiveKind
    pose: Pose = field(default_factory=Pose.identity)
    label: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("primitive id must be non-empty")


class OpKind(Enum):
    UNION = "union"
    INTERSECTION = "intersection"
    DIFFERENCE = "difference"


@dataclass(frozen=True, slots=True)
class Leaf:
    primitive_id: str


@dataclass(frozen=True, slots=True)
class Op:
    kind: OpKind
    children: tuple["CsgNode", ...]
    node_id: str

    def __post_init__(self) -> None:
        if not self.node_id:
            raise ValueError("operator node id must be non-empty")
        if self.kind is OpKind.DIFFERENCE:
            if len(self.children) != 2:
                raise ValueError(f"difference takes exactly 2 children, got {len(self.children)}")
        elif len(self.children) < 2:
            raise ValueError(f"{self.kind.value} takes at least 2 children, got {len(self.children)}")


CsgNode = Union[Leaf, Op]


def iter_nodes(node: CsgNode) -> Iterator[CsgNode]:
    """Depth-first, parents before children, children left to right."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Op):
            stack.extend(reversed(n.children))


@dataclass(frozen=True, eq=True)
class Scene:
    """A named primitive set plus the operator tree over it.

    Invariants checked at construction: the tree's leaves reference each
    primitive exactly once, and operator node ids are unique and share a
    namespace with primitive ids (so one token addresses one node).
    """

    name: str
    primitives: dict[str, Primitive]
    root: CsgNode

    def __post_init__(self) -> None:
        leaf_ids: list[str] = []
        op_ids: list[str] = []
        for n in iter_nodes(self.root):
            if isinstance(n, Leaf):
                leaf_ids.append(n.primitive_id)
            else:
                op_ids.append(n.node_id)
        if len(set(leaf_ids)) != len(leaf_ids):
            dup = sorted({i for i in leaf_ids if leaf_ids.count(i) > 1})
            raise ValueError(f"primitive referenced by more than one leaf: {dup}")
        if set(leaf_ids) - set(self.primitives):
            missing = sorted(set(leaf_ids) - set(self.primitives))
            raise ValueError(f"leaf references missing primitives: {missing}")
        if set(self.primitives) - set(leaf_ids):
            orphans = sorted(set(self.primitives) - set(leaf_ids))
            raise ValueError(f"primitives not referenced by any leaf: {orphans}")
        if len(set(op_ids)) != len(op_ids) or set(op_ids) & set(leaf_ids):
            raise ValueError("node ids must be unique and distinct from primitive ids")
        for pid, prim in self.primitives.items():
            if pid != prim.id:
                raise ValueError(f"primitive map key {pid!r} does not match primitive id {prim.id!r}")

    def primitive(self, primitive_id: str) -> Primitive:
        try:
            return self.primitives[primitive_id]
        except KeyError:
            raise UnknownIdError(primitive_id) from None

    def node_by_id(self, token: str) -> CsgNode:
        """Resolve a token: operator nodes by node_id, leaves by primitive id."""
        for n in iter_nodes(self.root):
            if isinstance(n, Op) and n.node_id == token:
                return n
            if isinstance(n, Leaf) and n.primitive_id == token:
                return n
        raise UnknownNodeError(token)

    def node_ids(self) -> set[str]:
        out = set()
        for n in iter_nodes(self.root):
            out.add(n.node_id if isinstance(n, Op) else n.primitive_id)
        return out

    def with_primitives(self, updates: dict[str, Primitive]) -> "Scene":
        merged = dict(self.primitives)
        merged.update(updates)
        return replace(self, primitives=merged)


# --------------------------------------------------------------------------
# local distance fields (exact in primitive-local space)


def _sphere_sdf(p: Vec3, radius: float) -> float:
    return p.norm() - radius


def _box_sdf(p: Vec3, half: Vec3) -> float:
    qx = abs(p.x) - half.x
    qy = abs(p.y) - half.y
    qz = abs(p.z) - half.z
    outside = math.sqrt(max(qx, 0.0) ** 2 + max(qy, 0.0) ** 2 + max(qz, 0.0) ** 2)
    return outside + min(max(qx, qy, qz), 0.0)


def _cylinder_sdf(p: Vec3, radius: float, height: float) -> float:
    dr = math.hypot(p.x, p.z) - radius
    dy = abs(p.y) - 0.5 * height
    outside = math.hypot(max(dr, 0.0), max(dy, 0.0))
    return outside + min(max(dr, dy), 0.0)


def primitive_sdf(prim: Primitive, point: Vec3) -> float:
    """Sign-exact distance bound to one posed primitive.

    The point is pulled into local space through the inverse pose; the
    exact local distance is then multiplied by the smallest scale
    factor, which keeps the magnitude a lower bound on the true world
    distance under anisotropic scale while preserving the sign.
    """
    local = prim.pose.local_point(point)
    kind = prim.kind
    if isinstance(kind, Sphere):
        d = _sphere_sdf(local, kind.radius)
    elif isinstance(kind, Box):
        d = _box_sdf(local, kind.half_extents)
    else:
        d = _cylinder_sdf(local, kind.radius, kind.height)
    return d * prim.pose.scale.min_component()


def signed_distance(scene: Scene, node: CsgNode, point: Vec3) -> float:
    """Signed distance of the solid under `node`; negative strictly inside."""
    if isinstance(node, Leaf):
        return primitive_sdf(scene.primitive(node.primitive_id), point)
    if node.kind is OpKind.UNION:
        return min(signed_distance(scene, c, point) for c in node.children)
    if node.kind is OpKind.INTERSECTION:
        return max(signed_distance(scene, c, point) for c in node.children)
    left, right = node.children
    return max(signed_distance(scene, left, point), -signed_distance(scene, right, point))


# --------------------------------------------------------------------------
# membership oracle (no distance math)


def primitive_contains(prim: Primitive, point: Vec3) -> bool:
    """Exact closed-solid membership test for one primitive."""
    p = prim.pose.local_point(point)
    kind = prim.kind
    if isinstance(kind, Sphere):
        return p.x * p.x + p.y * p.y + p.z * p.z <= kind.radius * kind.radius
    if isinstance(kind, Box):
        h = kind.half_extents
        return abs(p.x) <= h.x and abs(p.y) <= h.y and abs(p.z) <= h.z
    return abs(p.y) <= 0.5 * kind.height and p.x * p.x + p.z * p.z <= kind.radius * kind.radius


def contains(scene: Scene, node: CsgNode, point: Vec3) -> bool:
    """Boolean-logic membership; independent oracle for `signed_distance`."""
    if isinstance(node, Leaf):
        return primitive_contains(scene.primitive(node.primitive_id), point)
    if node.kind is OpKind.UNION:
        return any(contains(scene, c, point) for c in node.children)
    if node.kind is OpKind.INTERSECTION:
        return all(contains(scene, c, point) for c in node.children)
    left, right = node.children
    return contains(scene, left, point) and not contains(scene, right, point)


# --------------------------------------------------------------------------
# batch evaluation (numpy), used by the mesher and the volume estimators


def _compile_primitive(prim: Primitive):
    rot = np.array(prim.pose.rotation.to_matrix(), dtype=np.float64)
    inv_scale = 1.0 / np.array(prim.pose.scale.as_tuple(), dtype=np.float64)
    # local = diag(1/s) @ R^T @ (p - t); keep as one (3,3) matrix
    m = inv_scale[:, None] * rot.T
    t = np.array(prim.pose.translation.as_tuple(), dtype=np.float64)
    return m, t


def _local_points(prim: Primitive, pts: np.ndarray) -> np.ndarray:
    m, t = _compile_primitive(prim)
    return (pts - t) @ m.T


def _primitive_sdf_batch(prim: Primitive, pts: np.ndarray) -> np.ndarray:
    p = _local_points(prim, pts)
    kind = prim.kind
    if isinstance(kind, Sphere):
        d = np.linalg.norm(p, axis=1) - kind.radius
    elif isinstance(kind, Box):
        q = np.abs(p) - np.array(kind.half_extents.as_tuple())
        d = np.linalg.norm(np.maximum(q, 0.0), axis=1) + np.minimum(q.max(axis=1), 0.0)
    else:
        dr = np.hypot(p[:, 0], p[:, 2]) - kind.radius
        dy = np.abs(p[:, 1]) - 0.5 * kind.height
        d = np.hypot(np.maximum(dr, 0.0), np.maximum(dy, 0.0)) + np.minimum(np.maximum(dr, dy), 0.0)
    return d * prim.pose.scale.min_component()


def signed_distance_batch(scene: Scene, node: CsgNode, pts: np.ndarray) -> np.ndarray:
    """Vectorized `signed_distance` over an (N, 3) float array."""
    if isinstance(node, Leaf):
        return _primitive_sdf_batch(scene.primitive(node.primitive_id), pts)
    parts = [signed_distance_batch(scene, c, pts) for c in node.children]
    if node.kind is OpKind.UNION:
        return np.minimum.reduce(parts)
    if node.kind is OpKind.INTERSECTION:
        return np.maximum.reduce(parts)
    return np.maximum(parts[0], -parts[1])


def _primitive_contains_batch(prim: Primitive, pts: np.ndarray) -> np.ndarray:
    p = _local_points(prim, pts)
    kind = prim.kind
    if isinstance(kind, Sphere):
        return np.einsum("ij,ij->i", p, p) <= kind.radius * kind.radius
    if isinstance(kind, Box):
        h = np.array(kind.half_extents.as_tuple())
        return (np.abs(p) <= h).all(axis=1)
    r2 = kind.radius * kind.radius
    return (np.abs(p[:, 1]) <= 0.5 * kind.height) & (p[:, 0] ** 2 + p[:, 2] ** 2 <= r2)


def contains_batch(scene: Scene, node: CsgNode, pts: np.ndarray) -> np.ndarray:
    """Vectorized `contains` over an (N, 3) float array."""
    if isinstance(node, Leaf):
        return _primitive_contains_batch(scene.primitive(node.primitive_id), pts)
    parts = [contains_batch(scene, c, pts) for c in node.children]
    if node.kind is OpKind.UNION:
        return np.logical_or.reduce(parts)
    if node.kind is OpKind.INTERSECTION:
        return np.logical_and.reduce(parts)
    return parts[0] & ~parts[1]


# --------------------------------------------------------------------------
# pose deltas


@dataclass(frozen=True, slots=True)
class Translate:
    offset: Vec3


@dataclass(frozen=True, slots=True)
class RotateAbout:
    axis: Vec3
    angle: float
    pivot: Vec3


@dataclass(frozen=True, slots=True)
class ScaleAxes:
    factors: Vec3
    pivot: Vec3


PoseDelta = Union[Translate, RotateAbout, ScaleAxes]


def _clamp_scale(v: Vec3) -> Vec3:
    return Vec3(
        min(max(v.x, SCALE_MIN), SCALE_MAX),
        min(max(v.y, SCALE_MIN), SCALE_MAX),
        min(max(v.z, SCALE_MIN), SCALE_MAX),
    )


def apply_pose_delta(scene: Scene, primitive_ids, delta: PoseDelta) -> Scene:
    """Apply one rigid/scale delta to a set of primitives, about a shared pivot.

    Rotation and scale act on each primitive's translation relative to
    the pivot, so grouped parts keep their arrangement. Scale factors
    multiply the per-axis pose scale componentwise (handle axes are
    world-aligned; for rotated primitives this is the usual gizmo
    approximation). Returns a new Scene.
    """
    ids = list(primitive_ids)
    for pid in ids:
        if pid not in scene.primitives:
            raise UnknownIdError(pid)

    if isinstance(delta, Translate):
        def move(pose: Pose) -> Pose:
            return replace(pose, translation=pose.translation + delta.offset)
    elif isinstance(delta, RotateAbout):
        if delta.axis.norm() < 1e-12:
            raise DegenerateAxisError(f"rotation axis {delta.axis} too short")
        q = Rotation.from_axis_angle(delta.axis, delta.angle)

        def move(pose: Pose) -> Pose:
            return replace(
                pose,
                translation=delta.pivot + q.rotate(pose.translation - delta.pivot),
                rotation=q * pose.rotation,
            )
    else:
        f = delta.factors
        if f.min_component() <= 0:
            raise NonPositiveScaleError(f"scale factors must be positive, got {f}")

        def move(pose: Pose) -> Pose:
            return replace(
                pose,
                translation=delta.pivot + (pose.translation - delta.pivot).hadamard(f),
                scale=_clamp_scale(pose.scale.hadamard(f)),
            )

    updates = {pid: replace(scene.primitives[pid], pose=move(scene.primitives[pid].pose)) for pid in ids}
    return scene.with_primitives(updates)


# --------------------------------------------------------------------------
# bounds


def primitive_aabb(prim: Primitive) -> Aabb:
    """Exact world-space AABB of a posed primitive (closed forms per kind)."""
    rot = prim.pose.rotation.to_matrix()
    s = prim.pose.scale
    # rows of R * diag(scale)
    m = [[rot[i][0] * s.x, rot[i][1] * s.y, rot[i][2] * s.z] for i in range(3)]
    kind = prim.kind
    ext = [0.0, 0.0, 0.0]
    for i in range(3):
        if isinstance(kind, Sphere):
            ext[i] = kind.radius * math.sqrt(m[i][0] ** 2 + m[i][1] ** 2 + m[i][2] ** 2)
        elif isinstance(kind, Box):
            h = kind.half_extents
            ext[i] = abs(m[i][0]) * h.x + abs(m[i][1]) * h.y + abs(m[i][2]) * h.z
        else:
            ext[i] = 0.5 * kind.height * abs(m[i][1]) + kind.radius * math.hypot(m[i][0], m[i][2])
    c = prim.pose.translation
    e = Vec3(ext[0], ext[1], ext[2])
    return Aabb(c - e, c + e)


def node_aabb(scene: Scene, node: CsgNode) -> Aabb | None:
    """Conservative bound of the solid under `node`; None for a provably
    empty solid (disjoint intersection).

    Union is the box union, intersection the box intersection, and a
    difference is bounded by its left child.
    """
    if isinstance(node, Leaf):
        return primitive_aabb(scene.primitive(node.primitive_id))
    if node.kind is OpKind.DIFFERENCE:
        return node_aabb(scene, node.children[0])
    boxes = [node_aabb(scene, c) for c in node.children]
    if node.kind is OpKind.UNION:
        present = [b for b in boxes if b is not None]
        if not present:
            return None
        out = present[0]
        for b in present[1:]:
            out = out.union(b)
        return out
    out = boxes[0]
    for b in boxes[1:]:
        if out is None or b is None:
            return None
        out = out.intersection(b)
    return out


# --------------------------------------------------------------------------
# tree editing


def _fresh_node_id(base: str, taken: set[str]) -> str:
    candidate = f"{base}.rhs"
    while candidate in taken:
        candidate += "+"
    return candidate


def set_operator(scene: Scene, node_id: str, new_kind: OpKind) -> Scene:
    """Replace the operator kind of the node addressed by `node_id`.

    Turning an n-ary (n > 2) node into a difference re-brackets it as
    child0 minus the union of the remaining children, in order; the
    synthetic union node gets a fresh id, every existing id is kept.
    """
    target = scene.node_by_id(node_id)
    if isinstance(target, Leaf):
        raise LeafNotOperatorError(node_id)
    if target.kind is new_kind:
        return scene

    if new_kind is OpKind.DIFFERENCE and len(target.children) > 2:
        rhs = Op(
            kind=OpKind.UNION,
            children=target.children[1:],
            node_id=_fresh_node_id(node_id, scene.node_ids()),
        )
        new_node: CsgNode = Op(OpKind.DIFFERENCE, (target.children[0], rhs), node_id)
    else:
        new_node = Op(new_kind, target.children, node_id)

    def rebuild(n: CsgNode) -> CsgNode:
        if isinstance(n, Op):
            if n.node_id == node_id:
                return new_node
            return Op(n.kind, tuple(rebuild(c) for c in n.children), n.node_id)
        return n

    return replace(scene, root=rebuild(scene.root))


def leaves_under(scene: Scene, node_id: str) -> list[str]:
    """Primitive ids of the subtree at `node_id`, depth-first left-to-right."""
    node = scene.node_by_id(node_id)
    return [n.primitive_id for n in iter_nodes(node) if isinstance(n, Leaf)]


def selection_aabb(scene: Scene, primitive_ids) -> Aabb | None:
    """Union of the exact world boxes of the given primitives."""
    out: Aabb | None = None
    for pid in primitive_ids:
        box = primitive_aabb(scene.primitive(pid))
        out = box if out is None else out.union(box)
    return out
