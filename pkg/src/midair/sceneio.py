"""Strict scene-document (de)serialization.

The on-disk format is JSON with a pinned schema:

    {"name": str,
     "primitives": [{"id": str, "kind": "sphere"|"box"|"cylinder",
                     "params": {...}, "pose": {...}, "label": str?}, ...],
     "root": {"op": ..., "id": str, "children": [...]} | {"leaf": str}}

Kind-specific params: sphere {"radius"}, box {"half_extents": [x,y,z]},
cylinder {"radius", "height"} (axis = local y, centered). Pose fields
("translation", "rotation" as [w,x,y,z], "scale") all default to
identity. Unknown keys anywhere are schema errors; NaN/Infinity and
duplicate JSON keys are rejected.

Serialization is canonical: keys sorted, primitives ordered by id,
floats printed with 9 significant digits, quaternions sign-normalized
to w >= 0. Parsing the output reproduces the scene exactly, because
9-digit decimals survive a float64 round trip.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .csg import Box, CsgNode, Cylinder, Leaf, Op, OpKind, Primitive, PrimitiveKind, Scene, Sphere, iter_nodes
from .geometry import Pose, Rotation, Vec3


class SceneSyntaxError(ValueError):
    """The document is not well-formed JSON (or repeats an object key)."""


class SchemaError(ValueError):
    """Well-formed JSON that violates the scene schema."""


_PRIMITIVE_KEYS = {"id", "kind", "params", "pose", "label"}
_POSE_KEYS = {"translation", "rotation", "scale"}
_PARAM_KEYS = {"sphere": {"radius"}, "box": {"half_extents"}, "cylinder": {"radius", "height"}}


# --------------------------------------------------------------------------
# parsing


def _no_duplicate_keys(pairs):
    keys = [k for k, _ in pairs]
    if len(set(keys)) != len(keys):
        dup = sorted({k for k in keys if keys.count(k) > 1})
        raise SceneSyntaxError(f"duplicate object keys: {dup}")
    return dict(pairs)


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} not allowed")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {type(value).__name__}")
    f = float(value)
    if not math.isfinite(f):
        raise ValueError(f"{where}: number must be finite")
    return f


def _triple(value: Any, where: str) -> Vec3:
    if not isinstance(value, list) or len(value) != 3:
        raise SchemaError(f"{where}: expected a list of 3 numbers")
    return Vec3(*(_number(v, where) for v in value))


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{where}: expected a string")
    return value


def _check_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")


def _parse_pose(obj: Any, where: str) -> Pose:
    _check_keys(obj, _POSE_KEYS, set(), where)
    translation = _triple(obj["translation"], f"{where}.translation") if "translation" in obj else Vec3.zero()
    scale = _triple(obj["scale"], f"{where}.scale") if "scale" in obj else Vec3(1.0, 1.0, 1.0)
    if "rotation" in obj:
        raw = obj["rotation"]
        if not isinstance(raw, list) or len(raw) != 4:
            raise SchemaError(f"{where}.rotation: expected a list of 4 numbers [w, x, y, z]")
        rotation = Rotation(*(_number(v, f"{where}.rotation") for v in raw))
    else:
        rotation = Rotation.identity()
    return Pose(translation, rotation, scale)


def _parse_primitive(obj: Any, index: int) -> Primitive:
    where = f"primitives[{index}]"
    _check_keys(obj, _PRIMITIVE_KEYS, {"id", "kind", "params"}, where)
    pid = _string(obj["id"], f"{where}.id")
    kind_name = _string(obj["kind"], f"{where}.kind")
    if kind_name not in _PARAM_KEYS:
        raise SchemaError(f"{where}: unknown primitive kind {kind_name!r}")
    params = obj["params"]
    _check_keys(params, _PARAM_KEYS[kind_name], _PARAM_KEYS[kind_name], f"{where}.params")
    kind: PrimitiveKind
    if kind_name == "sphere":
        kind = Sphere(_number(params["radius"], f"{where}.params.radius"))
    elif kind_name == "box":
        kind = Box(_triple(params["half_extents"], f"{where}.params.half_extents"))
    else:
        kind = Cylinder(
            _number(params["radius"], f"{where}.params.radius"),
            _number(params["height"], f"{where}.params.height"),
        )
    pose = _parse_pose(obj["pose"], f"{where}.pose") if "pose" in obj else Pose.identity()
    label = _string(obj["label"], f"{where}.label") if "label" in obj else None
    return Primitive(pid, kind, pose, label)


def _parse_node(obj: Any, primitive_ids: set[str], seen_leaves: set[str], seen_ops: set[str], where: str) -> CsgNode:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if "leaf" in obj:
        _check_keys(obj, {"leaf"}, {"leaf"}, where)
        pid = _string(obj["leaf"], f"{where}.leaf")
        if pid not in primitive_ids:
            raise SchemaError(f"{where}: leaf references unknown primitive {pid!r}")
        if pid in seen_leaves:
            raise SchemaError(f"{where}: primitive {pid!r} referenced by more than one leaf")
        seen_leaves.add(pid)
        return Leaf(pid)
    _check_keys(obj, {"op", "id", "children"}, {"op", "id", "children"}, where)
    op_name = _string(obj["op"], f"{where}.op")
    try:
        kind = OpKind(op_name)
    except ValueError:
        raise SchemaError(f"{where}: unknown operator {op_name!r}") from None
    node_id = _string(obj["id"], f"{where}.id")
    if node_id in seen_ops or node_id in primitive_ids:
        raise SchemaError(f"{where}: duplicate node id {node_id!r}")
    seen_ops.add(node_id)
    children_raw = obj["children"]
    if not isinstance(children_raw, list):
        raise SchemaError(f"{where}.children: expected a list")
    if kind is OpKind.DIFFERENCE and len(children_raw) != 2:
        raise SchemaError(f"{where}: difference takes exactly 2 children, got {len(children_raw)}")
    if kind is not OpKind.DIFFERENCE and len(children_raw) < 2:
        raise SchemaError(f"{where}: {op_name} takes at least 2 children, got {len(children_raw)}")
    children = tuple(
        _parse_node(c, primitive_ids, seen_leaves, seen_ops, f"{where}.children[{i}]")
        for i, c in enumerate(children_raw)
    )
    return Op(kind, children, node_id)


def parse_scene(text: str) -> Scene:
    """Parse a scene document (strict mode). See the module docstring.

    Raises SceneSyntaxError for malformed JSON, SchemaError for schema
    violations, ValueError for non-positive dimensions or non-finite
    numbers.
    """
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicate_keys, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SceneSyntaxError(f"malformed scene document: {exc}") from None
    _check_keys(doc, {"name", "primitives", "root"}, {"name", "primitives", "root"}, "document")
    name = _string(doc["name"], "name")
    if not isinstance(doc["primitives"], list):
        raise SchemaError("primitives: expected a list")
    primitives: dict[str, Primitive] = {}
    for i, raw in enumerate(doc["primitives"]):
        prim = _parse_primitive(raw, i)
        if prim.id in primitives:
            raise SchemaError(f"duplicate primitive id {prim.id!r}")
        primitives[prim.id] = prim
    seen_leaves: set[str] = set()
    root = _parse_node(doc["root"], set(primitives), seen_leaves, set(), "root")
    orphans = set(primitives) - seen_leaves
    if orphans:
        raise SchemaError(f"primitives not referenced by any leaf: {sorted(orphans)}")
    return Scene(name, primitives, root)


# --------------------------------------------------------------------------
# serialization


def _fmt_float(x: float) -> str:
    if x == 0.0:
        return "0"
    return f"{x:.9g}"


def _fmt_triple(v: Vec3) -> str:
    return f"[{_fmt_float(v.x)}, {_fmt_float(v.y)}, {_fmt_float(v.z)}]"


def _emit_node(node: CsgNode, indent: str) -> str:
    if isinstance(node, Leaf):
        return f'{{"leaf": {json.dumps(node.primitive_id)}}}'
    inner = indent + "  "
    children = ",\n".join(inner + "  " + _emit_node(c, inner + "  ") for c in node.children)
    return (
        "{\n"
        f'{inner}"children": [\n{children}\n{inner}],\n'
        f'{inner}"id": {json.dumps(node.node_id)},\n'
        f'{inner}"op": {json.dumps(node.kind.value)}\n'
        f"{indent}}}"
    )


def _emit_primitive(prim: Primitive, indent: str) -> str:
    inner = indent + "  "
    kind = prim.kind
    if isinstance(kind, Sphere):
        kind_name, params = "sphere", f'{{"radius": {_fmt_float(kind.radius)}}}'
    elif isinstance(kind, Box):
        kind_name, params = "box", f'{{"half_extents": {_fmt_triple(kind.half_extents)}}}'
    else:
        kind_name = "cylinder"
        params = f'{{"height": {_fmt_float(kind.height)}, "radius": {_fmt_float(kind.radius)}}}'
    q = prim.pose.rotation.canonical()
    rotation = f"[{_fmt_float(q.w)}, {_fmt_float(q.x)}, {_fmt_float(q.y)}, {_fmt_float(q.z)}]"
    lines = [f'{inner}"id": {json.dumps(prim.id)}', f'{inner}"kind": {json.dumps(kind_name)}']
    if prim.label is not None:
        lines.append(f'{inner}"label": {json.dumps(prim.label)}')
    lines.append(f'{inner}"params": {params}')
    lines.append(
        f'{inner}"pose": {{"rotation": {rotation}, '
        f'"scale": {_fmt_triple(prim.pose.scale)}, '
        f'"translation": {_fmt_triple(prim.pose.translation)}}}'
    )
    return "{\n" + ",\n".join(lines) + f"\n{indent}}}"


def serialize_scene(scene: Scene) -> str:
    """Canonical UTF-8 text for a scene; byte-stable across runs."""
    prims = ",\n".join("    " + _emit_primitive(scene.primitives[pid], "    ") for pid in sorted(scene.primitives))
    body = (
        "{\n"
        f'  "name": {json.dumps(scene.name)},\n'
        f'  "primitives": [\n{prims}\n  ],\n'
        f'  "root": {_emit_node(scene.root, "  ")}\n'
        "}\n"
    )
    return body


# --------------------------------------------------------------------------
# structural comparison (round-trip oracle)


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def _vec_close(a: Vec3, b: Vec3, tol: float) -> bool:
    return _close(a.x, b.x, tol) and _close(a.y, b.y, tol) and _close(a.z, b.z, tol)


def _rot_close(a: Rotation, b: Rotation, tol: float) -> bool:
    same = max(abs(a.w - b.w), abs(a.x - b.x), abs(a.y - b.y), abs(a.z - b.z))
    flip = max(abs(a.w + b.w), abs(a.x + b.x), abs(a.y + b.y), abs(a.z + b.z))
    return min(same, flip) <= tol


def _kind_equal(a: PrimitiveKind, b: PrimitiveKind, tol: float) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Sphere):
        return _close(a.radius, b.radius, tol)
    if isinstance(a, Box):
        return _vec_close(a.half_extents, b.half_extents, tol)
    return _close(a.radius, b.radius, tol) and _close(a.height, b.height, tol)


def _node_equal(a: CsgNode, b: CsgNode, tol: float) -> bool:
    if isinstance(a, Leaf) or isinstance(b, Leaf):
        return isinstance(a, Leaf) and isinstance(b, Leaf) and a.primitive_id == b.primitive_id
    if a.kind is not b.kind or a.node_id != b.node_id or len(a.children) != len(b.children):
        return False
    return all(_node_equal(ca, cb, tol) for ca, cb in zip(a.children, b.children))


def structural_equal(a: Scene, b: Scene, tol: float = 1e-9) -> bool:
    """Same name, same tree (ids, kinds, order), same primitives with
    numeric fields within `tol` (rotations compared up to sign)."""
    if a.name != b.name or set(a.primitives) != set(b.primitives):
        return False
    for pid, pa in a.primitives.items():
        pb = b.primitives[pid]
        if pa.label != pb.label or not _kind_equal(pa.kind, pb.kind, tol):
            return False
        if not _vec_close(pa.pose.translation, pb.pose.translation, tol):
            return False
        if not _vec_close(pa.pose.scale, pb.pose.scale, tol):
            return False
        if not _rot_close(pa.pose.rotation, pb.pose.rotation, tol):
            return False
    return _node_equal(a.root, b.root, tol)
