#!/usr/bin/env python3
"""Regenerate checked-in fixtures: the three demo scenes, the
recognition-stats CSV, and the scripted-session goldens (script file,
final scene, effect log).

The expected effect sequence and final-scene facts are asserted here by
hand-derived values before anything is written, so a semantic change in
the engine that invalidates the goldens fails loudly instead of silently
re-pinning them.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

from midair.csg import Box, Cylinder, Leaf, Op, OpKind, Primitive, Scene, Sphere
from midair.geometry import Pose, Rotation, Vec3
from midair.sceneio import serialize_scene
from midair.session import (
    GrabEnd,
    GrabMove,
    GrabStart,
    GrabTreeNode,
    HandMove,
    PalmUp,
    ReleaseTreeNode,
    Voice,
    render_effects,
    run_script,
    serialize_script,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def pose(t=(0.0, 0.0, 0.0), r: Rotation | None = None, s=(1.0, 1.0, 1.0)) -> Pose:
    return Pose(Vec3(*t), r if r is not None else Rotation.identity(), Vec3(*s))


def lamp_scene() -> Scene:
    prims = {
        "sphere1": Primitive("sphere1", Sphere(0.5), pose((0.0, 1.5, 0.0)), label="bulb"),
        "box1": Primitive("box1", Box(Vec3(0.6, 0.25, 0.4)), pose((0.0, 0.9, 0.0))),
        "cyl1": Primitive("cyl1", Cylinder(0.2, 1.4), pose()),
        "box2": Primitive("box2", Box(Vec3(0.8, 0.1, 0.8)), pose((0.0, -0.7, 0.0)), label="base"),
        "sphere2": Primitive("sphere2", Sphere(0.3), pose((0.0, -0.55, 0.0))),
    }
    root = Op(
        OpKind.UNION,
        (
            Op(OpKind.UNION, (Leaf("sphere1"), Leaf("box1")), "grip"),
            Leaf("cyl1"),
            Op(OpKind.DIFFERENCE, (Leaf("box2"), Leaf("sphere2")), "base_cut"),
        ),
        "root",
    )
    return Scene("lamp", prims, root)


def wheel_scene() -> Scene:
    about_z = Rotation.from_axis_angle(Vec3(0.0, 0.0, 1.0), math.pi / 2)
    prims = {
        "wheel": Primitive("wheel", Cylinder(1.0, 0.3), pose(r=about_z), label="rim"),
        "hole": Primitive("hole", Cylinder(0.25, 0.4), pose(r=about_z)),
        "axle": Primitive("axle", Cylinder(0.15, 1.6), pose(r=about_z)),
        "cap1": Primitive("cap1", Sphere(0.3), pose((0.9, 0.0, 0.0))),
        "cap2": Primitive("cap2", Sphere(0.3), pose((-0.9, 0.0, 0.0))),
        "hub_ball": Primitive("hub_ball", Sphere(0.45), pose()),
        "hub_plate": Primitive("hub_plate", Box(Vec3(0.5, 0.12, 0.5)), pose()),
    }
    root = Op(
        OpKind.UNION,
        (
            Op(OpKind.DIFFERENCE, (Leaf("wheel"), Leaf("hole")), "disc"),
            Leaf("axle"),
            Leaf("cap1"),
            Leaf("cap2"),
            Op(OpKind.INTERSECTION, (Leaf("hub_ball"), Leaf("hub_plate")), "hub"),
        ),
        "root",
    )
    return Scene("wheel", prims, root)


def birdhouse_scene() -> Scene:
    about_x_45 = Rotation.from_axis_angle(Vec3(1.0, 0.0, 0.0), math.pi / 4)
    about_x_90 = Rotation.from_axis_angle(Vec3(1.0, 0.0, 0.0), math.pi / 2)
    prims = {
        "body": Primitive("body", Box(Vec3(0.8, 0.6, 0.6)), pose(), label="body"),
        "roof": Primitive("roof", Box(Vec3(0.9, 0.4, 0.7)), pose((0.0, 0.8, 0.0), about_x_45)),
        "entrance": Primitive("entrance", Sphere(0.3), pose((0.35, 0.0, 0.6))),
        "perch": Primitive("perch", Cylinder(0.08, 0.5), pose((0.35, -0.25, 0.75), about_x_90)),
        "chimney": Primitive("chimney", Cylinder(0.12, 0.6), pose((-0.4, 1.3, 0.0))),
        "floor": Primitive("floor", Box(Vec3(0.85, 0.08, 0.65)), pose((0.0, -0.68, 0.0))),
    }
    root = Op(
        OpKind.UNION,
        (
            Op(
                OpKind.DIFFERENCE,
                (Op(OpKind.UNION, (Leaf("body"), Leaf("roof")), "shell"), Leaf("entrance")),
                "house",
            ),
            Leaf("perch"),
            Leaf("chimney"),
            Leaf("floor"),
        ),
        "root",
    )
    return Scene("birdhouse", prims, root)


IDENTITY = Rotation.identity()
QUARTER_Y = Rotation.from_axis_angle(Vec3(0.0, 1.0, 0.0), math.pi / 2)

# The scripted walkthrough: select two primitives, deselect them, select
# via the tree, rotate 90 degrees, scale along one axis, translate to a
# position, and switch an operator from union to difference.
SCRIPT = [
    # select two primitives by hovering
    Voice("select"),
    HandMove(Vec3(0.0, 1.5, 0.0)),
    Voice("append"),
    HandMove(Vec3(0.0, 0.9, 0.0)),
    Voice("append"),
    # deselect them again
    Voice("remove"),
    HandMove(Vec3(0.0, 1.5, 0.0)),
    Voice("remove"),
    # multi-select through the tree
    PalmUp(True),
    GrabTreeNode("grip"),
    Voice("append"),
    ReleaseTreeNode(),
    PalmUp(False),
    # rotate box1 a quarter turn about y
    HandMove(Vec3(0.0, 1.5, 0.0)),
    Voice("remove"),
    Voice("rotate"),
    GrabStart(Vec3(0.0, 1.663, 0.0), IDENTITY),
    GrabMove(Vec3(0.0, 1.663, 0.0), QUARTER_Y),
    GrabEnd(),
    # scale cyl1 along its y axis
    Voice("select"),
    HandMove(Vec3(0.0, 0.0, 0.0)),
    Voice("append"),
    HandMove(Vec3(0.0, 0.9, 0.0)),
    Voice("remove"),
    Voice("scale"),
    GrabStart(Vec3(0.0, 0.755, 0.0), IDENTITY),
    GrabMove(Vec3(0.0, 1.1325, 0.0), IDENTITY),
    GrabEnd(),
    # translate cyl1 to a target position via the center sphere
    Voice("translate"),
    GrabStart(Vec3(0.05, 0.0, 0.0), IDENTITY),
    GrabMove(Vec3(0.45, 0.3, 0.05), IDENTITY),
    GrabEnd(),
    # turn the grip union into a difference
    PalmUp(True),
    GrabTreeNode("grip"),
    Voice("change to sub"),
    ReleaseTreeNode(),
    PalmUp(False),
]

EXPECTED_EFFECTS = [
    "ModeChanged(Selection)",
    "HighlightChanged",
    "SelectionChanged",
    "HighlightChanged",
    "SelectionChanged",
    "SelectionChanged",
    "HighlightChanged",
    "SelectionChanged",
    "TreeShown",
    "HighlightChanged",
    "SelectionChanged",
    "TreeHidden",
    "HighlightChanged",
    "SelectionChanged",
    "ModeChanged(Manipulation(Rotate))",
    "SceneEdited",
    "ModeChanged(Selection)",
    "HighlightChanged",
    "SelectionChanged",
    "HighlightChanged",
    "SelectionChanged",
    "ModeChanged(Manipulation(Scale))",
    "SceneEdited",
    "ModeChanged(Manipulation(Translate))",
    "SceneEdited",
    "TreeShown",
    "HighlightChanged",
    "OperatorChanged(grip=difference)",
    "TreeHidden",
]

RECOGNITION_CSV = "P1,60,12\nP2,52,35\nP3,49,23\nP4,55,27\nP5,36,12\n"


def check_final_scene(scene: Scene) -> None:
    box1 = scene.primitives["box1"]
    twist = box1.pose.rotation.twist_angle_about(Vec3(0.0, 1.0, 0.0))
    assert abs(twist - math.pi / 2) < 1e-6, f"box1 twist {twist}"
    assert box1.pose.translation.distance_to(Vec3(0.0, 0.9, 0.0)) < 1e-9

    cyl1 = scene.primitives["cyl1"]
    assert abs(cyl1.pose.scale.y - 1.5) < 1e-3, f"cyl1 scale {cyl1.pose.scale}"
    assert cyl1.pose.scale.x == 1.0 and cyl1.pose.scale.z == 1.0
    assert cyl1.pose.translation.distance_to(Vec3(0.4, 0.3, 0.05)) < 1e-12

    grip = scene.node_by_id("grip")
    assert grip.kind is OpKind.DIFFERENCE

    for untouched in ("sphere1", "box2", "sphere2"):
        assert scene.primitives[untouched].pose == lamp_scene().primitives[untouched].pose


def main() -> int:
    (FIXTURES / "scenes").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "stats").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "golden").mkdir(parents=True, exist_ok=True)

    for scene in (lamp_scene(), wheel_scene(), birdhouse_scene()):
        path = FIXTURES / "scenes" / f"object_{scene.name}.json"
        path.write_text(serialize_scene(scene), encoding="utf-8")
        print(f"wrote {path.relative_to(ROOT)}")

    (FIXTURES / "stats" / "recognition_counts.csv").write_text(RECOGNITION_CSV, encoding="utf-8")
    print("wrote fixtures/stats/recognition_counts.csv")

    state, effects = run_script(lamp_scene(), SCRIPT)
    rendered = [e.render() for e in effects]
    if rendered != EXPECTED_EFFECTS:
        for i, (got, want) in enumerate(zip(rendered + ["<end>"] * 9, EXPECTED_EFFECTS + ["<end>"] * 9)):
            marker = "  " if got == want else "!!"
            print(f"{marker} {i:3d} got={got!r} want={want!r}")
        raise AssertionError("effect log deviates from the hand-derived sequence")
    check_final_scene(state.scene)

    (FIXTURES / "golden" / "walkthrough_script.jsonl").write_text(serialize_script(SCRIPT), encoding="utf-8")
    (FIXTURES / "golden" / "walkthrough_final_scene.json").write_text(serialize_scene(state.scene), encoding="utf-8")
    (FIXTURES / "golden" / "walkthrough_effects.log").write_text(render_effects(effects), encoding="utf-8")
    print("wrote fixtures/golden/walkthrough_{script.jsonl,final_scene.json,effects.log}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
