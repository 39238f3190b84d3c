"""Random event streams and per-step invariant checks shared by the
session unit tests and the long-running fuzz gate."""

import math
import random

from midair.geometry import Rotation, Vec3
from midair.session import (
    GrabEnd,
    GrabMove,
    GrabStart,
    GrabTreeNode,
    GroupChanged,
    HandMove,
    HighlightChanged,
    Manipulation,
    ModeChanged,
    OperatorChanged,
    PalmUp,
    ReleaseTreeNode,
    SceneEdited,
    SelectionChanged,
    SessionState,
    Voice,
    mode_label,
)

_UTTERANCES = [
    "select", "append", "remove", "group", "un-group", "translate", "rotate",
    "scale", "change to union", "change to inter", "change to sub",
    "", "garbage", "select all", "UN GROUP", "  rotate  ",
]


def random_event(rng: random.Random, node_ids: list[str]):
    roll = rng.random()
    if roll < 0.35:
        return Voice(rng.choice(_UTTERANCES))
    if roll < 0.55:
        return HandMove(_random_pos(rng))
    if roll < 0.65:
        return GrabStart(_random_pos(rng), _random_rotation(rng))
    if roll < 0.75:
        return GrabMove(_random_pos(rng), _random_rotation(rng))
    if roll < 0.82:
        return GrabEnd()
    if roll < 0.88:
        return PalmUp(rng.random() < 0.5)
    if roll < 0.96:
        return GrabTreeNode(rng.choice(node_ids + ["bogus"]))
    return ReleaseTreeNode()


def _random_pos(rng: random.Random) -> Vec3:
    return Vec3(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5))


def _random_rotation(rng: random.Random) -> Rotation:
    axis = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
    if axis.norm() < 1e-6:
        axis = Vec3(1, 0, 0)
    return Rotation.from_axis_angle(axis, rng.uniform(-math.pi, math.pi))


def check_step_invariants(before: SessionState, after: SessionState, effects) -> None:
    """State may only change along the channels the effects announce."""
    kinds = {type(e) for e in effects}
    if after.scene is not before.scene:
        assert kinds & {SceneEdited, OperatorChanged}, "scene changed silently"
    if after.selected != before.selected:
        assert SelectionChanged in kinds, "selection changed silently"
    if after.highlighted != before.highlighted:
        assert HighlightChanged in kinds, "highlight changed silently"
    if after.groups != before.groups:
        assert GroupChanged in kinds, "groups changed silently"
    if mode_label(after.mode) != mode_label(before.mode):
        assert ModeChanged in kinds, "mode changed silently"

    if after.active_grab is not None:
        assert isinstance(after.mode, Manipulation), "grab outside manipulation"
        assert after.selected, "grab with empty selection"
    if after.grabbed_tree_node is not None:
        assert after.tree_visible, "tree node held while tree hidden"
        after.scene.node_by_id(after.grabbed_tree_node)  # must resolve

    selected = set(after.selected)
    seen: set[str] = set()
    for g in after.groups:
        assert g <= selected, "group member not selected"
        assert not (g & seen), "overlapping groups"
        seen |= g

    for pid in after.selected | after.highlighted:
        assert pid in after.scene.primitives, "dangling primitive id"
    assert len(after.event_log) == len(before.event_log) + 1
