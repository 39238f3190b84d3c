"""Deterministic interaction session: selection and manipulation modes,
axis-handle grabs, tree-node grabbing, and an information board.

Every transition is a pure function of (state, event); misuse never
raises, it yields Warning/Ignored effects so scripted replays and fuzz
runs are total. States are immutable snapshots; the scene only changes
through manipulation grabs and operator-change commands.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .commands import (
    Append,
    ChangeOperator,
    EnterSelection,
    Group,
    Remove,
    SetTransform,
    TransformKind,
    Ungroup,
    command_explanations,
    parse_command,
)
from .csg import (
    Leaf,
    OpKind,
    RotateAbout,
    Scene,
    ScaleAxes,
    Translate,
    UnknownNodeError,
    apply_pose_delta,
    leaves_under,
    primitive_contains,
    selection_aabb,
    set_operator,
)
from .geometry import Rotation, Vec3

# handle sizing relative to the selection's bounding box
AXIS_MIN_LENGTH = 0.1
BOX_HALF_RATIO = 0.1
SPHERE_RADIUS_RATIO = 0.15
GRAB_TOLERANCE = 1.5  # hit radius multiplier on handle size
SCALE_FACTOR_MIN = 0.01
SCALE_FACTOR_MAX = 100.0


# --------------------------------------------------------------------------
# input events


@dataclass(frozen=True, slots=True)
class Voice:
    utterance: str


@dataclass(frozen=True, slots=True)
class HandMove:
    pos: Vec3


@dataclass(frozen=True, slots=True)
class GrabStart:
    pos: Vec3
    orientation: Rotation


@dataclass(frozen=True, slots=True)
class GrabMove:
    pos: Vec3
    orientation: Rotation


@dataclass(frozen=True, slots=True)
class GrabEnd:
    pass


@dataclass(frozen=True, slots=True)
class PalmUp:
    visible: bool


@dataclass(frozen=True, slots=True)
class GrabTreeNode:
    node_id: str


@dataclass(frozen=True, slots=True)
class ReleaseTreeNode:
    pass


InputEvent = Voice | HandMove | GrabStart | GrabMove | GrabEnd | PalmUp | GrabTreeNode | ReleaseTreeNode


# --------------------------------------------------------------------------
# modes and effects


@dataclass(frozen=True, slots=True)
class Idle:
    pass


@dataclass(frozen=True, slots=True)
class Selection:
    pass


@dataclass(frozen=True, slots=True)
class Manipulation:
    kind: TransformKind


Mode = Idle | Selection | Manipulation


def mode_label(mode: Mode) -> str:
    if isinstance(mode, Idle):
        return "Idle"
    if isinstance(mode, Selection):
        return "Selection"
    return f"Manipulation({mode.kind.value.capitalize()})"


@dataclass(frozen=True, slots=True)
class ModeChanged:
    mode: str

    def render(self) -> str:
        return f"ModeChanged({self.mode})"


@dataclass(frozen=True, slots=True)
class HighlightChanged:
    def render(self) -> str:
        return "HighlightChanged"


@dataclass(frozen=True, slots=True)
class SelectionChanged:
    def render(self) -> str:
        return "SelectionChanged"


@dataclass(frozen=True, slots=True)
class GroupChanged:
    def render(self) -> str:
        return "GroupChanged"


@dataclass(frozen=True, slots=True)
class SceneEdited:
    def render(self) -> str:
        return "SceneEdited"


@dataclass(frozen=True, slots=True)
class TreeShown:
    def render(self) -> str:
        return "TreeShown"


@dataclass(frozen=True, slots=True)
class TreeHidden:
    def render(self) -> str:
        return "TreeHidden"


@dataclass(frozen=True, slots=True)
class OperatorChanged:
    node_id: str
    kind: OpKind

    def render(self) -> str:
        return f"OperatorChanged({self.node_id}={self.kind.value})"


@dataclass(frozen=True, slots=True)
class Warning:
    reason: str

    def render(self) -> str:
        return f"Warning({self.reason})"


@dataclass(frozen=True, slots=True)
class Ignored:
    reason: str

    def render(self) -> str:
        return f"Ignored({self.reason})"


Effect = (
    ModeChanged
    | HighlightChanged
    | SelectionChanged
    | GroupChanged
    | SceneEdited
    | TreeShown
    | TreeHidden
    | OperatorChanged
    | Warning
    | Ignored
)

# warning / ignore reasons
NO_SELECTION = "NoSelection"
NOTHING_HIGHLIGHTED = "NothingHighlighted"
NEED_TWO = "NeedTwo"
NO_GROUP = "NoGroup"
UNSUPPORTED = "Unsupported"
LEAF_NOT_OPERATOR = "LeafNotOperator"
NO_NODE_GRABBED = "NoNodeGrabbed"
UNKNOWN_NODE = "UnknownNode"
WRONG_MODE = "WrongMode"
NOT_RECOGNIZED = "NotRecognized"
NO_HANDLE_HIT = "NoHandleHit"
NO_ACTIVE_GRAB = "NoActiveGrab"
ALREADY_GRABBING = "AlreadyGrabbing"
NO_CHANGE = "NoChange"
TREE_NOT_VISIBLE = "TreeHidden"


# --------------------------------------------------------------------------
# handles


class Axis(Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def unit(self) -> Vec3:
        return _AXIS_UNITS[self]


_AXIS_UNITS = {Axis.X: Vec3(1.0, 0.0, 0.0), Axis.Y: Vec3(0.0, 1.0, 0.0), Axis.Z: Vec3(0.0, 0.0, 1.0)}


@dataclass(frozen=True, slots=True)
class AxisHandle:
    axis: Axis


@dataclass(frozen=True, slots=True)
class CenterSphere:
    pass


HandleTarget = AxisHandle | CenterSphere


@dataclass(frozen=True, slots=True)
class HandleLayout:
    """Gizmo geometry: three axis boxes plus a center sphere, sized from
    the selection's bounding box."""

    origin: Vec3
    axis_length: float
    box_half: float
    sphere_radius: float

    def axis_box_center(self, axis: Axis) -> Vec3:
        return self.origin + axis.unit.scaled(self.axis_length)

    def axis_box_centers(self) -> tuple[Vec3, Vec3, Vec3]:
        return tuple(self.axis_box_center(a) for a in (Axis.X, Axis.Y, Axis.Z))


@dataclass(frozen=True, slots=True)
class GrabBinding:
    """One in-progress handle grab; the scene during the grab is always
    baseline_scene plus a single delta derived from the latest hand
    sample, so releasing mid-motion never leaves partial edits."""

    target: HandleTarget
    start_hand_pos: Vec3
    start_hand_orientation: Rotation
    pivot: Vec3  # handle origin at grab start
    axis_length: float  # handle size at grab start (scale denominator)
    baseline_scene: Scene


@dataclass(frozen=True, slots=True)
class InfoBoard:
    mode_text: str
    active_transform: str | None
    commands: tuple[tuple[str, str], ...]


# --------------------------------------------------------------------------
# session state


@dataclass(frozen=True, slots=True)
class SessionState:
    scene: Scene
    mode: Mode = field(default_factory=Idle)
    highlighted: frozenset[str] = frozenset()
    selected: frozenset[str] = frozenset()
    groups: tuple[frozenset[str], ...] = ()
    hand_pos: Vec3 = Vec3(0.0, 0.0, 0.0)
    active_grab: GrabBinding | None = None
    tree_visible: bool = False
    grabbed_tree_node: str | None = None
    event_log: tuple[tuple[InputEvent, tuple[Effect, ...]], ...] = ()


def new_session(scene: Scene) -> SessionState:
    """Idle session over the scene: nothing highlighted, selected,
    grouped, or grabbed; tree hidden."""
    return SessionState(scene=scene)


def display_states(state: SessionState) -> dict[str, str]:
    """Per-primitive display tag; precedence Grouped > Selected >
    Highlighted > Default."""
    grouped: set[str] = set()
    for g in state.groups:
        grouped |= g
    out: dict[str, str] = {}
    for pid in state.scene.primitives:
        if pid in grouped:
            out[pid] = "Grouped"
        elif pid in state.selected:
            out[pid] = "Selected"
        elif pid in state.highlighted:
            out[pid] = "Highlighted"
        else:
            out[pid] = "Default"
    return out


def handle_layout(state: SessionState) -> HandleLayout | None:
    """Gizmo placement; only shown in manipulation mode with a selection."""
    if not isinstance(state.mode, Manipulation) or not state.selected:
        return None
    box = selection_aabb(state.scene, state.selected)
    length = max(0.5 * box.diagonal(), AXIS_MIN_LENGTH)
    return HandleLayout(
        origin=box.center(),
        axis_length=length,
        box_half=BOX_HALF_RATIO * length,
        sphere_radius=SPHERE_RADIUS_RATIO * length,
    )


def information_board(state: SessionState) -> InfoBoard:
    mode = state.mode
    if isinstance(mode, Idle):
        text, active = "Idle", None
    elif isinstance(mode, Selection):
        text, active = "Selection", None
    else:
        text, active = "Manipulation", mode.kind.value
    return InfoBoard(mode_text=text, active_transform=active, commands=command_explanations())


# --------------------------------------------------------------------------
# transitions


def _commit_grab(state: SessionState) -> SessionState:
    """Drop any active binding; the scene already holds the last delta."""
    if state.active_grab is None:
        return state
    return replace(state, active_grab=None)


def _set_mode(state: SessionState, mode: Mode) -> tuple[SessionState, list[Effect]]:
    state = _commit_grab(state)
    return replace(state, mode=mode), [ModeChanged(mode_label(mode))]


def _recompute_highlight(state: SessionState, pos: Vec3) -> tuple[SessionState, list[Effect]]:
    hits = frozenset(
        pid for pid, prim in state.scene.primitives.items() if primitive_contains(prim, pos)
    )
    if hits == state.highlighted:
        return state, []
    return replace(state, highlighted=hits), [HighlightChanged()]


def _dissolve_groups(groups: tuple[frozenset[str], ...], ids: frozenset[str]) -> tuple[frozenset[str], ...]:
    return tuple(g for g in groups if not (g & ids))


def _step_voice(state: SessionState, event: Voice) -> tuple[SessionState, list[Effect]]:
    cmd = parse_command(event.utterance)
    if cmd is None:
        return state, [Ignored(NOT_RECOGNIZED)]

    if isinstance(cmd, EnterSelection):
        return _set_mode(state, Selection())

    if isinstance(cmd, SetTransform):
        if not state.selected:
            return state, [Warning(NO_SELECTION)]
        return _set_mode(state, Manipulation(cmd.kind))

    if isinstance(cmd, Append):
        if not isinstance(state.mode, Selection):
            return state, [Warning(WRONG_MODE)]
        if not state.highlighted:
            return state, [Warning(NOTHING_HIGHLIGHTED)]
        merged = state.selected | state.highlighted
        if merged == state.selected:
            return state, []
        return replace(state, selected=merged), [SelectionChanged()]

    if isinstance(cmd, Remove):
        if not isinstance(state.mode, Selection):
            return state, [Warning(WRONG_MODE)]
        if not state.highlighted:
            return state, [Warning(NOTHING_HIGHLIGHTED)]
        removed = state.selected & state.highlighted
        if not removed:
            return state, []
        effects: list[Effect] = [SelectionChanged()]
        groups = _dissolve_groups(state.groups, removed)
        if groups != state.groups:
            effects.append(GroupChanged())
        return replace(state, selected=state.selected - removed, groups=groups), effects

    if isinstance(cmd, Group):
        if not isinstance(state.mode, Selection):
            return state, [Warning(WRONG_MODE)]
        if len(state.selected) < 2:
            return state, [Warning(NEED_TWO)]
        groups = (frozenset(state.selected),)
        if groups == state.groups:
            return state, []
        return replace(state, groups=groups), [GroupChanged()]

    if isinstance(cmd, Ungroup):
        if not isinstance(state.mode, Selection):
            return state, [Warning(WRONG_MODE)]
        if not state.groups:
            return state, [Warning(NO_GROUP)]
        touched = _dissolve_groups(state.groups, state.highlighted)
        if touched != state.groups:
            groups = touched
        else:
            groups = state.groups[:-1]  # none highlighted: drop most recent
        return replace(state, groups=groups), [GroupChanged()]

    if isinstance(cmd, ChangeOperator):
        if state.grabbed_tree_node is None:
            return state, [Warning(NO_NODE_GRABBED)]
        try:
            node = state.scene.node_by_id(state.grabbed_tree_node)
        except UnknownNodeError:
            return state, [Warning(UNKNOWN_NODE)]
        if isinstance(node, Leaf):
            return state, [Warning(LEAF_NOT_OPERATOR)]
        if node.kind == cmd.kind:
            return state, []
        scene = set_operator(state.scene, state.grabbed_tree_node, cmd.kind)
        return replace(state, scene=scene), [OperatorChanged(state.grabbed_tree_node, cmd.kind)]

    raise AssertionError(f"unhandled command {cmd!r}")


def _step_hand_move(state: SessionState, event: HandMove) -> tuple[SessionState, list[Effect]]:
    state = replace(state, hand_pos=event.pos)
    if isinstance(state.mode, Selection):
        return _recompute_highlight(state, event.pos)
    # hovering does nothing outside selection mode
    return state, [Ignored(WRONG_MODE)]


def _step_grab_start(state: SessionState, event: GrabStart) -> tuple[SessionState, list[Effect]]:
    if state.active_grab is not None:
        return state, [Ignored(ALREADY_GRABBING)]
    if not isinstance(state.mode, Manipulation):
        return state, [Ignored(WRONG_MODE)]
    layout = handle_layout(state)
    if layout is None:
        return state, [Ignored(NO_HANDLE_HIT)]

    target: HandleTarget | None = None
    for axis in (Axis.X, Axis.Y, Axis.Z):
        if event.pos.distance_to(layout.axis_box_center(axis)) <= layout.box_half * GRAB_TOLERANCE:
            target = AxisHandle(axis)
            break
    if target is None and event.pos.distance_to(layout.origin) <= layout.sphere_radius * GRAB_TOLERANCE:
        target = CenterSphere()
    if target is None:
        return state, [Ignored(NO_HANDLE_HIT)]
    if isinstance(target, CenterSphere) and state.mode.kind is TransformKind.SCALE:
        return state, [Warning(UNSUPPORTED)]

    binding = GrabBinding(
        target=target,
        start_hand_pos=event.pos,
        start_hand_orientation=event.orientation,
        pivot=layout.origin,
        axis_length=layout.axis_length,
        baseline_scene=state.scene,
    )
    return replace(state, active_grab=binding), []


def _grab_delta(binding: GrabBinding, kind: TransformKind, event: GrabMove) -> Translate | RotateAbout | ScaleAxes:
    displacement = event.pos - binding.start_hand_pos
    if isinstance(binding.target, AxisHandle):
        u = binding.target.axis.unit
        if kind is TransformKind.TRANSLATE:
            return Translate(u.scaled(displacement.dot(u)))
        if kind is TransformKind.SCALE:
            f = 1.0 + displacement.dot(u) / binding.axis_length
            f = min(max(f, SCALE_FACTOR_MIN), SCALE_FACTOR_MAX)
            factors = Vec3(
                f if binding.target.axis is Axis.X else 1.0,
                f if binding.target.axis is Axis.Y else 1.0,
                f if binding.target.axis is Axis.Z else 1.0,
            )
            return ScaleAxes(factors, binding.pivot)
        # wrist rotation: twist of the orientation delta about the handle axis
        q = event.orientation * binding.start_hand_orientation.inverse()
        angle = q.twist_angle_about(u)
        return RotateAbout(u, angle, binding.pivot)
    # center sphere: unconstrained
    if kind is TransformKind.TRANSLATE:
        return Translate(displacement)
    q = event.orientation * binding.start_hand_orientation.inverse()
    axis, angle = q.to_axis_angle()
    return RotateAbout(axis, angle, binding.pivot)


def _step_grab_move(state: SessionState, event: GrabMove) -> tuple[SessionState, list[Effect]]:
    binding = state.active_grab
    if binding is None:
        return state, [Ignored(NO_ACTIVE_GRAB)]
    assert isinstance(state.mode, Manipulation)
    delta = _grab_delta(binding, state.mode.kind, event)
    scene = apply_pose_delta(binding.baseline_scene, state.selected, delta)
    return replace(state, scene=scene, hand_pos=event.pos), [SceneEdited()]


def _step_grab_end(state: SessionState) -> tuple[SessionState, list[Effect]]:
    if state.active_grab is None:
        return state, [Ignored(NO_ACTIVE_GRAB)]
    return _commit_grab(state), []


def _step_palm_up(state: SessionState, event: PalmUp) -> tuple[SessionState, list[Effect]]:
    if event.visible == state.tree_visible:
        return state, [Ignored(NO_CHANGE)]
    if event.visible:
        return replace(state, tree_visible=True), [TreeShown()]
    # losing the palm hides the tree and releases any grabbed node
    return replace(state, tree_visible=False, grabbed_tree_node=None), [TreeHidden()]


def _step_grab_tree(state: SessionState, event: GrabTreeNode) -> tuple[SessionState, list[Effect]]:
    if not state.tree_visible:
        return state, [Ignored(TREE_NOT_VISIBLE)]
    try:
        state.scene.node_by_id(event.node_id)
    except UnknownNodeError:
        return state, [Warning(UNKNOWN_NODE)]
    hits = frozenset(leaves_under(state.scene, event.node_id))
    effects: list[Effect] = [] if hits == state.highlighted else [HighlightChanged()]
    return replace(state, grabbed_tree_node=event.node_id, highlighted=hits), effects


def _step_release_tree(state: SessionState) -> tuple[SessionState, list[Effect]]:
    if state.grabbed_tree_node is None:
        return state, [Ignored(NO_NODE_GRABBED)]
    return replace(state, grabbed_tree_node=None), []


def step(state: SessionState, event: InputEvent) -> tuple[SessionState, list[Effect]]:
    """Apply one event; total (never raises on any event in any state)."""
    if isinstance(event, Voice):
        new, effects = _step_voice(state, event)
    elif isinstance(event, HandMove):
        new, effects = _step_hand_move(state, event)
    elif isinstance(event, GrabStart):
        new, effects = _step_grab_start(state, event)
    elif isinstance(event, GrabMove):
        new, effects = _step_grab_move(state, event)
    elif isinstance(event, GrabEnd):
        new, effects = _step_grab_end(state)
    elif isinstance(event, PalmUp):
        new, effects = _step_palm_up(state, event)
    elif isinstance(event, GrabTreeNode):
        new, effects = _step_grab_tree(state, event)
    elif isinstance(event, ReleaseTreeNode):
        new, effects = _step_release_tree(state)
    else:
        raise TypeError(f"unknown event {event!r}")
    new = replace(new, event_log=state.event_log + ((event, tuple(effects)),))
    return new, effects


def run_script(scene: Scene, events: list[InputEvent]) -> tuple[SessionState, list[Effect]]:
    """Left fold of step; the replay entry point."""
    state = new_session(scene)
    all_effects: list[Effect] = []
    for event in events:
        state, effects = step(state, event)
        all_effects.extend(effects)
    return state, all_effects


# --------------------------------------------------------------------------
# script file format: one JSON object per line


class ScriptError(ValueError):
    """Malformed script line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _vec3(value: object, what: str) -> Vec3:
    if not (isinstance(value, list) and len(value) == 3 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ValueError(f"{what} must be a list of 3 numbers")
    if not all(math.isfinite(float(v)) for v in value):
        raise ValueError(f"{what} must be finite")
    return Vec3(float(value[0]), float(value[1]), float(value[2]))


def _rotation(value: object, what: str) -> Rotation:
    if not (isinstance(value, list) and len(value) == 4 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ValueError(f"{what} must be a list of 4 numbers [w, x, y, z]")
    if not all(math.isfinite(float(v)) for v in value):
        raise ValueError(f"{what} must be finite")
    return Rotation.from_unnormalized(float(value[0]), float(value[1]), float(value[2]), float(value[3]))


def _grab_payload(value: object, what: str) -> tuple[Vec3, Rotation]:
    if not isinstance(value, dict) or set(value.keys()) != {"pos", "orient"}:
        raise ValueError(f"{what} must be an object with keys 'pos' and 'orient'")
    return _vec3(value["pos"], f"{what}.pos"), _rotation(value["orient"], f"{what}.orient")


def event_from_json(obj: dict) -> InputEvent:
    """Decode one script-line object; raises ValueError on bad shape."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("event must be an object with exactly one key")
    key, value = next(iter(obj.items()))
    if key == "voice":
        if not isinstance(value, str):
            raise ValueError("voice must be a string")
        return Voice(value)
    if key == "hand":
        return HandMove(_vec3(value, "hand"))
    if key == "grab_start":
        pos, orient = _grab_payload(value, "grab_start")
        return GrabStart(pos, orient)
    if key == "grab_move":
        pos, orient = _grab_payload(value, "grab_move")
        return GrabMove(pos, orient)
    if key == "grab_end":
        if value is not True:
            raise ValueError("grab_end must be true")
        return GrabEnd()
    if key == "palm_up":
        if not isinstance(value, bool):
            raise ValueError("palm_up must be a boolean")
        return PalmUp(value)
    if key == "grab_tree":
        if not isinstance(value, str):
            raise ValueError("grab_tree must be a node id string")
        return GrabTreeNode(value)
    if key == "release_tree":
        if value is not True:
            raise ValueError("release_tree must be true")
        return ReleaseTreeNode()
    raise ValueError(f"unknown event key {key!r}")


def event_to_json(event: InputEvent) -> dict:
    if isinstance(event, Voice):
        return {"voice": event.utterance}
    if isinstance(event, HandMove):
        return {"hand": list(event.pos.as_tuple())}
    if isinstance(event, GrabStart):
        return {"grab_start": {"pos": list(event.pos.as_tuple()), "orient": list(event.orientation.as_tuple())}}
    if isinstance(event, GrabMove):
        return {"grab_move": {"pos": list(event.pos.as_tuple()), "orient": list(event.orientation.as_tuple())}}
    if isinstance(event, GrabEnd):
        return {"grab_end": True}
    if isinstance(event, PalmUp):
        return {"palm_up": event.visible}
    if isinstance(event, GrabTreeNode):
        return {"grab_tree": event.node_id}
    if isinstance(event, ReleaseTreeNode):
        return {"release_tree": True}
    raise TypeError(f"unknown event {event!r}")


def parse_script(text: str) -> list[InputEvent]:
    """One event per non-empty line; errors carry line numbers."""
    events: list[InputEvent] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScriptError(line_no, f"invalid JSON: {exc.msg}") from exc
        try:
            events.append(event_from_json(obj))
        except ValueError as exc:
            raise ScriptError(line_no, str(exc)) from exc
    return events


def serialize_script(events: list[InputEvent]) -> str:
    return "".join(json.dumps(event_to_json(e), separators=(", ", ": ")) + "\n" for e in events)


def render_effects(effects: list[Effect]) -> str:
    """One effect per line; the effect-log golden format."""
    return "".join(e.render() + "\n" for e in effects)
