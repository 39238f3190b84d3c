// Wire types for the session service. Frames are JSON text; client frames
// carry exactly one action key plus an optional integer "seq" the server
// echoes back on every reply it produces for that frame.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export type DisplayState = "Default" | "Highlighted" | "Selected" | "Grouped";

export interface HandleLayoutMsg {
  origin: Vec3;
  axis_length: number;
  box_half: number;
  sphere_radius: number;
  axis_box_centers: { x: Vec3; y: Vec3; z: Vec3 };
}

export interface InfoBoardMsg {
  mode_text: string;
  active_transform: string | null;
  commands: [string, string][];
}

export interface TreeNodeMsg {
  id: string;
  kind: string;
  parent: string | null;
  children: string[];
  highlighted: boolean;
  grabbed: boolean;
  label: string | null;
}

export interface SessionStateMsg {
  mode: string;
  display_states: Record<string, DisplayState>;
  handle_layout: HandleLayoutMsg | null;
  info_board: InfoBoardMsg;
  tree: TreeNodeMsg[];
  tree_visible: boolean;
  selected: string[];
  highlighted: string[];
  groups: string[][];
  hand_pos: Vec3;
  grabbing: boolean;
}

export interface MeshBufferMsg {
  vertices: Vec3[];
  triangles: [number, number, number][];
}

export interface MeshMsg {
  combined: MeshBufferMsg;
  shells: Record<string, MeshBufferMsg>;
  resolution: number;
}

export interface ErrorMsg {
  code: string;
  message: string;
}

export type ServerFrame =
  | { state: SessionStateMsg; seq: number | null }
  | { effects: string[]; seq: number | null }
  | { mesh: MeshMsg; seq: number | null }
  | { error: ErrorMsg; seq: number | null };

export interface GrabPayload {
  pos: Vec3;
  orient: Quat;
}

export type EventPayload =
  | { voice: string }
  | { hand: Vec3 }
  | { grab_start: GrabPayload }
  | { grab_move: GrabPayload }
  | { grab_end: true }
  | { palm_up: boolean }
  | { grab_tree: string }
  | { release_tree: true };

export type ClientFrame =
  | { event: EventPayload; seq?: number }
  | { load_scene: unknown; seq?: number }
  | { request_mesh: { resolution: number }; seq?: number };

function isVec3(v: unknown): v is Vec3 {
  return Array.isArray(v) && v.length === 3 && v.every((c) => Number.isFinite(c));
}

function isQuat(v: unknown): v is Quat {
  return Array.isArray(v) && v.length === 4 && v.every((c) => Number.isFinite(c));
}

function isGrab(v: unknown): v is GrabPayload {
  if (typeof v !== "object" || v === null) return false;
  const g = v as Record<string, unknown>;
  return Object.keys(g).length === 2 && isVec3(g.pos) && isQuat(g.orient);
}

const EVENT_CHECKS: Record<string, (v: unknown) => boolean> = {
  voice: (v) => typeof v === "string",
  hand: isVec3,
  grab_start: isGrab,
  grab_move: isGrab,
  grab_end: (v) => v === true,
  palm_up: (v) => typeof v === "boolean",
  grab_tree: (v) => typeof v === "string",
  release_tree: (v) => v === true,
};

/** Throws if a frame does not conform to the wire schema. Called before
 * every send so a UI bug can never put a malformed frame on the socket. */
export function validateClientFrame(frame: ClientFrame): void {
  const keys = Object.keys(frame).filter((k) => k !== "seq");
  if (keys.length !== 1) {
    throw new Error(`frame must carry exactly one action key, got [${keys.join(", ")}]`);
  }
  const seq = (frame as { seq?: unknown }).seq;
  if (seq !== undefined && !Number.isInteger(seq)) {
    throw new Error("seq must be an integer");
  }
  const key = keys[0];
  const value = (frame as Record<string, unknown>)[key];
  if (key === "event") {
    const payload = value as Record<string, unknown>;
    if (typeof payload !== "object" || payload === null || Object.keys(payload).length !== 1) {
      throw new Error("event must be an object with exactly one key");
    }
    const [action] = Object.keys(payload);
    const check = EVENT_CHECKS[action];
    if (!check) throw new Error(`unknown event action '${action}'`);
    if (!check(payload[action])) throw new Error(`bad payload for event '${action}'`);
    return;
  }
  if (key === "load_scene") {
    if (typeof value !== "object" || value === null) throw new Error("load_scene needs a scene document");
    return;
  }
  if (key === "request_mesh") {
    const r = (value as Record<string, unknown> | null)?.resolution;
    if (!Number.isInteger(r)) throw new Error("request_mesh needs integer resolution");
    return;
  }
  throw new Error(`unknown action '${key}'`);
}

/** Decode one server frame; throws on anything that is not exactly one of
 * the four frame kinds. */
export function parseServerFrame(text: string): ServerFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("server frame is not JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("server frame must be an object");
  }
  const frame = raw as Record<string, unknown>;
  const kinds = ["state", "effects", "mesh", "error"].filter((k) => k in frame);
  if (kinds.length !== 1) {
    throw new Error(`server frame must carry exactly one of state/effects/mesh/error, got [${kinds.join(", ")}]`);
  }
  const seq = frame.seq;
  if (seq !== null && !Number.isInteger(seq)) {
    throw new Error("server frame seq must be an integer or null");
  }
  return frame as unknown as ServerFrame;
}
