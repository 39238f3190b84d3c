import * as THREE from "three";
import type { EventPayload, Quat, Vec3 } from "./protocol";
import type { HandleHit, SceneGraph } from "./scenegraph";

// Desk-scale stand-in for the tracked hand: the cursor ray-projected onto
// the working plane is the hand position; press/drag/release on a gizmo
// handle is the grab lifecycle; holding Shift while dragging twists the
// virtual wrist about the grabbed axis (for rotate mode); the wheel moves
// the working plane in depth.

export interface GestureDeps {
  element: HTMLElement;
  graph: SceneGraph;
  send(payload: EventPayload): void;
  enabled(): boolean;
}

export interface GestureController {
  detach(): void;
  /** Exposed for tests: the drag currently in progress, if any. */
  dragging(): boolean;
}

const IDENTITY: Quat = [1, 0, 0, 0];
const TWIST_PER_PIXEL = 0.01;
const DEPTH_PER_WHEEL = 0.002;

function vec3(v: THREE.Vector3): Vec3 {
  return [v.x, v.y, v.z];
}

export function attachGestures(deps: GestureDeps): GestureController {
  const { element, graph, send } = deps;

  interface Drag {
    base: THREE.Vector3;
    axis: THREE.Vector3 | null;
    planeStart: THREE.Vector3 | null;
    twist: number;
    lastClientX: number;
  }
  let drag: Drag | null = null;

  function ndcOf(ev: { clientX: number; clientY: number }): THREE.Vector2 {
    const rect = element.getBoundingClientRect();
    const width = rect.width || element.clientWidth || 1;
    const height = rect.height || element.clientHeight || 1;
    return new THREE.Vector2(
      ((ev.clientX - rect.left) / width) * 2 - 1,
      -((ev.clientY - rect.top) / height) * 2 + 1,
    );
  }

  function wristQuat(d: Drag): Quat {
    if (d.axis === null || d.twist === 0) return IDENTITY;
    const q = new THREE.Quaternion().setFromAxisAngle(d.axis, d.twist);
    return [q.w, q.x, q.y, q.z];
  }

  function onPointerDown(ev: PointerEvent): void {
    if (!deps.enabled()) return;
    const hit: HandleHit | null = graph.pickHandle(ndcOf(ev));
    if (!hit) return;
    drag = {
      base: hit.center,
      axis: hit.axis,
      planeStart: graph.pointOnWorkingPlane(ndcOf(ev)),
      twist: 0,
      lastClientX: ev.clientX,
    };
    element.setPointerCapture?.(ev.pointerId);
    send({ grab_start: { pos: vec3(hit.center), orient: IDENTITY } });
  }

  function onPointerMove(ev: PointerEvent): void {
    if (!deps.enabled()) return;
    const ndc = ndcOf(ev);
    if (drag === null) {
      const point = graph.pointOnWorkingPlane(ndc);
      if (point) send({ hand: vec3(point) });
      return;
    }
    if (ev.shiftKey && drag.axis !== null) {
      drag.twist += (ev.clientX - drag.lastClientX) * TWIST_PER_PIXEL;
      drag.lastClientX = ev.clientX;
      send({ grab_move: { pos: vec3(drag.base), orient: wristQuat(drag) } });
      return;
    }
    drag.lastClientX = ev.clientX;
    const point = graph.pointOnWorkingPlane(ndc);
    if (!point || !drag.planeStart) return;
    const pos = drag.base.clone().add(point.clone().sub(drag.planeStart));
    send({ grab_move: { pos: vec3(pos), orient: wristQuat(drag) } });
  }

  function endDrag(): void {
    if (drag === null) return;
    drag = null;
    send({ grab_end: true });
  }

  function onPointerUp(): void {
    if (!deps.enabled()) {
      drag = null;
      return;
    }
    endDrag();
  }

  function onWheel(ev: WheelEvent): void {
    ev.preventDefault();
    graph.setWorkingDepth(graph.getWorkingDepth() - ev.deltaY * DEPTH_PER_WHEEL);
  }

  element.addEventListener("pointerdown", onPointerDown);
  element.addEventListener("pointermove", onPointerMove);
  element.addEventListener("pointerup", onPointerUp);
  element.addEventListener("pointerleave", onPointerUp);
  element.addEventListener("wheel", onWheel, { passive: false });

  return {
    detach(): void {
      element.removeEventListener("pointerdown", onPointerDown);
      element.removeEventListener("pointermove", onPointerMove);
      element.removeEventListener("pointerup", onPointerUp);
      element.removeEventListener("pointerleave", onPointerUp);
      element.removeEventListener("wheel", onWheel);
    },
    dragging(): boolean {
      return drag !== null;
    },
  };
}
