import * as THREE from "three";
import { describe, expect, it } from "vitest";
import type { HandleLayoutMsg } from "../../src/protocol";
import { createSceneGraph } from "../../src/scenegraph";
import { DISPLAY_TINTS, ViewModel } from "../../src/viewmodel";
import { meshMsg, stateMsg } from "./mock";

const LAYOUT: HandleLayoutMsg = {
  origin: [0, 1, 0],
  axis_length: 1,
  box_half: 0.1,
  sphere_radius: 0.15,
  axis_box_centers: { x: [1, 1, 0], y: [0, 2, 0], z: [0, 1, 1] },
};

function ndcOfWorld(graph: ReturnType<typeof createSceneGraph>, p: THREE.Vector3): THREE.Vector2 {
  const projected = p.clone().project(graph.camera);
  return new THREE.Vector2(projected.x, projected.y);
}

describe("mesh upload", () => {
  it("builds the combined geometry and one shell per primitive", () => {
    const graph = createSceneGraph();
    const vm = new ViewModel();
    vm.applyFrame({
      mesh: meshMsg({ shells: { a: meshMsg().combined, b: meshMsg().combined } }),
      seq: null,
    });
    graph.update(vm);
    expect(graph.combinedGeometry()?.getAttribute("position").count).toBe(3);
    expect(graph.shellMaterial("a")).not.toBeNull();
    expect(graph.shellMaterial("b")).not.toBeNull();
    expect(graph.shellMaterial("missing")).toBeNull();
  });

  it("re-uploads only when the mesh version changes", () => {
    const graph = createSceneGraph();
    const vm = new ViewModel();
    vm.applyFrame({ mesh: meshMsg(), seq: null });
    graph.update(vm);
    const first = graph.combinedGeometry();
    graph.update(vm);
    expect(graph.combinedGeometry()).toBe(first);
    vm.applyFrame({ mesh: meshMsg(), seq: 2 });
    graph.update(vm);
    expect(graph.combinedGeometry()).not.toBe(first);
  });
});

describe("shell tinting", () => {
  it("colors shells by display state and follows changes", () => {
    const graph = createSceneGraph();
    const vm = new ViewModel();
    vm.applyFrame({ mesh: meshMsg({ shells: { bulb: meshMsg().combined } }), seq: null });
    vm.applyFrame({ state: stateMsg({ display_states: { bulb: "Highlighted" } }), seq: null });
    graph.update(vm);
    expect(graph.shellMaterial("bulb")?.color.getHex()).toBe(DISPLAY_TINTS.Highlighted);

    vm.applyFrame({ state: stateMsg({ display_states: { bulb: "Selected" } }), seq: null });
    graph.update(vm);
    expect(graph.shellMaterial("bulb")?.color.getHex()).toBe(DISPLAY_TINTS.Selected);
  });
});

describe("gizmo", () => {
  it("is hidden without a handle layout and shown with one", () => {
    const graph = createSceneGraph();
    const vm = new ViewModel();
    vm.applyFrame({ state: stateMsg(), seq: null });
    graph.update(vm);
    expect(graph.gizmoVisible()).toBe(false);

    vm.applyFrame({ state: stateMsg({ handle_layout: LAYOUT }), seq: null });
    graph.update(vm);
    expect(graph.gizmoVisible()).toBe(true);

    vm.applyFrame({ state: stateMsg(), seq: null });
    graph.update(vm);
    expect(graph.gizmoVisible()).toBe(false);
  });

  it("pickHandle hits the axis boxes and the center sphere", () => {
    const graph = createSceneGraph();
    const vm = new ViewModel();
    vm.applyFrame({ state: stateMsg({ handle_layout: LAYOUT }), seq: null });
    graph.update(vm);

    const hitX = graph.pickHandle(ndcOfWorld(graph, new THREE.Vector3(1, 1, 0)));
    expect(hitX?.part).toBe("x");
    expect(hitX?.axis?.toArray()).toEqual([1, 0, 0]);
    expect(hitX?.center.toArray()).toEqual([1, 1, 0]);

    const hitCenter = graph.pickHandle(ndcOfWorld(graph, new THREE.Vector3(0, 1, 0)));
    expect(hitCenter?.part).toBe("center");
    expect(hitCenter?.axis).toBeNull();

    const miss = graph.pickHandle(new THREE.Vector2(0.95, 0.95));
    expect(miss).toBeNull();
  });
});

describe("working plane", () => {
  it("projects rays onto the plane at the configured depth", () => {
    const graph = createSceneGraph();
    const target = new THREE.Vector3(0.4, 1.2, 0);
    const point = graph.pointOnWorkingPlane(ndcOfWorld(graph, target));
    expect(point).not.toBeNull();
    expect(point!.distanceTo(target)).toBeLessThan(1e-6);

    graph.setWorkingDepth(1.5);
    expect(graph.getWorkingDepth()).toBe(1.5);
    const deep = graph.pointOnWorkingPlane(new THREE.Vector2(0, 0));
    expect(deep!.z).toBeCloseTo(1.5, 10);
  });
});
