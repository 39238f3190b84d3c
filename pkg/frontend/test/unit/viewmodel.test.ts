import { describe, expect, it } from "vitest";
import { DISPLAY_TINTS, ViewModel } from "../../src/viewmodel";
import { meshMsg, stateMsg } from "./mock";

describe("ViewModel.applyFrame", () => {
  it("applies state frames and bumps the version", () => {
    const vm = new ViewModel();
    vm.applyFrame({ state: stateMsg({ mode: "Selection" }), seq: null });
    expect(vm.state?.mode).toBe("Selection");
    expect(vm.stateVersion).toBe(1);
  });

  it("clears the pending seq when the echo arrives", () => {
    const vm = new ViewModel();
    vm.pendingSeq = 7;
    vm.applyFrame({ state: stateMsg(), seq: 6 });
    expect(vm.pendingSeq).toBe(7);
    vm.applyFrame({ state: stateMsg(), seq: 7 });
    expect(vm.pendingSeq).toBeNull();
  });

  it("accumulates effects", () => {
    const vm = new ViewModel();
    vm.applyFrame({ effects: ["ModeChanged(Selection)"], seq: 1 });
    vm.applyFrame({ effects: ["HighlightChanged"], seq: null });
    expect(vm.effectLog).toEqual(["ModeChanged(Selection)", "HighlightChanged"]);
  });

  it("applies meshes in seq order and discards stale pushes", () => {
    const vm = new ViewModel();
    vm.applyFrame({ mesh: meshMsg({ resolution: 16 }), seq: null }); // bootstrap
    vm.applyFrame({ mesh: meshMsg({ resolution: 48 }), seq: 5 });
    expect(vm.mesh?.resolution).toBe(48);
    expect(vm.meshVersion).toBe(2);
    // a slower recompute for an older event must not win
    vm.applyFrame({ mesh: meshMsg({ resolution: 32 }), seq: 3 });
    expect(vm.mesh?.resolution).toBe(48);
    expect(vm.meshVersion).toBe(2);
    vm.applyFrame({ mesh: meshMsg({ resolution: 64 }), seq: 6 });
    expect(vm.mesh?.resolution).toBe(64);
    expect(vm.meshVersion).toBe(3);
  });

  it("records errors and clears the matching pending seq", () => {
    const vm = new ViewModel();
    vm.pendingSeq = 2;
    vm.applyFrame({ error: { code: "bad_event", message: "nope" }, seq: 2 });
    expect(vm.lastError?.code).toBe("bad_event");
    expect(vm.pendingSeq).toBeNull();
  });
});

describe("display tints", () => {
  it("maps every display state to its color", () => {
    const vm = new ViewModel();
    vm.applyFrame({
      state: stateMsg({
        display_states: { a: "Default", b: "Highlighted", c: "Selected", d: "Grouped" },
      }),
      seq: null,
    });
    expect(vm.tintOf("a")).toBe(DISPLAY_TINTS.Default);
    expect(vm.tintOf("b")).toBe(DISPLAY_TINTS.Highlighted);
    expect(vm.tintOf("c")).toBe(DISPLAY_TINTS.Selected);
    expect(vm.tintOf("d")).toBe(DISPLAY_TINTS.Grouped);
    expect(vm.tintOf("missing")).toBe(DISPLAY_TINTS.Default);
  });
});

describe("connection status", () => {
  it("gates input on an open socket", () => {
    const vm = new ViewModel();
    expect(vm.inputEnabled()).toBe(false);
    vm.setStatus("open");
    expect(vm.inputEnabled()).toBe(true);
    vm.setStatus("closed");
    expect(vm.inputEnabled()).toBe(false);
  });
});
