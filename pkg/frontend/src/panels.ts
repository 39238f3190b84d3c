import type { TreeNodeMsg } from "./protocol";
import type { ViewModel } from "./viewmodel";

export interface PanelHandlers {
  onVoice(utterance: string): void;
  onTreeNode(nodeId: string): void;
  onReleaseTree(): void;
  onPalmToggle(show: boolean): void;
  onResolution(resolution: number): void;
}

export interface Panels {
  root: HTMLElement;
  infoBoard: HTMLElement;
  treePanel: HTMLElement;
  commandInput: HTMLInputElement;
  banner: HTMLElement;
  treeToggle: HTMLButtonElement;
  update(vm: ViewModel): void;
}

const RESOLUTIONS = [16, 24, 32, 48, 64, 96, 128];

export function createPanels(doc: Document, handlers: PanelHandlers): Panels {
  const root = doc.createElement("div");
  root.className = "panels";

  const banner = doc.createElement("div");
  banner.className = "banner";
  banner.textContent = "connecting…";
  root.appendChild(banner);

  const toolbar = doc.createElement("div");
  toolbar.className = "toolbar";
  const treeToggle = doc.createElement("button");
  treeToggle.className = "tree-toggle";
  treeToggle.textContent = "show tree";
  toolbar.appendChild(treeToggle);
  const resolutionSelect = doc.createElement("select");
  resolutionSelect.className = "resolution";
  for (const r of RESOLUTIONS) {
    const option = doc.createElement("option");
    option.value = String(r);
    option.textContent = `mesh ${r}`;
    resolutionSelect.appendChild(option);
  }
  resolutionSelect.addEventListener("change", () => {
    handlers.onResolution(Number(resolutionSelect.value));
  });
  toolbar.appendChild(resolutionSelect);
  root.appendChild(toolbar);

  const infoBoard = doc.createElement("div");
  infoBoard.className = "info-board";
  root.appendChild(infoBoard);

  const treePanel = doc.createElement("div");
  treePanel.className = "tree-panel";
  treePanel.hidden = true;
  root.appendChild(treePanel);

  const commandRow = doc.createElement("div");
  commandRow.className = "command-row";
  const commandInput = doc.createElement("input");
  commandInput.className = "command-input";
  commandInput.placeholder = "voice command, e.g. select";
  commandInput.addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key !== "Enter") return;
    handlers.onVoice(commandInput.value);
    commandInput.value = "";
  });
  commandRow.appendChild(commandInput);
  root.appendChild(commandRow);

  let treeVisible = false;
  treeToggle.addEventListener("click", () => handlers.onPalmToggle(!treeVisible));

  function renderInfoBoard(vm: ViewModel): void {
    const board = vm.state?.info_board;
    if (!board) {
      infoBoard.textContent = "";
      return;
    }
    const transform = board.active_transform ? ` · ${board.active_transform}` : "";
    const commands = board.commands
      .map(([utterance, description]) => `<tr><td>${utterance}</td><td>${description}</td></tr>`)
      .join("");
    infoBoard.innerHTML =
      `<div class="mode-line">${board.mode_text}${transform}</div>` +
      `<table class="commands">${commands}</table>`;
  }

  function renderTreeNode(node: TreeNodeMsg, byId: Map<string, TreeNodeMsg>): string {
    const classes = ["node"];
    if (node.grabbed) classes.push("grabbed");
    if (node.highlighted) classes.push("highlighted");
    const label = node.label ? `${node.id} “${node.label}”` : node.id;
    const text = node.kind === "leaf" ? label : `${node.kind} ${node.id}`;
    const children = node.children
      .map((cid) => byId.get(cid))
      .filter((c): c is TreeNodeMsg => c !== undefined)
      .map((c) => renderTreeNode(c, byId))
      .join("");
    return (
      `<li><span class="${classes.join(" ")}" data-node="${node.id}">${text}</span>` +
      (children ? `<ul>${children}</ul>` : "") +
      `</li>`
    );
  }

  function renderTree(vm: ViewModel): void {
    const state = vm.state;
    treePanel.hidden = !(state?.tree_visible ?? false);
    treeVisible = state?.tree_visible ?? false;
    treeToggle.textContent = treeVisible ? "hide tree" : "show tree";
    if (!state || treePanel.hidden) return;
    const byId = new Map(state.tree.map((n) => [n.id, n]));
    const roots = state.tree.filter((n) => n.parent === null);
    treePanel.innerHTML = `<ul class="tree">${roots.map((n) => renderTreeNode(n, byId)).join("")}</ul>`;
    for (const span of Array.from(treePanel.querySelectorAll("[data-node]"))) {
      span.addEventListener("click", () => {
        const id = (span as HTMLElement).dataset.node!;
        const node = byId.get(id);
        if (node?.grabbed) handlers.onReleaseTree();
        else handlers.onTreeNode(id);
      });
    }
  }

  let seenVersion = -1;
  return {
    root,
    infoBoard,
    treePanel,
    commandInput,
    banner,
    treeToggle,
    update(vm: ViewModel): void {
      if (vm.stateVersion === seenVersion) return;
      seenVersion = vm.stateVersion;
      banner.hidden = vm.status === "open";
      banner.textContent = vm.status === "closed" ? "connection lost — input disabled" : "connecting…";
      commandInput.disabled = !vm.inputEnabled();
      renderInfoBoard(vm);
      renderTree(vm);
    },
  };
}
