import { SessionClient, type SocketFactory } from "./client";
import { attachGestures, type GestureController } from "./gestures";
import { createPanels, type Panels } from "./panels";
import { createSceneGraph, type SceneGraph } from "./scenegraph";
import type { ServerFrame } from "./protocol";
import { ViewModel } from "./viewmodel";

export interface StudioOptions {
  /** Host element; gets the viewport mount and the side panels. */
  container: HTMLElement;
  /** HOST:PORT of the session service. */
  server: string;
  /** Mesh resolution to request once connected (service default if absent). */
  resolution?: number;
  socketFactory?: SocketFactory;
  onFrame?: (frame: ServerFrame) => void;
}

export interface StudioApp {
  vm: ViewModel;
  client: SessionClient;
  graph: SceneGraph;
  panels: Panels;
  gestures: GestureController;
  viewport: HTMLElement;
  /** One step of the render loop: flush pending view-model changes into
   * the DOM panels and the three.js scene. Network callbacks only touch
   * the view model; all visible mutation happens here. */
  tick(): void;
  dispose(): void;
}

export function createStudioApp(opts: StudioOptions): StudioApp {
  const doc = opts.container.ownerDocument;
  const vm = new ViewModel();
  const graph = createSceneGraph();

  const viewport = doc.createElement("div");
  viewport.className = "viewport";
  opts.container.appendChild(viewport);

  const client = new SessionClient(
    `ws://${opts.server}/ws`,
    vm,
    {
      onFrame: (frame) => {
        // first mesh establishes the server's resolution; switch to the
        // requested one if it differs
        if ("mesh" in frame && wantedResolution !== null) {
          const want = wantedResolution;
          wantedResolution = null;
          if (frame.mesh.resolution !== want) client.requestMesh(want);
        }
        opts.onFrame?.(frame);
      },
    },
    opts.socketFactory,
  );
  let wantedResolution: number | null = opts.resolution ?? null;

  const panels = createPanels(doc, {
    onVoice: (utterance) => {
      if (vm.inputEnabled()) client.sendEvent({ voice: utterance });
    },
    onTreeNode: (nodeId) => {
      if (vm.inputEnabled()) client.sendEvent({ grab_tree: nodeId });
    },
    onReleaseTree: () => {
      if (vm.inputEnabled()) client.sendEvent({ release_tree: true });
    },
    onPalmToggle: (show) => {
      if (vm.inputEnabled()) client.sendEvent({ palm_up: show });
    },
    onResolution: (resolution) => {
      if (vm.inputEnabled()) client.requestMesh(resolution);
    },
  });
  opts.container.appendChild(panels.root);

  const gestures = attachGestures({
    element: viewport,
    graph,
    send: (payload) => client.sendEvent(payload),
    enabled: () => vm.inputEnabled(),
  });

  return {
    vm,
    client,
    graph,
    panels,
    gestures,
    viewport,
    tick(): void {
      panels.update(vm);
      graph.update(vm);
    },
    dispose(): void {
      gestures.detach();
      client.close();
      opts.container.removeChild(viewport);
      opts.container.removeChild(panels.root);
    },
  };
}
