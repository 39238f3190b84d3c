import type { DisplayState, ErrorMsg, MeshMsg, ServerFrame, SessionStateMsg } from "./protocol";

export type ConnectionStatus = "connecting" | "open" | "closed";

// State colors: grey default, green highlighted, red selected, blue grouped.
export const DISPLAY_TINTS: Record<DisplayState, number> = {
  Default: 0x9e9e9e,
  Highlighted: 0x43a047,
  Selected: 0xe53935,
  Grouped: 0x1e88e5,
};

/** Client-side mirror of the session. The server is authoritative: nothing
 * here is written by input handlers, only by received frames. Version
 * counters let the renderer re-upload buffers exactly once per change. */
export class ViewModel {
  state: SessionStateMsg | null = null;
  mesh: MeshMsg | null = null;
  status: ConnectionStatus = "connecting";
  lastError: ErrorMsg | null = null;
  effectLog: string[] = [];
  pendingSeq: number | null = null;
  stateVersion = 0;
  meshVersion = 0;
  private lastMeshSeq: number | null = null;

  applyFrame(frame: ServerFrame): void {
    if ("state" in frame) {
      this.state = frame.state;
      this.stateVersion += 1;
      if (frame.seq !== null && frame.seq === this.pendingSeq) this.pendingSeq = null;
      return;
    }
    if ("effects" in frame) {
      this.effectLog.push(...frame.effects);
      return;
    }
    if ("mesh" in frame) {
      // Mesh frames are tagged with the event seq they reflect; a slow
      // recompute must not overwrite a fresher one.
      if (frame.seq !== null && this.lastMeshSeq !== null && frame.seq < this.lastMeshSeq) return;
      if (frame.seq !== null) this.lastMeshSeq = frame.seq;
      this.mesh = frame.mesh;
      this.meshVersion += 1;
      return;
    }
    this.lastError = frame.error;
    if (frame.seq !== null && frame.seq === this.pendingSeq) this.pendingSeq = null;
  }

  setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.stateVersion += 1;
  }

  displayStateOf(primitiveId: string): DisplayState {
    return this.state?.display_states[primitiveId] ?? "Default";
  }

  tintOf(primitiveId: string): number {
    return DISPLAY_TINTS[this.displayStateOf(primitiveId)];
  }

  /** Input is disabled unless the socket is open (lost connection shows a
   * banner and the UI goes inert). */
  inputEnabled(): boolean {
    return this.status === "open";
  }
}
