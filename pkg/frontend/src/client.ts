import type { ClientFrame, EventPayload, ServerFrame } from "./protocol";
import { parseServerFrame, validateClientFrame } from "./protocol";
import type { ViewModel } from "./viewmodel";

/** The subset of the browser WebSocket API the client uses; the `ws`
 * package implements the same surface, so tests can run under node. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientCallbacks {
  onFrame?: (frame: ServerFrame) => void;
  onStatus?: (status: "open" | "closed") => void;
}

export class SessionClient {
  private sock: SocketLike;
  private seq = 0;
  private meshRequestInFlight: number | null = null;
  private wantedResolution: number | null = null;

  constructor(
    url: string,
    private vm: ViewModel,
    private cbs: ClientCallbacks = {},
    factory?: SocketFactory,
  ) {
    const make = factory ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.sock = make(url);
    this.sock.onopen = () => {
      vm.setStatus("open");
      this.cbs.onStatus?.("open");
    };
    this.sock.onclose = () => {
      vm.setStatus("closed");
      this.cbs.onStatus?.("closed");
    };
    this.sock.onerror = () => {
      // onclose follows; nothing to do here
    };
    this.sock.onmessage = (ev) => {
      const text = typeof ev.data === "string" ? ev.data : String(ev.data);
      let frame: ServerFrame;
      try {
        frame = parseServerFrame(text);
      } catch (err) {
        console.error("dropping unparseable server frame:", err);
        return;
      }
      if ("mesh" in frame && this.meshRequestInFlight !== null && frame.seq !== null && frame.seq >= this.meshRequestInFlight) {
        this.meshRequestInFlight = null;
      }
      this.vm.applyFrame(frame);
      this.cbs.onFrame?.(frame);
      if (this.meshRequestInFlight === null && this.wantedResolution !== null) {
        const next = this.wantedResolution;
        this.wantedResolution = null;
        this.requestMesh(next);
      }
    };
  }

  private send(frame: ClientFrame): number {
    const seq = ++this.seq;
    const stamped = { ...frame, seq };
    validateClientFrame(stamped);
    this.sock.send(JSON.stringify(stamped));
    this.vm.pendingSeq = seq;
    return seq;
  }

  sendEvent(payload: EventPayload): number {
    return this.send({ event: payload });
  }

  loadScene(doc: unknown): number {
    return this.send({ load_scene: doc });
  }

  /** At most one mesh request is in flight; a change made while one is
   * pending is remembered and sent when the reply lands. */
  requestMesh(resolution: number): void {
    if (this.meshRequestInFlight !== null) {
      this.wantedResolution = resolution;
      return;
    }
    this.meshRequestInFlight = this.send({ request_mesh: { resolution } });
  }

  close(): void {
    this.sock.close();
  }
}
