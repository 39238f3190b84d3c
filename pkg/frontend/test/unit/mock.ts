import type { SocketLike } from "../../src/client";
import type { MeshMsg, SessionStateMsg } from "../../src/protocol";

/** In-memory stand-in for the service socket: captures what the UI sends
 * and lets a test inject server frames. */
export class MockSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.({});
  }

  open(): void {
    this.onopen?.({});
  }

  receive(frame: unknown): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }

  sentFrames(): unknown[] {
    return this.sent.map((s) => JSON.parse(s));
  }
}

export function stateMsg(overrides: Partial<SessionStateMsg> = {}): SessionStateMsg {
  return {
    mode: "Idle",
    display_states: {},
    handle_layout: null,
    info_board: { mode_text: "Idle", active_transform: null, commands: [["select", "enter selection mode"]] },
    tree: [],
    tree_visible: false,
    selected: [],
    highlighted: [],
    groups: [],
    hand_pos: [0, 0, 0],
    grabbing: false,
    ...overrides,
  };
}

export function meshMsg(overrides: Partial<MeshMsg> = {}): MeshMsg {
  return {
    combined: {
      vertices: [
        [0, 0, 0],
        [1, 0, 0],
        [0, 1, 0],
      ],
      triangles: [[0, 1, 2]],
    },
    shells: {},
    resolution: 16,
    ...overrides,
  };
}
