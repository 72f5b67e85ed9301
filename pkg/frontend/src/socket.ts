/** WebSocket client for /ws: latest-state-wins coalescing plus reconnect.
 *
 * State frames overwrite `latest`; the render loop samples it once per
 * animation frame, so a burst of frames costs one redraw.  On reconnect
 * the `onReopen` hook lets the app restore configuration from the GET
 * endpoints (frames only carry live state, not the hand document).
 */

import { SCHEMA_VERSION, ServerFrame, StateFrame } from "./types.js";

const BACKOFF_START_MS = 250;
const BACKOFF_MAX_MS = 4000;

export class StateSocket {
  /** newest state frame; consumed (set to null) by the render loop */
  latest: StateFrame | null = null;
  /** total state frames received, for the frame-rate meter */
  frames = 0;
  connected = false;

  onReopen: ((wasEverOpen: boolean) => void) | null = null;
  onErrorFrame: ((detail: string) => void) | null = null;

  private ws: WebSocket | null = null;
  private backoff = BACKOFF_START_MS;
  private wasEverOpen = false;
  private closedByUs = false;

  connect(): void {
    this.closedByUs = false;
    const proto = location.protocol === "https:" ? "wss:" : "ws:";
    const ws = new WebSocket(`${proto}//${location.host}/ws`);
    this.ws = ws;

    ws.onopen = () => {
      this.connected = true;
      this.backoff = BACKOFF_START_MS;
      const reopen = this.wasEverOpen;
      this.wasEverOpen = true;
      this.onReopen?.(reopen);
    };
    ws.onmessage = (ev) => {
      let frame: ServerFrame;
      try {
        frame = JSON.parse(String(ev.data));
      } catch {
        return;
      }
      if (frame.type === "state") {
        this.latest = frame;
        this.frames += 1;
      } else if (frame.type === "error") {
        this.onErrorFrame?.(frame.detail);
      }
    };
    ws.onclose = () => {
      this.connected = false;
      this.ws = null;
      if (this.closedByUs) return;
      setTimeout(() => this.connect(), this.backoff);
      this.backoff = Math.min(this.backoff * 2, BACKOFF_MAX_MS);
    };
    ws.onerror = () => ws.close();
  }

  close(): void {
    this.closedByUs = true;
    this.ws?.close();
  }

  /** Send one command frame; returns false when the socket is not open. */
  send(msg: Record<string, unknown>): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(JSON.stringify({ schema_version: SCHEMA_VERSION, ...msg }));
    return true;
  }

  sendTargets(targets: number[][]): boolean {
    return this.send({ type: "targets", targets });
  }

  sendMapping(mapping: string): boolean {
    return this.send({ type: "mapping", mapping });
  }

  sendSynergy(topology: string | Record<string, unknown>): boolean {
    return this.send({ type: "synergy", topology });
  }

  sendTeleopSample(sample: Record<string, unknown>): boolean {
    return this.send({ type: "teleop_sample", sample });
  }
}
