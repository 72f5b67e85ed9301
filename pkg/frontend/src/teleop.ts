/** Teleop panel: top-view (XY) canvas of the live hand.
 *
 * Workspace outlines and home markers come from the GET endpoints;
 * fingertips, residuals, and tracking errors come from /ws state frames.
 * Dragging a fingertip sends `targets` frames (raw, unclamped — the
 * service clamps and the tracking-error badge shows by how much); the
 * aperture slider and twist dial synthesize operator samples that drive
 * the polar mapping via `teleop_sample` frames.
 */

import { el, fmt, slider, Slider } from "./dom.js";
import { fingerColor, Store } from "./store.js";
import { StateSocket } from "./socket.js";

/** Calibration defaults of the live session (documented wire contract):
 * aperture range 20..120 mm between the left digits; the right index
 * sits 60 mm from the wrist, azimuth 0 at neutral. */
const APERTURE_MIN = 20;
const APERTURE_MAX = 120;
const RIGHT_INDEX_RADIUS = 60;

const HIT_RADIUS_PX = 16;

interface DragState {
  finger: number;
  /** all fingertip positions captured at drag start; others stay pinned */
  pinned: number[][];
  /** world-z of the dragged tip, kept constant through the drag */
  z: number;
  /** newest requested world XY, sent at most once per animation frame */
  target: [number, number] | null;
  sent: boolean;
}

export class TeleopPanel {
  private canvas: HTMLCanvasElement;
  private badges: HTMLElement;
  private badgeChips: HTMLElement[] = [];
  private mappingSelect: HTMLSelectElement;
  private aperture: Slider;
  private twist: Slider;
  private drag: DragState | null = null;
  private polarDirty = false;
  private lastTeleopT = 0;
  private view = { scale: 3, cx: 0, cy: 0 };
  private lastWorkspaceRev = -1;

  constructor(
    root: HTMLElement,
    private store: Store,
    private socket: StateSocket,
  ) {
    this.canvas = el("canvas", { class: "teleop-canvas", width: "560", height: "560" });
    this.badges = el("div", { class: "badge-row" });

    this.mappingSelect = el("select", {});
    for (const name of ["direct", "principal", "polar"])
      this.mappingSelect.append(el("option", { value: name, text: name }));
    this.mappingSelect.addEventListener("change", () => {
      this.socket.sendMapping(this.mappingSelect.value);
    });

    const markPolar = () => {
      this.polarDirty = true;
    };
    this.aperture = slider(
      { label: "aperture", min: 0, max: 100, step: 1, value: 50, unit: "%" },
      markPolar,
    );
    this.twist = slider(
      { label: "twist", min: -180, max: 180, step: 1, value: 0, unit: "°" },
      markPolar,
    );

    root.append(
      this.canvas,
      this.badges,
      el(
        "div",
        { class: "row" },
        el("label", { class: "inline", text: "mapping " }, this.mappingSelect),
      ),
      el("div", { class: "slider-grid" }, this.aperture.row, this.twist.row),
      el("div", {
        class: "hint",
        text:
          "drag a fingertip to retarget it; badges show raw-request vs realized " +
          "error (and post-clamp residual) per finger. The aperture/twist " +
          "controls steer all fingers through the polar mapping.",
      }),
    );

    this.canvas.addEventListener("pointerdown", (ev) => this.onDown(ev));
    this.canvas.addEventListener("pointermove", (ev) => this.onMove(ev));
    const end = () => {
      this.drag = null;
    };
    this.canvas.addEventListener("pointerup", end);
    this.canvas.addEventListener("pointerleave", end);
  }

  // ------------------------------------------------- coordinate mapping

  private fitViewport(): void {
    const ws = this.store.workspace ?? null;
    const summary = this.store.hand?.workspace_summary ?? null;
    const lo = ws?.bbox_min ?? summary?.bbox_min;
    const hi = ws?.bbox_max ?? summary?.bbox_max;
    if (!lo || !hi) return;
    const spanX = Math.max(hi[0] - lo[0], 1);
    const spanY = Math.max(hi[1] - lo[1], 1);
    const pad = 1.35; // room for out-of-hull drags
    this.view.scale = Math.min(
      this.canvas.width / (spanX * pad),
      this.canvas.height / (spanY * pad),
    );
    this.view.cx = (lo[0] + hi[0]) / 2;
    this.view.cy = (lo[1] + hi[1]) / 2;
  }

  private toScreen(x: number, y: number): [number, number] {
    return [
      this.canvas.width / 2 + (x - this.view.cx) * this.view.scale,
      this.canvas.height / 2 - (y - this.view.cy) * this.view.scale,
    ];
  }

  private toWorld(sx: number, sy: number): [number, number] {
    return [
      this.view.cx + (sx - this.canvas.width / 2) / this.view.scale,
      this.view.cy - (sy - this.canvas.height / 2) / this.view.scale,
    ];
  }

  private pointerPos(ev: PointerEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [
      ((ev.clientX - rect.left) / rect.width) * this.canvas.width,
      ((ev.clientY - rect.top) / rect.height) * this.canvas.height,
    ];
  }

  // ------------------------------------------------------------ dragging

  private onDown(ev: PointerEvent): void {
    const state = this.store.state;
    if (!state) return;
    const [sx, sy] = this.pointerPos(ev);
    let best = -1;
    let bestD = HIT_RADIUS_PX;
    state.fingertips.forEach((tip, k) => {
      const [tx, ty] = this.toScreen(tip[0], tip[1]);
      const d = Math.hypot(tx - sx, ty - sy);
      if (d < bestD) {
        bestD = d;
        best = k;
      }
    });
    if (best < 0) return;
    this.canvas.setPointerCapture(ev.pointerId);
    this.drag = {
      finger: best,
      pinned: state.fingertips.map((t) => [...t]),
      z: state.fingertips[best][2],
      target: null,
      sent: true,
    };
  }

  private onMove(ev: PointerEvent): void {
    if (!this.drag) return;
    const [sx, sy] = this.pointerPos(ev);
    this.drag.target = this.toWorld(sx, sy);
    this.drag.sent = false;
  }

  /** Outbound work, called once per animation frame: coalesces pointer
   * moves into at most one targets frame and slider wiggles into at most
   * one teleop_sample frame. */
  flush(): void {
    const drag = this.drag;
    if (drag && drag.target && !drag.sent) {
      const targets = drag.pinned.map((t) => [...t]);
      targets[drag.finger] = [drag.target[0], drag.target[1], drag.z];
      if (this.socket.sendTargets(targets)) drag.sent = true;
    }
    if (this.polarDirty) {
      if (this.store.state && this.store.state.mapping !== "polar") {
        this.socket.sendMapping("polar");
        this.mappingSelect.value = "polar";
      }
      if (this.socket.sendTeleopSample(this.polarSample())) this.polarDirty = false;
    }
  }

  /** Operator sample whose aperture/azimuth encode the slider values. */
  private polarSample(): Record<string, unknown> {
    const ap =
      APERTURE_MIN + (this.aperture.get() / 100) * (APERTURE_MAX - APERTURE_MIN);
    const theta = (this.twist.get() * Math.PI) / 180;
    this.lastTeleopT = Math.max(Date.now() / 1000, this.lastTeleopT + 1e-3);
    return {
      t: this.lastTeleopT,
      wrist: [0, 0, 0],
      left_thumb: [-ap / 2, 0, 0],
      left_index: [ap / 2, 0, 0],
      right_thumb: [0, -30, 0],
      right_index: [
        RIGHT_INDEX_RADIUS * Math.cos(theta),
        RIGHT_INDEX_RADIUS * Math.sin(theta),
        0,
      ],
    };
  }

  // ------------------------------------------------------------- drawing

  draw(): void {
    if (this.store.workspaceRev !== this.lastWorkspaceRev) {
      this.lastWorkspaceRev = this.store.workspaceRev;
      this.fitViewport();
    }
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    // axes through the hand origin
    ctx.strokeStyle = "#21262d";
    ctx.lineWidth = 1;
    const [ox, oy] = this.toScreen(0, 0);
    ctx.beginPath();
    ctx.moveTo(0, oy);
    ctx.lineTo(width, oy);
    ctx.moveTo(ox, 0);
    ctx.lineTo(ox, height);
    ctx.stroke();

    // workspace outlines
    this.store.hulls.forEach((hull, k) => {
      if (hull.length < 3) return;
      ctx.beginPath();
      hull.forEach(([x, y], i) => {
        const [sx, sy] = this.toScreen(x, y);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.closePath();
      ctx.fillStyle = fingerColor(k);
      ctx.globalAlpha = 0.07;
      ctx.fill();
      ctx.globalAlpha = 0.55;
      ctx.strokeStyle = fingerColor(k);
      ctx.stroke();
      ctx.globalAlpha = 1;
    });

    // home markers
    const home = this.store.homeTips;
    if (home) {
      home.forEach((tip, k) => {
        const [sx, sy] = this.toScreen(tip[0], tip[1]);
        ctx.beginPath();
        ctx.arc(sx, sy, 4, 0, 2 * Math.PI);
        ctx.strokeStyle = fingerColor(k);
        ctx.globalAlpha = 0.7;
        ctx.stroke();
        ctx.globalAlpha = 1;
      });
    }

    // drag ghost
    const drag = this.drag;
    const state = this.store.state;
    if (drag && drag.target && state) {
      const [gx, gy] = this.toScreen(drag.target[0], drag.target[1]);
      const tip = state.fingertips[drag.finger];
      const [tx, ty] = this.toScreen(tip[0], tip[1]);
      ctx.setLineDash([4, 4]);
      ctx.strokeStyle = "#8b949e";
      ctx.beginPath();
      ctx.moveTo(tx, ty);
      ctx.lineTo(gx, gy);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.beginPath();
      ctx.moveTo(gx - 6, gy);
      ctx.lineTo(gx + 6, gy);
      ctx.moveTo(gx, gy - 6);
      ctx.lineTo(gx, gy + 6);
      ctx.stroke();
    }

    // live fingertips
    if (state) {
      ctx.font = "11px system-ui, sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      state.fingertips.forEach((tip, k) => {
        const [sx, sy] = this.toScreen(tip[0], tip[1]);
        ctx.beginPath();
        ctx.arc(sx, sy, 7, 0, 2 * Math.PI);
        ctx.fillStyle = fingerColor(k);
        ctx.fill();
        ctx.fillStyle = "#0d1117";
        ctx.fillText(String(k), sx, sy);
      });
      this.updateBadges(state.tracking_error, state.residuals);
      if (!this.mappingSelect.matches(":focus") && this.mappingSelect.value !== state.mapping)
        this.mappingSelect.value = state.mapping;
    }
  }

  private updateBadges(tracking: number[], residuals: number[]): void {
    if (this.badgeChips.length !== tracking.length) {
      this.badges.replaceChildren();
      this.badgeChips = tracking.map((_, k) => {
        const chip = el("span", { class: "badge" });
        chip.style.borderColor = fingerColor(k);
        this.badges.append(chip);
        return chip;
      });
    }
    tracking.forEach((err, k) => {
      const chip = this.badgeChips[k];
      chip.textContent = `F${k} ${fmt(err, 2)}`;
      chip.title =
        `finger ${k}: raw request vs realized tip ${fmt(err, 3)} mm · ` +
        `post-clamp residual ${fmt(residuals[k], 3)} mm`;
      chip.className = "badge " + (err < 0.5 ? "ok" : err < 5 ? "warn" : "bad");
      chip.style.borderColor = fingerColor(k);
    });
  }
}
