/** Designer panel: sliders for the seven hand parameters.  Every change
 * is PUT to the service (debounced); the returned hand document and a
 * fresh workspace sweep re-render the overlay.  Validation errors from
 * the server appear inline and leave the live configuration untouched.
 */

import { api, ApiError } from "./api.js";
import { button, el, fmt, slider, Slider } from "./dom.js";
import { Store } from "./store.js";
import { UrlConfig } from "./urlconfig.js";
import { HandDoc, HandParamsDoc } from "./types.js";

const DEG = Math.PI / 180;
const DEBOUNCE_MS = 180;

export class DesignerPanel {
  private sliders: Record<string, Slider>;
  private errorBox: HTMLElement;
  private statsBox: HTMLElement;
  private timer: number | null = null;
  private inFlight = false;
  private lastSeenRev = -1;

  constructor(
    root: HTMLElement,
    private store: Store,
    private cfg: UrlConfig,
  ) {
    const queue = () => this.queuePush();
    this.sliders = {
      n: slider({ label: "fingers N", min: 2, max: 6, step: 1, value: 4, unit: "" }, queue),
      db: slider({ label: "base D_b", min: 10, max: 40, step: 0.5, value: 20, unit: "mm" }, queue),
      de: slider({ label: "effector D_e", min: 2, max: 15, step: 0.5, value: 6, unit: "mm" }, queue),
      dl: slider({ label: "link D_l", min: 25, max: 80, step: 0.5, value: 45, unit: "mm" }, queue),
      stroke: slider({ label: "stroke", min: 5, max: 40, step: 1, value: 20, unit: "mm" }, queue),
      ac: slider({ label: "coupling A_c", min: 5, max: 60, step: 0.5, value: 20, unit: "mm" }, queue),
      ad: slider({ label: "finger slot A_d", min: 20, max: 180, step: 1, value: 90, unit: "°" }, queue),
    };
    this.errorBox = el("div", { class: "error-box hidden" });
    this.statsBox = el("div", { class: "stats" });

    const rows = el("div", { class: "slider-grid" });
    for (const s of Object.values(this.sliders)) rows.append(s.row);

    root.append(
      rows,
      el(
        "div",
        { class: "row" },
        button("export URDF", () => this.exportUrdf(), "ghost"),
        this.statsBox,
      ),
      this.errorBox,
    );
  }

  /** Called from the render loop: re-sync sliders after external changes. */
  onFrame(): void {
    if (this.store.handRev === this.lastSeenRev) return;
    if (this.timer !== null || this.inFlight) return; // user edit pending
    this.lastSeenRev = this.store.handRev;
    const doc = this.store.hand;
    if (doc) this.syncFrom(doc);
  }

  private syncFrom(doc: HandDoc): void {
    const p = doc.hand_params;
    const g = p.fingers[0];
    this.sliders.n.set(p.n_fingers);
    this.sliders.db.set(g.base_radius);
    this.sliders.de.set(g.ee_radius);
    this.sliders.dl.set(g.link_length);
    this.sliders.stroke.set(g.stroke);
    this.sliders.ac.set(p.coupling_link_length);
    this.sliders.ad.set(Math.round(p.fingertip_angle / DEG));
    const ws = doc.workspace_summary;
    this.statsBox.textContent =
      `workspace ${fmt(ws.extents[0], 1)} × ${fmt(ws.extents[1], 1)} × ` +
      `${fmt(ws.extents[2], 1)} mm`;
  }

  private buildParams(): HandParamsDoc {
    const cur = this.store.hand?.hand_params ?? null;
    const n = this.sliders.n.get();
    const geom = (k: number) => ({
      base_radius: this.sliders.db.get(),
      ee_radius: this.sliders.de.get(),
      link_length: this.sliders.dl.get(),
      stroke: this.sliders.stroke.get(),
      rail_angles:
        cur && cur.fingers.length === n
          ? [...cur.fingers[k].rail_angles]
          : [...(cur?.fingers[0].rail_angles ?? [0, (2 * Math.PI) / 3, (4 * Math.PI) / 3])],
    });
    const offset = (k: number) =>
      cur && cur.fingertip_offset.length === n
        ? [...cur.fingertip_offset[k]]
        : [...(cur?.fingertip_offset[0] ?? [0, 0, -15])];
    return {
      n_fingers: n,
      coupling_link_length: this.sliders.ac.get(),
      fingertip_angle: this.sliders.ad.get() * DEG,
      actuation_height: cur?.actuation_height ?? 0,
      fingers: Array.from({ length: n }, (_, k) => geom(k)),
      fingertip_offset: Array.from({ length: n }, (_, k) => offset(k)),
    };
  }

  private queuePush(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.push();
    }, DEBOUNCE_MS);
  }

  private async push(): Promise<void> {
    if (this.inFlight) {
      this.queuePush(); // try again once the current round trip lands
      return;
    }
    this.inFlight = true;
    const t0 = performance.now();
    try {
      const doc = await api.putHand({ hand_params: this.buildParams() });
      const ws = await api.getWorkspace(this.cfg.res);
      const ms = performance.now() - t0;
      this.store.setHand(doc);
      this.store.setWorkspace(ws);
      this.lastSeenRev = this.store.handRev;
      this.syncFrom(doc);
      this.statsBox.textContent += ` · round trip ${fmt(ms, 0)} ms`;
      this.showError(null);
    } catch (err) {
      this.showError(err instanceof ApiError ? err.message : String(err));
    } finally {
      this.inFlight = false;
    }
  }

  private showError(detail: string | null): void {
    if (detail === null) {
      this.errorBox.classList.add("hidden");
      this.errorBox.textContent = "";
    } else {
      this.errorBox.classList.remove("hidden");
      this.errorBox.textContent = detail;
    }
  }

  private async exportUrdf(): Promise<void> {
    try {
      const { urdf } = await api.getUrdf();
      const blob = new Blob([urdf], { type: "application/xml" });
      const a = el("a", {
        href: URL.createObjectURL(blob),
        download: "hand.urdf",
      });
      a.click();
      URL.revokeObjectURL(a.href);
    } catch (err) {
      this.showError(err instanceof ApiError ? err.message : String(err));
    }
  }
}
