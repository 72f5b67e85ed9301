/** Synergy panel: topology presets, a custom coupling editor, the P-matrix
 * heatmap, and the live actuator count / energy proxy.  The matrix values
 * come from the hand document — the panel renders them, it never derives
 * them from the coupling itself.
 */

import { api } from "./api.js";
import { button, el, fmt } from "./dom.js";
import { fingerColor, Store } from "./store.js";
import { StateSocket } from "./socket.js";
import { UrlConfig } from "./urlconfig.js";

export class SynergyPanel {
  private buttonsRow: HTMLElement;
  private heatmap: HTMLCanvasElement;
  private liveBox: HTMLElement;
  private errorBox: HTMLElement;
  private customField: HTMLTextAreaElement;
  private lastSeenRev = -1;

  constructor(
    root: HTMLElement,
    private store: Store,
    private socket: StateSocket,
    private cfg: UrlConfig,
  ) {
    this.buttonsRow = el("div", { class: "row wrap" });
    this.heatmap = el("canvas", { class: "heatmap", width: "360", height: "220" });
    this.liveBox = el("div", { class: "stats" });
    this.errorBox = el("div", { class: "error-box hidden" });
    this.customField = el("textarea", {
      class: "custom-topology",
      rows: "2",
      placeholder: '{"n_reduced": 7, "link_to_actuator": [0,1,2, 0,3,4, 0,5,6, 0,1,2]}',
    });
    root.append(
      this.buttonsRow,
      this.liveBox,
      this.heatmap,
      el(
        "details",
        {},
        el("summary", { text: "custom coupling" }),
        this.customField,
        el("div", { class: "row" }, button("apply custom", () => this.applyCustom(), "ghost")),
      ),
      this.errorBox,
    );
  }

  onFrame(): void {
    const s = this.store.state;
    if (s) {
      this.liveBox.textContent =
        `m = ${s.n_reduced} actuators · energy proxy Σ|ȧ| ≈ ` +
        `${fmt(this.store.energy, 1)} mm/s`;
    }
    if (this.store.handRev !== this.lastSeenRev) {
      this.lastSeenRev = this.store.handRev;
      this.rebuildButtons();
      this.drawHeatmap();
    }
  }

  showError(detail: string | null): void {
    if (detail === null) {
      this.errorBox.classList.add("hidden");
      this.errorBox.textContent = "";
    } else {
      this.errorBox.classList.remove("hidden");
      this.errorBox.textContent = detail;
    }
  }

  /** Switch topology over the socket, then re-read the hand document so the
   * heatmap and workspace overlay reflect the configuration that is now
   * actually live. */
  private switchTo(topology: string | Record<string, unknown>): void {
    this.showError(null);
    if (!this.socket.sendSynergy(topology)) {
      this.showError("socket closed; reconnecting…");
      return;
    }
    void this.refreshDocs();
  }

  private async refreshDocs(): Promise<void> {
    try {
      const doc = await api.getHand();
      const ws = await api.getWorkspace(this.cfg.res);
      this.store.setHand(doc);
      this.store.setWorkspace(ws);
    } catch (err) {
      this.showError(String(err));
    }
  }

  private applyCustom(): void {
    let parsed: Record<string, unknown>;
    try {
      parsed = JSON.parse(this.customField.value);
    } catch (err) {
      this.showError(`custom coupling is not valid JSON: ${err}`);
      return;
    }
    this.switchTo(parsed);
  }

  private rebuildButtons(): void {
    const doc = this.store.hand;
    if (!doc) return;
    const n = doc.hand_params.n_fingers;
    const active = doc.topology.name;
    this.buttonsRow.replaceChildren();
    const presets: [string, string][] = [
      [String(3 * n), "independent"],
      [String(2 * n + 1), "shared centre"],
      [String(n + 1), "centre + paired edges"],
    ];
    for (const [name, hint] of presets) {
      const b = button(`${name} · ${hint}`, () => this.switchTo(name));
      if (name === active) b.classList.add("active");
      this.buttonsRow.append(b);
    }
  }

  private drawHeatmap(): void {
    const doc = this.store.hand;
    if (!doc) return;
    const P = doc.synergy.projection;
    const m = P.length;
    const nLinks = P[0]?.length ?? 0;
    const canvas = this.heatmap;
    const ctx = canvas.getContext("2d");
    if (!ctx || m === 0 || nLinks === 0) return;

    const left = 34;
    const top = 18;
    const cw = Math.floor((canvas.width - left - 4) / nLinks);
    const ch = Math.floor((canvas.height - top - 4) / m);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.font = "10px system-ui, sans-serif";
    ctx.textBaseline = "middle";

    for (let l = 0; l < nLinks; l++) {
      const finger = Math.floor(l / 3);
      ctx.fillStyle = fingerColor(finger);
      ctx.textAlign = "center";
      ctx.fillText(String(l), left + l * cw + cw / 2, top / 2);
    }
    for (let j = 0; j < m; j++) {
      ctx.fillStyle = "#8b949e";
      ctx.textAlign = "right";
      ctx.fillText(`a${j}`, left - 4, top + j * ch + ch / 2);
      for (let l = 0; l < nLinks; l++) {
        const v = P[j][l];
        const x = left + l * cw;
        const y = top + j * ch;
        ctx.fillStyle = v > 0 ? fingerColor(Math.floor(l / 3)) : "#1c2128";
        ctx.globalAlpha = v > 0 ? 0.25 + 0.75 * v : 1;
        ctx.fillRect(x, y, cw - 1, ch - 1);
        ctx.globalAlpha = 1;
        if (v > 0 && cw >= 24) {
          ctx.fillStyle = "#0d1117";
          ctx.textAlign = "center";
          ctx.fillText(v === 1 ? "1" : v.toFixed(2).replace(/^0/, ""), x + cw / 2, y + ch / 2);
        }
      }
    }
  }
}
