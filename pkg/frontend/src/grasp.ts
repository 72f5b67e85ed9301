/** Grasp lab: submit the same sampling study under two coupling presets
 * and compare the aggregates side by side.  Jobs snapshot the hand
 * configuration at submission, so the panel switches the session
 * topology, submits, and restores the original configuration; polling
 * then runs against immutable job documents.
 */

import { api, ApiError } from "./api.js";
import { button, el, fmt } from "./dom.js";
import { Store } from "./store.js";
import { JobDoc, ObjectDescriptor, SamplingConfig } from "./types.js";
import { UrlConfig, writeConfig } from "./urlconfig.js";

const POLL_MS = 400;

interface Side {
  topology: string;
  job: JobDoc | null;
  cell: HTMLElement;
}

export class GraspPanel {
  private shapeSel: HTMLSelectElement;
  private dims: Record<string, HTMLInputElement> = {};
  private fields: Record<string, HTMLInputElement> = {};
  private topoSel: [HTMLSelectElement, HTMLSelectElement];
  private launchBtn: HTMLButtonElement;
  private cancelBtn: HTMLButtonElement;
  private resultsRow: HTMLElement;
  private noteBox: HTMLElement;
  private errorBox: HTMLElement;
  private sides: Side[] = [];
  private pollTimer: number | null = null;
  private lastSeenRev = -1;
  /** completed aggregates by config signature, for the determinism marker */
  private history = new Map<string, string>();

  constructor(
    root: HTMLElement,
    private store: Store,
    private cfg: UrlConfig,
  ) {
    this.shapeSel = el("select", {});
    for (const s of ["sphere", "cylinder", "box"])
      this.shapeSel.append(el("option", { value: s, text: s }));
    this.shapeSel.value = cfg.shape;
    this.shapeSel.addEventListener("change", () => {
      this.cfg.shape = this.shapeSel.value as UrlConfig["shape"];
      this.syncDimVisibility();
      writeConfig(this.cfg);
    });

    const num = (value: number, step: string, min: string): HTMLInputElement => {
      const input = el("input", { type: "number", value: String(value), step, min });
      input.addEventListener("change", () => writeConfig(this.readForm()));
      return input;
    };
    this.dims = {
      radius: num(cfg.radius, "1", "1"),
      height: num(cfg.height, "1", "1"),
      sx: num(cfg.size[0], "1", "1"),
      sy: num(cfg.size[1], "1", "1"),
      sz: num(cfg.size[2], "1", "1"),
    };
    this.fields = {
      n_samples: num(cfg.n_samples, "1", "1"),
      seed: num(cfg.seed, "1", "0"),
      mu: num(cfg.mu, "0.05", "0.05"),
      n_edges: num(cfg.n_edges, "1", "3"),
    };

    this.topoSel = [el("select", {}), el("select", {})];
    this.topoSel.forEach((sel, i) => {
      sel.addEventListener("change", () => {
        if (i === 0) this.cfg.topoA = sel.value;
        else this.cfg.topoB = sel.value;
        writeConfig(this.cfg);
      });
    });

    this.launchBtn = button("launch comparison", () => void this.launch(), "primary");
    this.cancelBtn = button("cancel", () => void this.cancelAll(), "ghost");
    this.cancelBtn.disabled = true;
    this.resultsRow = el("div", { class: "results-row" });
    this.noteBox = el("div", { class: "hint" });
    this.errorBox = el("div", { class: "error-box hidden" });

    const labeled = (text: string, node: Node) =>
      el("label", { class: "field" }, el("span", { text }), node);

    root.append(
      el(
        "div",
        { class: "form-grid" },
        labeled("object", this.shapeSel),
        labeled("radius mm", this.dims.radius),
        labeled("height mm", this.dims.height),
        labeled("size x", this.dims.sx),
        labeled("size y", this.dims.sy),
        labeled("size z", this.dims.sz),
        labeled("samples", this.fields.n_samples),
        labeled("seed", this.fields.seed),
        labeled("friction µ", this.fields.mu),
        labeled("cone edges", this.fields.n_edges),
        labeled("topology A", this.topoSel[0]),
        labeled("topology B", this.topoSel[1]),
      ),
      el("div", { class: "row" }, this.launchBtn, this.cancelBtn),
      this.resultsRow,
      this.noteBox,
      this.errorBox,
    );
    this.syncDimVisibility();
  }

  onFrame(): void {
    if (this.store.handRev === this.lastSeenRev) return;
    this.lastSeenRev = this.store.handRev;
    this.rebuildTopoOptions();
  }

  private rebuildTopoOptions(): void {
    const doc = this.store.hand;
    if (!doc) return;
    const n = doc.hand_params.n_fingers;
    const names = [String(3 * n), String(2 * n + 1), String(n + 1)];
    this.topoSel.forEach((sel, i) => {
      const want = i === 0 ? this.cfg.topoA : this.cfg.topoB;
      sel.replaceChildren();
      for (const name of names) sel.append(el("option", { value: name, text: name }));
      sel.value = names.includes(want) ? want : names[i === 0 ? 1 : 2];
    });
  }

  private syncDimVisibility(): void {
    const shape = this.shapeSel.value;
    const show = (input: HTMLInputElement, on: boolean) => {
      (input.closest("label") as HTMLElement).style.display = on ? "" : "none";
    };
    show(this.dims.radius, shape !== "box");
    show(this.dims.height, shape === "cylinder");
    show(this.dims.sx, shape === "box");
    show(this.dims.sy, shape === "box");
    show(this.dims.sz, shape === "box");
  }

  private readForm(): UrlConfig {
    this.cfg.shape = this.shapeSel.value as UrlConfig["shape"];
    this.cfg.radius = Number(this.dims.radius.value);
    this.cfg.height = Number(this.dims.height.value);
    this.cfg.size = [
      Number(this.dims.sx.value),
      Number(this.dims.sy.value),
      Number(this.dims.sz.value),
    ];
    this.cfg.n_samples = Number(this.fields.n_samples.value);
    this.cfg.seed = Number(this.fields.seed.value);
    this.cfg.mu = Number(this.fields.mu.value);
    this.cfg.n_edges = Number(this.fields.n_edges.value);
    this.cfg.topoA = this.topoSel[0].value;
    this.cfg.topoB = this.topoSel[1].value;
    return this.cfg;
  }

  private objectDescriptor(): ObjectDescriptor {
    const c = this.cfg;
    if (c.shape === "sphere") return { shape: "sphere", radius: c.radius };
    if (c.shape === "cylinder") return { shape: "cylinder", radius: c.radius, height: c.height };
    return { shape: "box", size: [...c.size] };
  }

  private sampling(): SamplingConfig {
    const c = this.cfg;
    return { n_samples: c.n_samples, seed: c.seed, mu: c.mu, n_edges: c.n_edges };
  }

  private async launch(): Promise<void> {
    const hand = this.store.hand;
    if (!hand) return;
    this.readForm();
    writeConfig(this.cfg);
    this.showError(null);
    this.launchBtn.disabled = true;

    const object = this.objectDescriptor();
    const sampling = this.sampling();
    const originalTopology = hand.topology;
    this.sides = [this.cfg.topoA, this.cfg.topoB].map((topology) => ({
      topology,
      job: null,
      cell: el("div", { class: "result-cell" }),
    }));
    this.resultsRow.replaceChildren(...this.sides.map((s) => s.cell));

    try {
      for (const side of this.sides) {
        await api.putHand({ topology: side.topology });
        side.job = await api.postJob(object, sampling);
        this.renderSide(side);
      }
    } catch (err) {
      this.showError(err instanceof ApiError ? err.message : String(err));
    } finally {
      try {
        await api.putHand({ topology: originalTopology });
      } catch {
        /* session keeps the last topology; the synergy panel shows it */
      }
      this.launchBtn.disabled = false;
    }
    if (this.sides.some((s) => s.job)) {
      this.cancelBtn.disabled = false;
      this.startPolling();
    }
  }

  private startPolling(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.pollTimer = setInterval(() => void this.poll(), POLL_MS);
  }

  private async poll(): Promise<void> {
    let active = 0;
    for (const side of this.sides) {
      if (!side.job) continue;
      if (["done", "failed", "cancelled"].includes(side.job.status)) continue;
      try {
        side.job = await api.getJob(side.job.id);
      } catch (err) {
        this.showError(String(err));
        continue;
      }
      this.renderSide(side);
      if (!["done", "failed", "cancelled"].includes(side.job.status)) active += 1;
    }
    if (active === 0 && this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
      this.cancelBtn.disabled = true;
      this.noteDeterminism();
    }
  }

  private async cancelAll(): Promise<void> {
    for (const side of this.sides) {
      if (side.job) {
        try {
          side.job = await api.cancelJob(side.job.id);
          this.renderSide(side);
        } catch {
          /* job may already be terminal */
        }
      }
    }
  }

  private signature(side: Side): string {
    return JSON.stringify({
      topology: side.topology,
      object: this.objectDescriptor(),
      sampling: this.sampling(),
    });
  }

  /** Same seed twice must show identical aggregates; surface that. */
  private noteDeterminism(): void {
    const notes: string[] = [];
    for (const side of this.sides) {
      if (side.job?.status !== "done" || !side.job.result) continue;
      const sig = this.signature(side);
      const agg = JSON.stringify(side.job.result);
      const prev = this.history.get(sig);
      if (prev !== undefined)
        notes.push(
          prev === agg
            ? `topology ${side.topology}: aggregates identical to the previous run ✓`
            : `topology ${side.topology}: aggregates DIFFER from the previous run ✗`,
        );
      this.history.set(sig, agg);
    }
    this.noteBox.textContent = notes.join(" · ");
  }

  private renderSide(side: Side): void {
    const job = side.job;
    if (!job) return;
    const rows: [string, string][] = [
      ["status", job.status],
      ["progress", `${Math.round(job.progress * 100)}%`],
    ];
    if (job.result) {
      const r = job.result;
      rows.push(
        ["samples", String(r.n_samples)],
        ["closures", String(r.closure_count)],
        ["closure rate", `${(r.closure_rate * 100).toFixed(1)}%`],
        ["mean Q (closures)", fmt(r.mean_q_lrw, 4)],
        ["mean Q (all)", fmt(r.mean_q_lrw_all, 4)],
        ["max Q", fmt(r.max_q_lrw, 4)],
        ["seed", String(r.seed)],
      );
    }
    if (job.error) rows.push(["error", job.error]);

    const table = el("table", { class: "kv" });
    for (const [k, v] of rows)
      table.append(el("tr", {}, el("td", { text: k }), el("td", { text: v })));
    const bar = el("div", { class: "progress" }, el("div", { class: "fill" }));
    (bar.firstChild as HTMLElement).style.width = `${Math.round(job.progress * 100)}%`;
    side.cell.replaceChildren(
      el("h3", { text: `topology ${side.topology}` }),
      bar,
      table,
    );
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
}
