/** App entry: fetch the configuration documents, connect the socket, and
 * run the single rendering loop.  Socket frames are coalesced
 * latest-state-wins: whatever arrived since the previous animation frame
 * is folded into the store exactly once per frame.
 */

import { api } from "./api.js";
import { DesignerPanel } from "./designer.js";
import { el } from "./dom.js";
import { GraspPanel } from "./grasp.js";
import { StateSocket } from "./socket.js";
import { Store } from "./store.js";
import { SynergyPanel } from "./synergy.js";
import { TeleopPanel } from "./teleop.js";
import { readConfig, writeConfig } from "./urlconfig.js";

function panelBody(id: string): HTMLElement {
  const host = document.querySelector(`#${id} .body`);
  if (!host) throw new Error(`panel ${id} missing from the page shell`);
  return host as HTMLElement;
}

async function loadDocs(store: Store, res: number): Promise<void> {
  store.setHand(await api.getHand());
  store.setWorkspace(await api.getWorkspace(res));
}

async function boot(): Promise<void> {
  const cfg = readConfig();
  writeConfig(cfg); // normalize the fragment so it is shareable immediately
  const store = new Store();
  const socket = new StateSocket();
  const status = document.getElementById("status") as HTMLElement;

  try {
    await loadDocs(store, cfg.res);
  } catch (err) {
    status.replaceChildren(
      el("span", { class: "err", text: `service unreachable (${err}); retrying…` }),
    );
    setTimeout(() => void boot(), 2000);
    return;
  }

  const designer = new DesignerPanel(panelBody("designer"), store, cfg);
  const synergy = new SynergyPanel(panelBody("synergy"), store, socket, cfg);
  const teleop = new TeleopPanel(panelBody("teleop"), store, socket);
  const grasp = new GraspPanel(panelBody("grasp"), store, cfg);

  socket.onReopen = (wasEverOpen) => {
    // a drop loses any config change made meanwhile: restore from GETs
    if (wasEverOpen) void loadDocs(store, cfg.res);
  };
  socket.onErrorFrame = (detail) => synergy.showError(detail);
  socket.connect();

  const connDot = el("span", { class: "dot" });
  const connText = el("span", {});
  const rateText = el("span", {});
  status.replaceChildren(connDot, connText, rateText);

  let lastRateAt = performance.now();
  let lastFrames = 0;

  const loop = () => {
    const frame = socket.latest;
    if (frame) {
      socket.latest = null;
      store.consume(frame);
    }
    teleop.flush();
    teleop.draw();
    designer.onFrame();
    synergy.onFrame();
    grasp.onFrame();

    const now = performance.now();
    if (now - lastRateAt >= 1000) {
      const rate = ((socket.frames - lastFrames) * 1000) / (now - lastRateAt);
      lastRateAt = now;
      lastFrames = socket.frames;
      connDot.className = "dot " + (socket.connected ? "on" : "off");
      connText.textContent = socket.connected ? " live" : " reconnecting";
      rateText.textContent = ` · ${rate.toFixed(0)} state frames/s`;
    }
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

void boot();
