/** Shared mutable app state.  The service is the single source of truth:
 * everything here is a cache of its last responses plus purely visual
 * bookkeeping (dirty flags, an EMA of the actuator speed read off
 * consecutive state frames).
 */

import { HandDoc, StateFrame, WorkspaceDoc } from "./types.js";
import { outline2d, Pt } from "./hull.js";

export const FINGER_COLORS = ["#4fc3f7", "#ffb74d", "#aed581", "#f06292", "#9575cd", "#4db6ac"];

export function fingerColor(k: number): string {
  return FINGER_COLORS[k % FINGER_COLORS.length];
}

export class Store {
  hand: HandDoc | null = null;
  workspace: WorkspaceDoc | null = null;
  /** XY outlines per finger, rebuilt whenever `workspace` changes */
  hulls: Pt[][] = [];
  /** newest consumed state frame */
  state: StateFrame | null = null;
  /** fingertips of the first frame after a (re)configuration = home pose */
  homeTips: number[][] | null = null;

  /** EMA of sum |d reduced / dt| between consecutive state frames, mm/s */
  energy = 0;
  private prevForEnergy: StateFrame | null = null;

  /** designer/synergy panels re-read the hand doc when this increments */
  handRev = 0;
  /** teleop canvas re-fits its viewport when this increments */
  workspaceRev = 0;

  setHand(doc: HandDoc): void {
    this.hand = doc;
    this.handRev += 1;
    // next state frame after a config change redefines the home markers
    this.homeTips = null;
    this.prevForEnergy = null;
  }

  setWorkspace(doc: WorkspaceDoc): void {
    this.workspace = doc;
    this.hulls = doc.per_finger.map((fw) =>
      outline2d(fw.points.map((p) => [p[0], p[1]] as Pt)),
    );
    this.workspaceRev += 1;
  }

  /** Fold one state frame in; called at most once per animation frame. */
  consume(frame: StateFrame): void {
    this.state = frame;
    if (this.homeTips === null) this.homeTips = frame.fingertips.map((t) => [...t]);
    const prev = this.prevForEnergy;
    if (
      prev &&
      prev.reduced_actuation.length === frame.reduced_actuation.length &&
      frame.timestamp > prev.timestamp
    ) {
      const dt = frame.timestamp - prev.timestamp;
      let speed = 0;
      for (let j = 0; j < frame.reduced_actuation.length; j++)
        speed += Math.abs(frame.reduced_actuation[j] - prev.reduced_actuation[j]);
      this.energy = 0.8 * this.energy + 0.2 * (speed / dt);
    }
    this.prevForEnergy = frame;
  }
}
