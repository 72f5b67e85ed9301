/** Config snapshot in the URL fragment — the only client-side persistence.
 *
 * Holds form choices that are not service state (grasp-lab inputs,
 * workspace overlay resolution).  Hand parameters and topology are NOT
 * stored: the service owns them and GET /api/hand restores the panels.
 */

export interface UrlConfig {
  /** workspace overlay grid per axis (2..15) */
  res: number;
  shape: "sphere" | "cylinder" | "box";
  radius: number;
  height: number;
  size: [number, number, number];
  n_samples: number;
  seed: number;
  mu: number;
  n_edges: number;
  topoA: string;
  topoB: string;
}

export const DEFAULT_CONFIG: UrlConfig = {
  res: 6,
  shape: "cylinder",
  radius: 15,
  height: 60,
  size: [30, 30, 30],
  n_samples: 120,
  seed: 7,
  mu: 0.5,
  n_edges: 8,
  topoA: "9",
  topoB: "5",
};

const PREFIX = "#cfg=";

export function readConfig(): UrlConfig {
  const hash = location.hash;
  if (!hash.startsWith(PREFIX)) return { ...DEFAULT_CONFIG };
  try {
    const parsed = JSON.parse(decodeURIComponent(hash.slice(PREFIX.length)));
    return { ...DEFAULT_CONFIG, ...parsed };
  } catch {
    return { ...DEFAULT_CONFIG };
  }
}

export function writeConfig(cfg: UrlConfig): void {
  const hash = PREFIX + encodeURIComponent(JSON.stringify(cfg));
  history.replaceState(null, "", location.pathname + location.search + hash);
}
