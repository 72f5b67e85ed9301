/** Wire types for the polydelta service JSON schemas (REST + WebSocket).
 *
 * Every document and frame carries `schema_version`; units are
 * millimetres, degrees where a name says so, radians otherwise, seconds.
 */

export const SCHEMA_VERSION = 1;

export interface DeltaGeometryDoc {
  base_radius: number;
  ee_radius: number;
  link_length: number;
  stroke: number;
  rail_angles: number[];
}

export interface HandParamsDoc {
  n_fingers: number;
  coupling_link_length: number;
  /** angular slot between adjacent fingers, radians */
  fingertip_angle: number;
  actuation_height: number;
  fingers: DeltaGeometryDoc[];
  fingertip_offset: number[][];
}

export interface TopologyDoc {
  n_reduced: number;
  link_to_actuator: number[];
  name: string;
}

export interface WorkspaceSummary {
  bbox_min: number[];
  bbox_max: number[];
  extents: number[];
}

export interface SynergyDoc {
  /** P, (m x 3N): averages each coupling group */
  projection: number[][];
  /** C, (3N x m): one 1 per row */
  expansion: number[][];
}

export interface HandDoc {
  schema_version: number;
  hand_params: HandParamsDoc;
  topology: TopologyDoc;
  n_reduced: number;
  synergy: SynergyDoc;
  workspace_summary: WorkspaceSummary;
}

export interface PerFingerWorkspace {
  finger: number;
  reachable_count: number;
  points: number[][];
}

export interface WorkspaceDoc {
  schema_version: number;
  bbox_min: number[];
  bbox_max: number[];
  extents: number[];
  per_finger: PerFingerWorkspace[];
}

/** `state` frame broadcast on /ws (also the POST /api/ik response). */
export interface StateFrame {
  schema_version: number;
  type: "state";
  timestamp: number;
  mapping: string;
  n_fingers: number;
  n_reduced: number;
  reduced_actuation: number[];
  full_actuation: number[];
  fingertips: number[][];
  /** post-clamp target vs realized tip, mm per finger */
  residuals: number[];
  /** raw request vs realized tip, mm per finger */
  tracking_error: number[];
}

export interface ErrorFrame {
  schema_version: number;
  type: "error";
  detail: string;
}

export type ServerFrame = StateFrame | ErrorFrame;

export interface GraspSummary {
  n_samples: number;
  closure_count: number;
  closure_rate: number;
  n_rejected: number;
  mean_q_lrw: number;
  mean_q_lrw_all: number;
  max_q_lrw: number;
  seed: number;
  mu: number;
  n_edges: number;
  heights_mm: number[];
  yaws_deg: number[];
}

export type JobStatus = "queued" | "running" | "done" | "failed" | "cancelled";

export interface JobDoc {
  schema_version: number;
  id: string;
  status: JobStatus;
  progress: number;
  config: unknown;
  result: GraspSummary | null;
  error: string | null;
}

export interface ObjectDescriptor {
  shape: "sphere" | "cylinder" | "box";
  radius?: number;
  height?: number;
  size?: number[];
}

export interface SamplingConfig {
  n_samples?: number;
  seed?: number;
  mu?: number;
  n_edges?: number;
}

/** Operator sample consumed by teleop_sample messages (mm, seconds). */
export interface PoseSampleDoc {
  t: number;
  wrist: number[];
  left_thumb: number[];
  left_index: number[];
  right_thumb: number[];
  right_index: number[];
}
