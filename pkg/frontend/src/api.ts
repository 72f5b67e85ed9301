/** Same-origin REST client; the page is served by the service at /ui. */

import {
  HandDoc,
  HandParamsDoc,
  JobDoc,
  ObjectDescriptor,
  SamplingConfig,
  StateFrame,
  TopologyDoc,
  WorkspaceDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(path, init);
  let body: unknown = null;
  try {
    body = await res.json();
  } catch {
    /* non-JSON error body: fall through to statusText */
  }
  if (!res.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : res.statusText;
    throw new ApiError(res.status, detail);
  }
  return body as T;
}

function jsonInit(method: string, payload: unknown): RequestInit {
  return {
    method,
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export interface PutHandBody {
  hand_params?: HandParamsDoc;
  topology?: string | TopologyDoc;
}

export const api = {
  getHand: () => request<HandDoc>("/api/hand"),
  putHand: (body: PutHandBody) => request<HandDoc>("/api/hand", jsonInit("PUT", body)),
  getWorkspace: (resolution: number) =>
    request<WorkspaceDoc>(`/api/workspace?resolution=${resolution}`),
  postIk: (targets: number[][]) =>
    request<StateFrame>("/api/ik", jsonInit("POST", { targets })),
  getUrdf: () => request<{ urdf: string; sidecar: unknown }>("/api/urdf"),
  postJob: (object: ObjectDescriptor, sampling: SamplingConfig) =>
    request<JobDoc>("/api/grasp/jobs", jsonInit("POST", { object, sampling })),
  getJob: (id: string) => request<JobDoc>(`/api/grasp/jobs/${encodeURIComponent(id)}`),
  cancelJob: (id: string) =>
    request<JobDoc>(`/api/grasp/jobs/${encodeURIComponent(id)}/cancel`, { method: "POST" }),
};
