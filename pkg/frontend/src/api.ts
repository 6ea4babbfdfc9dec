// Thin client for the trace service. Slice responses are kept as raw
// text: the explorer must show exactly the bytes the service produced.

import type { MarkingSelection, RunOutcome, TraceDoc } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface SliceResult {
  doc: TraceDoc;
  raw: string;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class TraceApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request(url: string, init?: RequestInit): Promise<Response> {
    const res = await this.fetchImpl(this.base + url, init);
    if (!res.ok) {
      const body = await res.text();
      // surface service errors verbatim
      throw new ApiError(body || res.statusText, res.status);
    }
    return res;
  }

  async listTraces(): Promise<string[]> {
    const res = await this.request("/traces");
    const body = (await res.json()) as { traces: string[] };
    return body.traces;
  }

  async getTrace(id: string): Promise<TraceDoc> {
    const res = await this.request(`/traces/${id}`);
    return (await res.json()) as TraceDoc;
  }

  async slice(id: string, marking: MarkingSelection): Promise<SliceResult> {
    const res = await this.request(`/traces/${id}/slice`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ cids: marking.cids, pids: marking.pids }),
    });
    const raw = await res.text();
    return { doc: JSON.parse(raw) as TraceDoc, raw };
  }

  async run(body: Record<string, unknown>): Promise<RunOutcome> {
    const res = await this.request("/run", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await res.json()) as RunOutcome;
  }
}

// A marking export that reproduces the same slice when re-posted.
export function exportMarking(marking: MarkingSelection): string {
  return JSON.stringify({
    cids: [...marking.cids].sort((a, b) => a - b),
    pids: [...marking.pids].sort((a, b) => a - b),
  });
}
