// Explorer state: one loaded trace, a marking over its final
// configuration, the current slice and a bounded what-if history.
// Trace documents are never mutated; slices are whatever the service
// returned, byte for byte.

import type { SliceResult, TraceApi } from "./api.js";
import { SCHEMA_VERSION, type MarkingSelection, type TraceDoc } from "./types.js";

export const HISTORY_LIMIT = 20;

export interface HistoryEntry {
  marking: MarkingSelection;
  slice: SliceResult;
}

export type ToggleOutcome =
  | { ok: true; selected: boolean }
  | { ok: false; reason: string };

export class ExplorerState {
  traceId: string | null = null;
  doc: TraceDoc | null = null;
  versionMismatch: number | null = null;
  markedCids = new Set<number>();
  markedPids = new Set<number>();
  slice: SliceResult | null = null;
  cursor = 0;
  history: HistoryEntry[] = [];
  emptyMarkingWarning = false;
  private requestSeq = 0;

  load(id: string, doc: TraceDoc): void {
    this.traceId = id;
    this.versionMismatch = doc.version === SCHEMA_VERSION ? null : doc.version;
    this.doc = doc;
    this.markedCids.clear();
    this.markedPids.clear();
    this.slice = null;
    this.cursor = 0;
    this.emptyMarkingWarning = false;
    this.requestSeq++; // anything in flight is now stale
  }

  finalConfig() {
    if (!this.doc) return null;
    return this.doc.configs[this.doc.configs.length - 1] ?? null;
  }

  private inFinalStore(cid: number): boolean {
    const final = this.finalConfig();
    return !!final && final.store.some((e) => e.cid === cid);
  }

  private inFinalAgents(pid: number): boolean {
    const final = this.finalConfig();
    return !!final && final.agents.some((a) => a.pid === pid);
  }

  toggleCid(cid: number): ToggleOutcome {
    if (!this.inFinalStore(cid)) {
      return { ok: false, reason: "only the final configuration can be marked" };
    }
    const selected = !this.markedCids.delete(cid);
    if (selected) this.markedCids.add(cid);
    this.slice = null; // a changed marking invalidates the slice
    return { ok: true, selected };
  }

  togglePid(pid: number): ToggleOutcome {
    if (!this.inFinalAgents(pid)) {
      return { ok: false, reason: "only the final configuration can be marked" };
    }
    const selected = !this.markedPids.delete(pid);
    if (selected) this.markedPids.add(pid);
    this.slice = null;
    return { ok: true, selected };
  }

  marking(): MarkingSelection {
    return {
      cids: [...this.markedCids].sort((a, b) => a - b),
      pids: [...this.markedPids].sort((a, b) => a - b),
    };
  }

  markingEmpty(): boolean {
    return this.markedCids.size === 0 && this.markedPids.size === 0;
  }

  async requestSlice(api: TraceApi, confirmEmpty = false): Promise<SliceResult | null> {
    if (!this.traceId || !this.doc) return null;
    if (this.markingEmpty() && !confirmEmpty) {
      this.emptyMarkingWarning = true;
      return null;
    }
    this.emptyMarkingWarning = this.markingEmpty();
    const token = ++this.requestSeq;
    const marking = this.marking();
    const result = await api.slice(this.traceId, marking);
    if (token !== this.requestSeq) {
      return null; // a newer request or load superseded this response
    }
    this.slice = result;
    this.history.push({ marking, slice: result });
    if (this.history.length > HISTORY_LIMIT) {
      this.history.splice(0, this.history.length - HISTORY_LIMIT);
    }
    return result;
  }

  stepForward(): number {
    if (this.doc && this.cursor < this.doc.configs.length - 1) this.cursor++;
    return this.cursor;
  }

  stepBack(): number {
    if (this.cursor > 0) this.cursor--;
    return this.cursor;
  }

  // Provenance: a sliced element carries the pid/cid it originated from;
  // surviving elements keep their ids, so the origin is the id itself.
  originOf(kind: "cid" | "pid", id: number): number {
    if (!this.slice) return id;
    const configs = this.slice.doc.configs;
    const final = configs[configs.length - 1];
    if (!final) return id;
    if (kind === "cid") {
      const entry = final.store.find((e) => e.cid === id);
      return entry?.origin ?? id;
    }
    for (const config of configs) {
      const agent = config.agents.find((a) => a.pid === id);
      if (agent) return agent.origin ?? id;
    }
    return id;
  }
}
