import { describe, expect, it } from "vitest";

import { TraceApi, exportMarking } from "../src/api.js";
import { ExplorerState, HISTORY_LIMIT } from "../src/state.js";
import type { TraceDoc } from "../src/types.js";

function doc(overrides: Partial<TraceDoc> = {}): TraceDoc {
  return {
    version: 1,
    kind: "trace",
    mode: "ccp",
    meta: {},
    configs: [
      {
        id: 0,
        hiddenVars: [],
        agents: [
          { pid: 1, kind: "tell", printedForm: "tell(X=1)" },
          { pid: 2, kind: "tell", printedForm: "tell(Y=2)" },
        ],
        store: [],
        storeStatus: "consistent",
      },
      {
        id: 1,
        hiddenVars: [],
        agents: [{ pid: 2, kind: "tell", printedForm: "tell(Y=2)" }],
        store: [{ cid: 1, printedForm: "X=1" }],
        storeStatus: "consistent",
      },
      {
        id: 2,
        hiddenVars: [],
        agents: [],
        store: [
          { cid: 1, printedForm: "X=1" },
          { cid: 2, printedForm: "Y=2" },
        ],
        storeStatus: "consistent",
      },
    ],
    labels: [],
    verdict: "success",
    answer: null,
    ...overrides,
  };
}

function fakeApi(onSlice?: (body: unknown) => unknown): {
  api: TraceApi;
  calls: { url: string; body: unknown }[];
} {
  const calls: { url: string; body: unknown }[] = [];
  const fetchImpl = async (url: string, init?: RequestInit) => {
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    calls.push({ url, body });
    const payload = onSlice ? onSlice(body) : { version: 1, sliced: true, configs: [] };
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { api: new TraceApi("", fetchImpl), calls };
}

describe("marking", () => {
  it("selects five constraint badges into a five-element marking", () => {
    const state = new ExplorerState();
    const entries = [1, 2, 3, 4, 5].map((cid) => ({
      cid,
      printedForm: `c${cid}`,
    }));
    const d = doc();
    d.configs[2].store = entries;
    state.load("t1", d);
    for (const cid of [1, 2, 3, 4, 5]) {
      const outcome = state.toggleCid(cid);
      expect(outcome).toEqual({ ok: true, selected: true });
    }
    expect(state.marking().cids).toEqual([1, 2, 3, 4, 5]);
  });

  it("toggling twice restores the previous marking", () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    state.toggleCid(1);
    state.toggleCid(1);
    expect(state.marking()).toEqual({ cids: [], pids: [] });
  });

  it("rejects clicks on elements outside the final configuration", () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    // pid 1 was reduced before the final configuration
    const outcome = state.togglePid(1);
    expect(outcome.ok).toBe(false);
    if (!outcome.ok) expect(outcome.reason).toMatch(/final configuration/);
    expect(state.marking().pids).toEqual([]);
  });

  it("marking pids of surviving calls grows the process marking", () => {
    const state = new ExplorerState();
    const d = doc();
    d.configs[2].agents = [{ pid: 2, kind: "call", printedForm: "p(X)" }];
    state.load("t1", d);
    expect(state.togglePid(2)).toEqual({ ok: true, selected: true });
    expect(state.marking().pids).toEqual([2]);
  });

  it("invalidates the current slice when the marking changes", async () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    state.toggleCid(1);
    const { api } = fakeApi();
    await state.requestSlice(api);
    expect(state.slice).not.toBeNull();
    state.toggleCid(2);
    expect(state.slice).toBeNull();
  });
});

describe("slice requests", () => {
  it("posts the marking and keeps the raw response bytes", async () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    state.toggleCid(1);
    state.toggleCid(2);
    const { api, calls } = fakeApi(() => ({ version: 1, sliced: true, zzz: 1 }));
    const result = await state.requestSlice(api);
    expect(calls[0].url).toBe("/traces/t1/slice");
    expect(calls[0].body).toEqual({ cids: [1, 2], pids: [] });
    // byte-identical passthrough of the service response
    expect(result?.raw).toBe(JSON.stringify({ version: 1, sliced: true, zzz: 1 }));
    expect(state.slice?.raw).toBe(result?.raw);
  });

  it("warns on an empty marking and slices only after confirmation", async () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    const { api, calls } = fakeApi();
    const first = await state.requestSlice(api);
    expect(first).toBeNull();
    expect(state.emptyMarkingWarning).toBe(true);
    expect(calls).toHaveLength(0);
    const second = await state.requestSlice(api, true);
    expect(second).not.toBeNull();
    expect(calls).toHaveLength(1);
  });

  it("discards stale responses when a newer request is in flight", async () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    state.toggleCid(1);
    let release: (() => void) | null = null;
    const slow = new Promise<void>((resolve) => (release = resolve));
    const fetchImpl = async (url: string, init?: RequestInit) => {
      const body = JSON.parse(String(init?.body));
      if (body.cids.length === 1) await slow; // first request hangs
      return new Response(JSON.stringify({ version: 1, tag: body.cids.length }), {
        status: 200,
      });
    };
    const api = new TraceApi("", fetchImpl);
    const first = state.requestSlice(api);
    state.toggleCid(2);
    const second = await state.requestSlice(api);
    expect((state.slice?.doc as { tag?: number }).tag).toBe(2);
    release!();
    const stale = await first;
    expect(stale).toBeNull();
    expect((state.slice?.doc as { tag?: number }).tag).toBe(2);
    expect(second?.raw).toBe(state.slice?.raw);
  });

  it("keeps at most the last twenty (marking, slice) pairs", async () => {
    const state = new ExplorerState();
    const entries = Array.from({ length: 25 }, (_, i) => ({
      cid: i + 1,
      printedForm: `c${i + 1}`,
    }));
    const d = doc();
    d.configs[2].store = entries;
    state.load("t1", d);
    const { api } = fakeApi();
    for (let i = 1; i <= HISTORY_LIMIT + 5; i++) {
      state.toggleCid(i);
      await state.requestSlice(api);
    }
    expect(state.history).toHaveLength(HISTORY_LIMIT);
    // the oldest entries were evicted
    expect(state.history[0].marking.cids).toHaveLength(6);
  });
});

describe("documents and provenance", () => {
  it("loading a mismatched schema version raises the banner flag", () => {
    const state = new ExplorerState();
    state.load("t1", doc({ version: 99 }));
    expect(state.versionMismatch).toBe(99);
  });

  it("never mutates the loaded document", async () => {
    const state = new ExplorerState();
    const d = doc();
    const snapshot = JSON.stringify(d);
    state.load("t1", d);
    state.toggleCid(1);
    state.togglePid(99);
    const { api } = fakeApi();
    await state.requestSlice(api);
    state.stepForward();
    expect(JSON.stringify(d)).toBe(snapshot);
  });

  it("step cursor clamps at both ends and never auto-advances", () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    expect(state.stepBack()).toBe(0);
    state.stepForward();
    state.stepForward();
    expect(state.stepForward()).toBe(2);
  });

  it("sliced elements resolve to their originating ids", async () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    state.toggleCid(1);
    const sliced = {
      version: 1,
      sliced: true,
      configs: [
        {
          id: 0,
          hiddenVars: [],
          agents: [{ pid: 2, kind: "sliced", printedForm: "*", dot: true, origin: 2 }],
          store: [{ cid: 1, printedForm: "X=1", origin: 1 }],
          storeStatus: "consistent",
        },
      ],
    };
    const { api } = fakeApi(() => sliced);
    await state.requestSlice(api);
    expect(state.originOf("cid", 1)).toBe(1);
    expect(state.originOf("pid", 2)).toBe(2);
  });

  it("marking export round-trips through JSON", () => {
    const state = new ExplorerState();
    state.load("t1", doc());
    state.toggleCid(2);
    state.toggleCid(1);
    const exported = exportMarking(state.marking());
    expect(JSON.parse(exported)).toEqual({ cids: [1, 2], pids: [] });
  });
});
