import { describe, expect, it } from "vitest";

import { ApiError, TraceApi } from "../src/api.js";

function respond(status: number, body: unknown): (url: string, init?: RequestInit) => Promise<Response> {
  return async () =>
    new Response(typeof body === "string" ? body : JSON.stringify(body), { status });
}

describe("TraceApi", () => {
  it("lists trace ids", async () => {
    const api = new TraceApi("", respond(200, { traces: ["a", "b"] }));
    expect(await api.listTraces()).toEqual(["a", "b"]);
  });

  it("surfaces service errors verbatim", async () => {
    const api = new TraceApi("", respond(422, '{"detail":"unknown constraint ids: [9]"}'));
    await expect(api.getTrace("x")).rejects.toThrowError(ApiError);
    await expect(api.getTrace("x")).rejects.toThrow(/unknown constraint ids/);
  });

  it("sends slice markings as cids/pids json", async () => {
    let seen: unknown = null;
    const api = new TraceApi("", async (_url, init) => {
      seen = JSON.parse(String(init?.body));
      return new Response('{"version":1}', { status: 200 });
    });
    await api.slice("t", { cids: [3, 1], pids: [7] });
    expect(seen).toEqual({ cids: [3, 1], pids: [7] });
  });

  it("prefixes a configured base url", async () => {
    let seenUrl = "";
    const api = new TraceApi("http://h:1", async (url) => {
      seenUrl = url;
      return new Response('{"traces":[]}', { status: 200 });
    });
    await api.listTraces();
    expect(seenUrl).toBe("http://h:1/traces");
  });
});
