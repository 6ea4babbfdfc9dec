// DOM rendering for configurations: agents and store atoms with pid/cid
// badges, placeholders dimmed and star-rendered.

import type { ExplorerState } from "./state.js";
import type { ConfigEntry, TraceDoc } from "./types.js";

type ClickHandler = (kind: "cid" | "pid", id: number) => void;

export function renderConfiguration(
  config: ConfigEntry,
  opts: {
    markable?: boolean;
    markedCids?: Set<number>;
    markedPids?: Set<number>;
    onClick?: ClickHandler;
    highlight?: { kind: "cid" | "pid"; id: number } | null;
  } = {},
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "config-panel";

  const header = document.createElement("div");
  header.className = "config-header";
  const hidden = config.hiddenVars.length ? config.hiddenVars.join(" ") : "0";
  header.textContent = `#${config.id}  hidden: ${hidden}`;
  panel.appendChild(header);

  const agents = document.createElement("div");
  agents.className = "config-agents";
  if (config.agents.length === 0) {
    agents.appendChild(emptyNote("no agents"));
  }
  for (const agent of config.agents) {
    const el = document.createElement("span");
    el.className = "agent" + (agent.dot ? " dot" : "");
    el.dataset.pid = String(agent.pid);
    const badge = document.createElement("sup");
    badge.className = "badge pid-badge";
    badge.textContent = String(agent.pid);
    el.textContent = agent.dot ? "*" : agent.printedForm;
    el.appendChild(badge);
    decorate(el, "pid", agent.pid, opts);
    agents.appendChild(el);
  }
  panel.appendChild(agents);

  const store = document.createElement("div");
  store.className = "config-store" + (config.storeStatus === "inconsistent" ? " failed" : "");
  if (config.store.length === 0) {
    store.appendChild(emptyNote("t"));
  }
  for (const entry of config.store) {
    const el = document.createElement("span");
    el.className = "atom";
    el.dataset.cid = String(entry.cid);
    const badge = document.createElement("sup");
    badge.className = "badge cid-badge";
    badge.textContent = String(entry.cid);
    el.textContent = entry.printedForm;
    el.appendChild(badge);
    decorate(el, "cid", entry.cid, opts);
    store.appendChild(el);
  }
  panel.appendChild(store);
  return panel;
}

function decorate(
  el: HTMLElement,
  kind: "cid" | "pid",
  id: number,
  opts: {
    markable?: boolean;
    markedCids?: Set<number>;
    markedPids?: Set<number>;
    onClick?: ClickHandler;
    highlight?: { kind: "cid" | "pid"; id: number } | null;
  },
): void {
  const marked =
    kind === "cid" ? opts.markedCids?.has(id) : opts.markedPids?.has(id);
  if (marked) el.classList.add("marked");
  if (opts.highlight && opts.highlight.kind === kind && opts.highlight.id === id) {
    el.classList.add("origin-highlight");
  }
  if (opts.onClick) {
    el.classList.add(opts.markable ? "clickable" : "inert");
    if (!opts.markable) el.title = "only the final configuration can be marked";
    el.addEventListener("click", () => opts.onClick!(kind, id));
  }
}

function emptyNote(text: string): HTMLElement {
  const el = document.createElement("span");
  el.className = "empty-note";
  el.textContent = text;
  return el;
}

export function renderBanner(state: ExplorerState): HTMLElement | null {
  if (state.versionMismatch === null) return null;
  const el = document.createElement("div");
  el.className = "banner error";
  el.textContent =
    `trace document version ${state.versionMismatch} is not supported ` +
    `(expected 1)`;
  return el;
}

export function renderVerdict(doc: TraceDoc): HTMLElement {
  const el = document.createElement("div");
  el.className = `verdict verdict-${doc.verdict}`;
  let text = `${doc.mode} · ${doc.verdict}`;
  if (doc.violation) {
    text += ` · ${doc.violation.kind} fails at #${doc.violation.index}: ${doc.violation.assertion}`;
  }
  if (doc.answer) {
    const bindings = Object.entries(doc.answer.bindings)
      .map(([k, v]) => `${k} = ${v}`)
      .join(", ");
    if (bindings) text += ` · ${bindings}`;
  }
  el.textContent = text;
  return el;
}
