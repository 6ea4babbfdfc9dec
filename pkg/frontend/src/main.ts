// Wiring: trace list on the left, the loaded trace and its slice side by
// side, marking by clicking badges in the final configuration.

import { ApiError, TraceApi, exportMarking } from "./api.js";
import { ExplorerState } from "./state.js";
import { renderBanner, renderConfiguration, renderVerdict } from "./render.js";

const api = new TraceApi("");
const state = new ExplorerState();
let highlight: { kind: "cid" | "pid"; id: number } | null = null;

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

async function refreshList(): Promise<void> {
  const ids = await api.listTraces();
  const list = $("trace-list");
  list.replaceChildren();
  if (ids.length === 0) {
    const note = document.createElement("div");
    note.className = "empty-note";
    note.textContent = "no traces yet — run a program or POST /run";
    list.appendChild(note);
    return;
  }
  for (const id of ids) {
    const item = document.createElement("button");
    item.className = "trace-item" + (id === state.traceId ? " active" : "");
    item.textContent = id;
    item.addEventListener("click", () => void loadTrace(id));
    list.appendChild(item);
  }
}

async function loadTrace(id: string): Promise<void> {
  const doc = await api.getTrace(id);
  state.load(id, doc);
  highlight = null;
  renderAll();
  void refreshList();
}

function renderAll(): void {
  const status = $("status");
  status.replaceChildren();
  const banner = renderBanner(state);
  if (banner) status.appendChild(banner);
  if (state.emptyMarkingWarning) {
    const warn = document.createElement("div");
    warn.className = "banner warn";
    warn.textContent =
      "empty marking: the slice would erase everything — click badges in " +
      "the final configuration, or slice anyway";
    status.appendChild(warn);
  }

  const tracePane = $("trace-pane");
  tracePane.replaceChildren();
  if (state.doc) {
    tracePane.appendChild(renderVerdict(state.doc));
    const final = state.doc.configs.length - 1;
    state.doc.configs.forEach((config, idx) => {
      const panel = renderConfiguration(config, {
        markable: idx === final,
        markedCids: state.markedCids,
        markedPids: state.markedPids,
        onClick: (kind, id) => {
          const outcome = kind === "cid" ? state.toggleCid(id) : state.togglePid(id);
          if (outcome.ok) {
            state.emptyMarkingWarning = false;
            renderAll();
          }
        },
        highlight,
      });
      if (idx === state.cursor) panel.classList.add("cursor");
      tracePane.appendChild(panel);
    });
  }

  const slicePane = $("slice-pane");
  slicePane.replaceChildren();
  if (state.slice) {
    slicePane.appendChild(renderVerdict(state.slice.doc));
    state.slice.doc.configs.forEach((config, idx) => {
      const panel = renderConfiguration(config, {
        markable: false,
        onClick: (kind, id) => {
          highlight = { kind, id: state.originOf(kind, id) };
          renderAll();
        },
      });
      if (idx === state.cursor) panel.classList.add("cursor");
      slicePane.appendChild(panel);
    });
  }

  $("marking-view").textContent = exportMarking(state.marking());
  $("history-count").textContent = `${state.history.length} slice(s) this session`;
}

function wireControls(): void {
  $("slice-button").addEventListener("click", () => {
    void state
      .requestSlice(api, state.emptyMarkingWarning)
      .then(() => renderAll())
      .catch((err: unknown) => showError(err));
  });
  $("step-forward").addEventListener("click", () => {
    state.stepForward();
    renderAll();
  });
  $("step-back").addEventListener("click", () => {
    state.stepBack();
    renderAll();
  });
  $("refresh").addEventListener("click", () => void refreshList());
}

function showError(err: unknown): void {
  const status = $("status");
  const el = document.createElement("div");
  el.className = "banner error";
  el.textContent = err instanceof ApiError ? err.message : String(err);
  status.replaceChildren(el);
}

wireControls();
void refreshList();
