// Shapes of the versioned trace documents served by the backend.

export const SCHEMA_VERSION = 1;

export interface AgentEntry {
  pid: number;
  kind: string;
  printedForm: string;
  childPids?: number[];
  dot?: boolean;
  origin?: number;
}

export interface StoreEntry {
  cid: number;
  printedForm: string;
  origin?: number;
}

export interface ConfigEntry {
  id: number;
  hiddenVars: string[];
  agents: AgentEntry[];
  store: StoreEntry[];
  storeStatus: string;
}

export interface LabelEntry {
  from: number;
  to: number;
  pid: number;
  branch: number | null;
  children: number[];
  addedCids: number[];
  newHidden: string[];
}

export interface TraceDoc {
  version: number;
  kind: string;
  sliced?: boolean;
  mode: string;
  meta: Record<string, unknown>;
  configs: ConfigEntry[];
  labels: LabelEntry[];
  verdict: string;
  answer: { printedForm: string; bindings: Record<string, string> } | null;
  marking?: { cids: number[]; pids: number[] };
  violation?: { index: number; kind: string; assertion: string };
}

export interface MarkingSelection {
  cids: number[];
  pids: number[];
}

export interface RunOutcome {
  traces: string[];
  answers: string[];
  verdicts: string[];
  violation?: { index: number; kind: string; assertion: string } | null;
  slicedTrace?: string | null;
}
