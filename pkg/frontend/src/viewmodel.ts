// The single source of truth for everything visible. The UI never mutates
// reading state locally: every change flows from a received message through
// reduce(). State frames apply strictly in sequence-number order;
// out-of-order frames are buffered until the gap closes.

import type {
  PageData,
  Segmentation,
  ServerMessage,
  StateMessage,
  StatePayload,
} from "./protocol.js";

export interface ViewModel {
  sessionId: string | null;
  mode: "gary" | "traditional" | null;
  title: string;
  pages: PageData[];
  segmentation: Segmentation | null;
  lineHeightPx: number;
  state: StatePayload | null;
  renderedSeq: number; // seq of the state currently reflected, -1 before any
  metrics: Record<string, number> | null;
  error: { code: string; message: string } | null;
}

export function initialViewModel(): ViewModel {
  return {
    sessionId: null,
    mode: null,
    title: "",
    pages: [],
    segmentation: null,
    lineHeightPx: 36,
    state: null,
    renderedSeq: -1,
    metrics: null,
    error: null,
  };
}

export interface Reducer {
  vm: ViewModel;
  pending: Map<number, StateMessage>;
}

export function createReducer(): Reducer {
  return { vm: initialViewModel(), pending: new Map() };
}

export function reduce(r: Reducer, msg: ServerMessage): ViewModel {
  const vm = r.vm;
  switch (msg.type) {
    case "hello":
      vm.sessionId = msg.session_id;
      vm.mode = msg.payload.config.mode;
      vm.title = msg.payload.text.title || msg.payload.text.id;
      break;
    case "page":
      vm.pages = msg.payload.pages;
      vm.segmentation = msg.payload.segmentation;
      vm.lineHeightPx = msg.payload.viewport.line_height_px;
      break;
    case "state": {
      r.pending.set(msg.seq, msg);
      let next = vm.renderedSeq + 1;
      while (r.pending.has(next)) {
        const frame = r.pending.get(next)!;
        r.pending.delete(next);
        vm.state = frame.payload;
        vm.renderedSeq = next;
        next += 1;
      }
      break;
    }
    case "metrics":
      vm.metrics = msg.payload;
      break;
    case "error":
      vm.error = msg.payload;
      break;
  }
  return vm;
}

export function highlightRange(vm: ViewModel): [number, number] | null {
  return vm.state?.highlight ?? null;
}

export function pauseBadge(vm: ViewModel): string | null {
  if (!vm.state || vm.state.status !== "paused") return null;
  switch (vm.state.pause_reason) {
    case "gaze_away":
      return "paused — look back at the text";
    case "no_permit":
      return "paused — read ahead to continue";
    case "control":
      return "paused";
    default:
      return vm.state.status === "paused" ? "ready — press play" : null;
  }
}

export function phraseText(vm: ViewModel, span: [number, number]): string {
  if (!vm.segmentation) return "";
  return vm.segmentation.words
    .slice(span[0], span[1] + 1)
    .map((w) => w.token)
    .join(" ");
}
