// Wire protocol: one JSON object per frame, "type" field mandatory.
// Mirrors the session service's message schema.

export type Mode = "gary" | "traditional";

export interface WordBox {
  word_index: number;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PageData {
  page_index: number;
  lines: WordBox[][];
}

export interface Segmentation {
  id: string;
  title: string;
  words: { token: string; start: number; end: number }[];
  sentences: [number, number][];
  phrases: { word_span: [number, number]; syllable_count: number }[];
  total_syllables: number;
  gulpease: number;
}

export interface HelloMessage {
  type: "hello";
  session_id: string;
  payload: {
    config: { mode: Mode; audio_rate_syll_s: number; grace_ms: number };
    text: { id: string; title: string };
  };
}

export interface PageMessage {
  type: "page";
  session_id: string;
  payload: {
    pages: PageData[];
    segmentation: Segmentation;
    viewport: { width_px: number; height_px: number; line_height_px: number; margin_px: number };
  };
}

export interface StatePayload {
  phrase_index: number;
  page_index: number;
  highlight: [number, number] | null;
  status: "playing" | "paused" | "finished";
  pause_reason: string | null;
  clock_ms: number;
}

export interface StateMessage {
  type: "state";
  session_id: string;
  seq: number;
  payload: StatePayload;
}

export interface MetricsMessage {
  type: "metrics";
  session_id: string;
  payload: Record<string, number>;
}

export interface ErrorMessage {
  type: "error";
  session_id: string | null;
  payload: { code: string; message: string };
}

export type ServerMessage =
  | HelloMessage
  | PageMessage
  | StateMessage
  | MetricsMessage
  | ErrorMessage;

export type ControlAction = "play" | "pause" | "skip_forward" | "skip_backward";

export interface GazeFrame {
  type: "gaze";
  payload: { t_ms: number; x: number; y: number; valid: boolean };
}

export interface ControlFrame {
  type: "control";
  payload: { action: ControlAction };
}

export interface MeasuredPageFrame {
  type: "page";
  payload: { pages: PageData[] };
}

export type ClientMessage = GazeFrame | ControlFrame | MeasuredPageFrame;

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (
    type === "hello" ||
    type === "page" ||
    type === "state" ||
    type === "metrics" ||
    type === "error"
  ) {
    return data as ServerMessage;
  }
  return null;
}
