// Transport bar policy: traditional mode exposes the four playback buttons,
// gary mode only start/stop (its pace is gaze-driven). Clicks map 1:1 to
// control frames; anything not exposed emits nothing.

import type { ControlAction, ControlFrame, Mode } from "./protocol.js";

const TRADITIONAL_ACTIONS: ControlAction[] = [
  "play",
  "pause",
  "skip_backward",
  "skip_forward",
];
const GARY_ACTIONS: ControlAction[] = ["play", "pause"];

export function actionsFor(mode: Mode): ControlAction[] {
  return mode === "traditional" ? [...TRADITIONAL_ACTIONS] : [...GARY_ACTIONS];
}

export function controlFrame(mode: Mode, action: ControlAction): ControlFrame | null {
  if (!actionsFor(mode).includes(action)) return null;
  return { type: "control", payload: { action } };
}

export const BUTTON_LABELS: Record<ControlAction, string> = {
  play: "▶ play",
  pause: "⏸ pause",
  skip_backward: "⏮ back",
  skip_forward: "⏭ forward",
};
