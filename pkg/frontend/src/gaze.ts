// Pointer-as-gaze: samples the pointer at 60 Hz and emits gaze frames with
// a monotonic clock. Positions outside the reading area become valid:false
// samples, which is how "looking away" is signalled. A camera-gaze adapter
// can replace this by feeding the same emit callback.

import type { GazeFrame } from "./protocol.js";

export const SAMPLE_INTERVAL_MS = 1000 / 60;

export interface PointerState {
  x: number;
  y: number;
  inside: boolean;
}

export class PointerGazeSampler {
  private pointer: PointerState = { x: 0, y: 0, inside: false };
  private timer: ReturnType<typeof setInterval> | null = null;
  private lastT = 0;

  constructor(
    private emit: (frame: GazeFrame) => void,
    private now: () => number = () => performance.now(),
  ) {}

  update(x: number, y: number, inside: boolean): void {
    this.pointer = { x, y, inside };
  }

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => this.sample(), SAMPLE_INTERVAL_MS);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private sample(): void {
    // monotonic even if the clock stalls: the service rejects reused stamps
    let t = this.now();
    if (t <= this.lastT) t = this.lastT + SAMPLE_INTERVAL_MS / 4;
    this.lastT = t;
    this.emit({
      type: "gaze",
      payload: {
        t_ms: t,
        x: this.pointer.x,
        y: this.pointer.y,
        valid: this.pointer.inside,
      },
    });
  }
}

/** Wire DOM pointer events of the reading area into a sampler. */
export function bindPointer(area: HTMLElement, sampler: PointerGazeSampler): void {
  area.addEventListener("pointermove", (ev) => {
    const rect = area.getBoundingClientRect();
    sampler.update(ev.clientX - rect.left, ev.clientY - rect.top, true);
  });
  area.addEventListener("pointerleave", () => {
    sampler.update(0, 0, false);
  });
}
