import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { PointerGazeSampler, SAMPLE_INTERVAL_MS } from "../src/gaze.js";
import type { GazeFrame, ServerMessage, WordBox } from "../src/protocol.js";
import { createReducer, highlightRange, reduce } from "../src/viewmodel.js";

// Scripted stand-in for the session service: phrase n advances once enough
// gaze frames land on the words after the highlight, mirroring the engine's
// look-ahead gate closely enough to exercise the client loop.
class MockGateServer {
  private phrase = 0;
  private hits = 0;
  private seq = 0;
  finished = false;

  constructor(
    private boxes: WordBox[],
    private phrases: [number, number][],
    private onMessage: (msg: ServerMessage) => void,
    private hitsToAdvance = 6,
  ) {}

  start(): void {
    this.push();
  }

  receive(frame: GazeFrame): void {
    if (this.finished || !frame.payload.valid) return;
    const [, last] = this.phrases[this.phrase];
    const lookahead = this.boxes.filter((b) => b.word_index > last);
    if (lookahead.length > 0) {
      const inside = lookahead.some(
        (b) =>
          frame.payload.x >= b.x &&
          frame.payload.x <= b.x + b.w &&
          frame.payload.y >= b.y &&
          frame.payload.y <= b.y + b.h,
      );
      if (!inside) return;
    }
    // no look-ahead region on the final phrase: it plays out and finishes
    this.hits += 1;
    if (this.hits >= this.hitsToAdvance) {
      this.hits = 0;
      this.phrase += 1;
      if (this.phrase >= this.phrases.length) {
        this.finished = true;
        this.onMessage({
          type: "metrics",
          session_id: "mock",
          payload: { pause_count: 0, effective_speed_syll_s: 2.4 },
        });
        return;
      }
      this.push();
    }
  }

  private push(): void {
    this.onMessage({
      type: "state",
      session_id: "mock",
      seq: this.seq++,
      payload: {
        phrase_index: this.phrase,
        page_index: 0,
        highlight: this.phrases[this.phrase],
        status: "playing",
        pause_reason: null,
        clock_ms: this.seq * 100,
      },
    });
  }
}

describe("client live loop against a scripted server", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("holding the pointer over the next phrase advances the highlight to the end", () => {
    const boxes: WordBox[] = Array.from({ length: 8 }, (_, i) => ({
      word_index: i,
      x: i * 100,
      y: 0,
      w: 90,
      h: 36,
    }));
    const phrases: [number, number][] = [
      [0, 1],
      [2, 3],
      [4, 5],
      [6, 7],
    ];
    const reducer = createReducer();
    const seen: number[] = [];
    const server = new MockGateServer(boxes, phrases, (msg) => {
      reduce(reducer, msg);
      const hl = highlightRange(reducer.vm);
      if (hl && seen[seen.length - 1] !== hl[0]) seen.push(hl[0]);
    });
    let t = 0;
    const sampler = new PointerGazeSampler(
      (frame) => server.receive(frame),
      () => (t += SAMPLE_INTERVAL_MS),
    );
    server.start();
    sampler.start();
    for (let step = 0; step < 600 && !server.finished; step++) {
      const hl = highlightRange(reducer.vm);
      if (hl) {
        const next = boxes[Math.min(hl[1] + 1, boxes.length - 1)];
        sampler.update(next.x + next.w / 2, next.y + next.h / 2, true);
      }
      vi.advanceTimersByTime(SAMPLE_INTERVAL_MS);
    }
    sampler.stop();
    expect(server.finished).toBe(true);
    expect(seen).toEqual([0, 2, 4, 6]);
    expect(reducer.vm.metrics?.pause_count).toBe(0);
  });
});
