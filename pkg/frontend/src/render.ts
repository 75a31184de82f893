// DOM rendering of the reading view: one page at a time, at most seven
// lines, active phrase on a yellow background, pause-reason badge. After
// the first render the real glyph boxes are measured and reported back so
// the server's AOIs match what is actually on screen.

import type { MeasuredPageFrame, PageData, WordBox } from "./protocol.js";
import { highlightRange, pauseBadge, ViewModel } from "./viewmodel.js";

export interface ViewElements {
  title: HTMLElement;
  area: HTMLElement;
  badge: HTMLElement;
  metrics: HTMLElement;
  errorPanel: HTMLElement;
}

let renderedPage = -1;

export function renderPage(els: ViewElements, vm: ViewModel): void {
  const pageIndex = vm.state?.page_index ?? 0;
  if (pageIndex !== renderedPage) {
    buildPage(els.area, vm.pages[pageIndex]);
    renderedPage = pageIndex;
  }
  applyHighlight(els.area, vm);
  const badge = pauseBadge(vm);
  els.badge.textContent = badge ?? "";
  els.badge.className = badge ? `badge badge-${vm.state?.pause_reason ?? "idle"}` : "badge hidden";
  if (vm.error) {
    els.errorPanel.textContent = `${vm.error.code}: ${vm.error.message}`;
    els.errorPanel.classList.remove("hidden");
  }
  if (vm.metrics) {
    const speed = vm.metrics["effective_speed_syll_s"];
    const pauses = vm.metrics["pause_count"];
    els.metrics.textContent =
      `finished — ${speed.toFixed(2)} syllables/s, ${pauses} pause(s)`;
    els.metrics.classList.remove("hidden");
  }
}

function buildPage(area: HTMLElement, page: PageData | undefined): void {
  area.textContent = "";
  if (!page) return;
  for (const line of page.lines) {
    const div = document.createElement("div");
    div.className = "line";
    for (const box of line) {
      const span = document.createElement("span");
      span.className = "word";
      span.dataset.wordIndex = String(box.word_index);
      span.textContent = wordToken(box.word_index);
      div.appendChild(span);
      div.appendChild(document.createTextNode(" "));
    }
    area.appendChild(div);
  }
}

let tokens: string[] = [];

export function setTokens(words: { token: string }[]): void {
  tokens = words.map((w) => w.token);
  renderedPage = -1;
}

function wordToken(index: number): string {
  return tokens[index] ?? "";
}

function applyHighlight(area: HTMLElement, vm: ViewModel): void {
  const range = highlightRange(vm);
  area.querySelectorAll<HTMLElement>(".word").forEach((el) => {
    const idx = Number(el.dataset.wordIndex);
    const active = range !== null && idx >= range[0] && idx <= range[1];
    el.classList.toggle("active", active);
  });
}

/** Measure every page's real glyph boxes, relative to the reading area. */
export function measurePages(els: ViewElements, vm: ViewModel): MeasuredPageFrame {
  const origin = els.area.getBoundingClientRect();
  const pages: PageData[] = [];
  const current = renderedPage;
  for (const page of vm.pages) {
    buildPage(els.area, page);
    const lines: WordBox[][] = [];
    for (const div of Array.from(els.area.children)) {
      const line: WordBox[] = [];
      for (const el of Array.from(div.querySelectorAll<HTMLElement>(".word"))) {
        const r = el.getBoundingClientRect();
        line.push({
          word_index: Number(el.dataset.wordIndex),
          x: r.left - origin.left,
          y: r.top - origin.top,
          w: r.width,
          h: r.height,
        });
      }
      if (line.length) lines.push(line);
    }
    pages.push({ page_index: page.page_index, lines });
  }
  renderedPage = -1; // force rebuild of the visible page
  if (current >= 0) buildPage(els.area, vm.pages[current]);
  return { type: "page", payload: { pages } };
}
