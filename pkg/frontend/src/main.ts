import { PointerGazeSampler, bindPointer } from "./gaze.js";
import { parseServerMessage, type ClientMessage } from "./protocol.js";
import { measurePages, renderPage, setTokens, type ViewElements } from "./render.js";
import { PhraseVoice } from "./speech.js";
import { BUTTON_LABELS, actionsFor, controlFrame } from "./transport.js";
import { createReducer, phraseText, reduce } from "./viewmodel.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function main(): void {
  const els: ViewElements = {
    title: el("title"),
    area: el("reading-area"),
    badge: el("badge"),
    metrics: el("metrics"),
    errorPanel: el("error-panel"),
  };
  const bar = el("transport");
  const reducer = createReducer();
  const voice = new PhraseVoice();
  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  const socket = new WebSocket(wsUrl);
  const send = (msg: ClientMessage) => {
    if (socket.readyState === WebSocket.OPEN) socket.send(JSON.stringify(msg));
  };
  const sampler = new PointerGazeSampler((frame) => send(frame));
  bindPointer(els.area, sampler);

  let measured = false;
  let lastSpokenSeq = -1;

  socket.addEventListener("message", (ev) => {
    const msg = parseServerMessage(ev.data as string);
    if (!msg) return;
    const vm = reduce(reducer, msg);

    if (msg.type === "hello") {
      els.title.textContent = vm.title;
      buildTransport();
    }
    if (msg.type === "page" && vm.segmentation) {
      setTokens(vm.segmentation.words);
      renderPage(els, vm);
      if (!measured) {
        // report true glyph geometry once, before playback starts
        send(measurePages(els, vm));
        measured = true;
      }
      if (vm.mode === "gary") sampler.start();
    }
    if (msg.type === "state" || msg.type === "metrics" || msg.type === "error") {
      renderPage(els, vm);
      if (
        vm.state?.status === "playing" &&
        vm.state.highlight &&
        vm.renderedSeq !== lastSpokenSeq
      ) {
        lastSpokenSeq = vm.renderedSeq;
        voice.speak(phraseText(vm, vm.state.highlight));
      }
      if (vm.state?.status === "finished") {
        voice.stop();
        sampler.stop();
      }
    }
  });

  socket.addEventListener("close", () => {
    sampler.stop();
    voice.stop();
    els.badge.textContent = "disconnected";
    els.badge.className = "badge";
  });

  function buildTransport(): void {
    bar.textContent = "";
    const mode = reducer.vm.mode ?? "gary";
    for (const action of actionsFor(mode)) {
      const button = document.createElement("button");
      button.textContent = BUTTON_LABELS[action];
      button.dataset.action = action;
      button.addEventListener("click", () => {
        const frame = controlFrame(mode, action);
        if (frame) send(frame);
      });
      bar.appendChild(button);
    }
  }
}

main();
