// Optional browser speech: voices the highlighted phrase as it changes.
// Purely cosmetic; the engine clock is authoritative and nothing here
// feeds back into reading state.

export class PhraseVoice {
  private lastSpoken: string | null = null;
  enabled: boolean;

  constructor(private lang = "it-IT") {
    this.enabled =
      typeof window !== "undefined" && "speechSynthesis" in window;
  }

  speak(text: string): void {
    if (!this.enabled || !text || text === this.lastSpoken) return;
    this.lastSpoken = text;
    const u = new SpeechSynthesisUtterance(text);
    u.lang = this.lang;
    try {
      window.speechSynthesis.cancel();
      window.speechSynthesis.speak(u);
    } catch {
      this.enabled = false;
    }
  }

  stop(): void {
    if (!this.enabled) return;
    try {
      window.speechSynthesis.cancel();
    } catch {
      /* ignore */
    }
    this.lastSpoken = null;
  }
}
