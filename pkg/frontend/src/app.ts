import { parseManifest } from "./manifest.js";
import { Session } from "./session.js";
import {
  renderError,
  renderScreen,
  renderSubmit,
  renderUnfinished,
} from "./render.js";
import type { Screen, TrialManifest } from "./types.js";

// Query parameters: ?manifest=<url>&rater=<id>[&submit=<url>]
// Audio is wired here, not in the markup, so stimulus file paths never
// appear in the DOM.

interface AppConfig {
  manifestUrl: string;
  raterId: string;
  submitUrl: string | null;
}

function readConfig(): AppConfig {
  const params = new URLSearchParams(window.location.search);
  const manifestUrl = params.get("manifest");
  const raterId = params.get("rater");
  if (!manifestUrl) throw new Error("missing ?manifest=<url> query parameter");
  if (!raterId || !raterId.trim()) {
    throw new Error("missing ?rater=<id> query parameter");
  }
  return {
    manifestUrl: new URL(manifestUrl, window.location.href).toString(),
    raterId: raterId.trim(),
    submitUrl: params.get("submit"),
  };
}

class App {
  private readonly root: HTMLElement;
  private readonly cfg: AppConfig;
  private session!: Session;
  private manifest!: TrialManifest;
  private audio = new Map<string, HTMLAudioElement>();
  private screenIndex = 0;
  private view: "rating" | "submit" = "rating";

  constructor(root: HTMLElement, cfg: AppConfig) {
    this.root = root;
    this.cfg = cfg;
  }

  async start(): Promise<void> {
    const resp = await fetch(this.cfg.manifestUrl);
    if (!resp.ok) {
      throw new Error(`manifest fetch failed: HTTP ${resp.status}`);
    }
    this.manifest = parseManifest(await resp.json());
    this.session = new Session(this.manifest, this.cfg.raterId);
    for (const screen of this.manifest.screens) {
      for (const st of screen.stimuli) {
        const key = `${screen.screen_id}/${st.id}`;
        const el = new Audio(
          new URL(st.wav, this.cfg.manifestUrl).toString(),
        );
        el.preload = "auto";
        el.addEventListener("play", () => {
          this.session.markPlayed(screen.screen_id, st.id);
          this.rerender();
        });
        this.audio.set(key, el);
      }
    }
    this.rerender();
  }

  private currentScreen(): Screen {
    const screen = this.manifest.screens[this.screenIndex];
    if (!screen) throw new Error("screen index out of range");
    return screen;
  }

  private stopAll(): void {
    for (const el of this.audio.values()) {
      el.pause();
      el.currentTime = 0;
    }
  }

  private rerender(): void {
    if (this.view === "submit") {
      this.root.innerHTML = renderSubmit(
        this.session.raterId,
        this.manifest.screens.length,
        this.cfg.submitUrl,
      );
      this.bindSubmit();
      return;
    }
    const screen = this.currentScreen();
    this.root.innerHTML = renderScreen(
      screen,
      this.session.state(screen.screen_id),
      this.screenIndex,
      this.manifest.screens.length,
      this.session.isScreenComplete(screen.screen_id),
    );
    this.bindScreen(screen);
  }

  private bindScreen(screen: Screen): void {
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>("[data-play]")) {
      btn.addEventListener("click", () => {
        const id = btn.dataset.play!;
        this.stopAll();
        void this.audio.get(`${screen.screen_id}/${id}`)?.play();
      });
    }
    for (const slider of this.root.querySelectorAll<HTMLInputElement>(
      "[data-slider]",
    )) {
      const out = slider.parentElement?.querySelector("output");
      slider.addEventListener("input", () => {
        if (out) out.textContent = slider.value;
      });
      slider.addEventListener("change", () => {
        this.session.setSlider(
          screen.screen_id,
          slider.dataset.slider!,
          Number(slider.value),
        );
        this.rerender();
      });
    }
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>(
      "[data-confirm]",
    )) {
      btn.addEventListener("click", () => {
        this.session.confirmSlider(screen.screen_id, btn.dataset.confirm!);
        this.rerender();
      });
    }
    this.root.querySelector("[data-next]")?.addEventListener("click", () => {
      if (!this.session.isScreenComplete(screen.screen_id)) return;
      this.stopAll();
      if (this.screenIndex + 1 < this.manifest.screens.length) {
        this.screenIndex += 1;
      } else if (this.session.complete) {
        this.view = "submit";
      } else {
        this.root.innerHTML = renderUnfinished(this.session.unfinishedScreens());
        return;
      }
      this.rerender();
    });
  }

  private bindSubmit(): void {
    const status = this.root.querySelector<HTMLElement>("[data-status]");
    const payload = () => JSON.stringify(this.session.toScoreSets(), null, 2);

    this.root.querySelector("[data-submit]")?.addEventListener("click", () => {
      void (async () => {
        try {
          const resp = await fetch(this.cfg.submitUrl!, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: payload(),
          });
          if (status) {
            status.textContent = resp.ok
              ? "Scores submitted. Thank you."
              : `Submission failed: HTTP ${resp.status}`;
          }
        } catch (err) {
          if (status) status.textContent = `Submission failed: ${String(err)}`;
        }
      })();
    });

    this.root.querySelector("[data-download]")?.addEventListener("click", () => {
      const blob = new Blob([payload()], { type: "application/json" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = `scores_${this.session.raterId}.json`;
      a.click();
      URL.revokeObjectURL(a.href);
      if (status) status.textContent = "Scores downloaded.";
    });
  }
}

function main(): void {
  const root = document.getElementById("app");
  if (!root) return;
  try {
    const cfg = readConfig();
    const app = new App(root, cfg);
    app.start().catch((err) => {
      root.innerHTML = renderError(String(err instanceof Error ? err.message : err));
    });
  } catch (err) {
    root.innerHTML = renderError(String(err instanceof Error ? err.message : err));
  }
}

main();
