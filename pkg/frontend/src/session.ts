import type { RaterScoreSet, Screen, TrialManifest } from "./types.js";
import { ratedStimuli } from "./types.js";

export const DEFAULT_SLIDER = 50;

export class IncompleteSession extends Error {
  constructor(public readonly unfinished: string[]) {
    super(`unfinished screens: ${unfinished.join(", ")}`);
  }
}

export interface ScreenState {
  screen_id: string;
  /** Rated stimulus ids in presentation order (the manifest's own order). */
  order: string[];
  sliders: Record<string, number>;
  /** Every stimulus on the screen, the visible reference included. */
  played: Set<string>;
  /** A slider counts once moved or explicitly confirmed at its value. */
  settled: Set<string>;
}

function freshState(screen: Screen): ScreenState {
  const order = ratedStimuli(screen).map((s) => s.id);
  const sliders: Record<string, number> = {};
  for (const id of order) sliders[id] = DEFAULT_SLIDER;
  return {
    screen_id: screen.screen_id,
    order,
    sliders,
    played: new Set(),
    settled: new Set(),
  };
}

/** Rating state for one rater working through a manifest, screen by screen. */
export class Session {
  readonly raterId: string;
  readonly manifest: TrialManifest;
  private readonly states: Map<string, ScreenState>;

  constructor(manifest: TrialManifest, raterId: string) {
    if (!raterId.trim()) throw new Error("rater_id must not be empty");
    this.manifest = manifest;
    this.raterId = raterId.trim();
    this.states = new Map(
      manifest.screens.map((s) => [s.screen_id, freshState(s)]),
    );
  }

  state(screenId: string): ScreenState {
    const st = this.states.get(screenId);
    if (!st) throw new Error(`unknown screen ${screenId}`);
    return st;
  }

  private screen(screenId: string): Screen {
    const screen = this.manifest.screens.find(
      (s) => s.screen_id === screenId,
    );
    if (!screen) throw new Error(`unknown screen ${screenId}`);
    return screen;
  }

  markPlayed(screenId: string, stimulusId: string): void {
    const screen = this.screen(screenId);
    if (!screen.stimuli.some((s) => s.id === stimulusId)) {
      throw new Error(`screen ${screenId} has no stimulus ${stimulusId}`);
    }
    this.state(screenId).played.add(stimulusId);
  }

  setSlider(screenId: string, stimulusId: string, value: number): void {
    const st = this.state(screenId);
    if (!(stimulusId in st.sliders)) {
      throw new Error(`screen ${screenId}: ${stimulusId} is not rated`);
    }
    if (!Number.isFinite(value) || value < 0 || value > 100) {
      throw new Error(`score must be in [0, 100], got ${value}`);
    }
    st.sliders[stimulusId] = value;
    st.settled.add(stimulusId);
  }

  /** Accept the slider where it stands (a deliberate 50 is a valid rating). */
  confirmSlider(screenId: string, stimulusId: string): void {
    const st = this.state(screenId);
    if (!(stimulusId in st.sliders)) {
      throw new Error(`screen ${screenId}: ${stimulusId} is not rated`);
    }
    st.settled.add(stimulusId);
  }

  isScreenComplete(screenId: string): boolean {
    const screen = this.screen(screenId);
    const st = this.state(screenId);
    return (
      screen.stimuli.every((s) => st.played.has(s.id)) &&
      st.order.every((id) => st.settled.has(id))
    );
  }

  unfinishedScreens(): string[] {
    return this.manifest.screens
      .map((s) => s.screen_id)
      .filter((id) => !this.isScreenComplete(id));
  }

  get complete(): boolean {
    return this.unfinishedScreens().length === 0;
  }

  /** The submission payload; refuses while any screen is unfinished. */
  toScoreSets(): RaterScoreSet[] {
    const unfinished = this.unfinishedScreens();
    if (unfinished.length) throw new IncompleteSession(unfinished);
    return this.manifest.screens.map((screen) => {
      const st = this.state(screen.screen_id);
      const scores: Record<string, number> = {};
      for (const id of st.order) scores[id] = st.sliders[id] ?? DEFAULT_SLIDER;
      return {
        rater_id: this.raterId,
        screen_id: screen.screen_id,
        scores,
      };
    });
  }
}
