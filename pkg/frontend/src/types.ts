export type Role = "candidate" | "hidden_reference" | "anchor" | "reference";

export interface Stimulus {
  id: string;
  wav: string;
  role: Role;
  pair?: string;
}

export interface Screen {
  screen_id: string;
  model: string;
  vowel: string;
  seed: number;
  stimuli: Stimulus[];
}

export interface TrialManifest {
  schema: 1;
  screens: Screen[];
}

/** One rater's raw 0-100 scores for one screen, keyed by stimulus id. */
export interface RaterScoreSet {
  rater_id: string;
  screen_id: string;
  scores: Record<string, number>;
}

/** The visible reference is played but never rated. */
export const RATED_ROLES: ReadonlySet<Role> = new Set([
  "candidate",
  "hidden_reference",
  "anchor",
]);

export function ratedStimuli(screen: Screen): Stimulus[] {
  return screen.stimuli.filter((s) => RATED_ROLES.has(s.role));
}

export function referenceStimulus(screen: Screen): Stimulus {
  const ref = screen.stimuli.find((s) => s.role === "reference");
  if (!ref) throw new Error(`screen ${screen.screen_id} has no reference`);
  return ref;
}
