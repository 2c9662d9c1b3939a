import type { Screen, Stimulus, TrialManifest } from "../src/types.js";

const PAIRS = [
  "logmel+mse", "logmel+cos", "logmel_hf+mse", "mfcc12+mse", "mfcc12+cos",
  "mfcc12_hf+manhattan", "mfcc12_cmvn+chebyshev", "mfcc22+mse",
  "mfcc22_hf+cos", "mfcc22_hf_cmvn+manhattan",
];

export function makeScreen(screenId: string, vowel: string): Screen {
  const stimuli: Stimulus[] = [];
  // ten candidates, one hidden reference, one anchor, in a fixed shuffle,
  // then the visible reference last: the layout the study builder emits
  const roles: Array<Partial<Stimulus>> = [
    ...PAIRS.map((pair) => ({ role: "candidate" as const, pair })),
    { role: "hidden_reference" as const },
    { role: "anchor" as const },
  ];
  roles.forEach((r, i) => {
    const id = `s${String(i).padStart(2, "0")}`;
    stimuli.push({
      id,
      wav: `audio/${screenId}_${id}.wav`,
      role: r.role!,
      ...(r.pair ? { pair: r.pair } : {}),
    });
  });
  stimuli.push({
    id: "ref",
    wav: `audio/${screenId}_ref.wav`,
    role: "reference",
  });
  return { screen_id: screenId, model: "adult", vowel, seed: 7, stimuli };
}

export function makeManifest(vowels: string[] = ["a", "e"]): TrialManifest {
  return {
    schema: 1,
    screens: vowels.map((v) => makeScreen(`adult_${v}`, v)),
  };
}
