import { z } from "zod";

import type { Screen, TrialManifest } from "./types.js";

export class ManifestError extends Error {}

const stimulusSchema = z.object({
  id: z.string().min(1),
  wav: z.string().min(1),
  role: z.enum(["candidate", "hidden_reference", "anchor", "reference"]),
  pair: z.string().min(1).optional(),
});

const screenSchema = z.object({
  screen_id: z.string().min(1),
  model: z.string().min(1),
  vowel: z.string().min(1),
  seed: z.number(),
  stimuli: z.array(stimulusSchema).min(1),
});

const manifestSchema = z.object({
  schema: z.literal(1),
  screens: z.array(screenSchema).min(1),
});

// the shape checks above plus the structural rules the analysis side enforces:
// unique ids, exactly one of each anchor role, at least one candidate
function checkScreen(screen: Screen): void {
  const ids = new Set<string>();
  const roleCount: Record<string, number> = {};
  for (const st of screen.stimuli) {
    if (ids.has(st.id)) {
      throw new ManifestError(
        `screen ${screen.screen_id}: duplicate stimulus id ${st.id}`,
      );
    }
    ids.add(st.id);
    roleCount[st.role] = (roleCount[st.role] ?? 0) + 1;
    if (st.role === "candidate" && !st.pair) {
      throw new ManifestError(
        `screen ${screen.screen_id}: candidate ${st.id} without a pair`,
      );
    }
  }
  for (const role of ["reference", "hidden_reference", "anchor"]) {
    if ((roleCount[role] ?? 0) !== 1) {
      throw new ManifestError(
        `screen ${screen.screen_id}: needs exactly one ${role}`,
      );
    }
  }
  if ((roleCount["candidate"] ?? 0) < 1) {
    throw new ManifestError(
      `screen ${screen.screen_id}: needs at least one candidate`,
    );
  }
}

export function parseManifest(doc: unknown): TrialManifest {
  const parsed = manifestSchema.safeParse(doc);
  if (!parsed.success) {
    const first = parsed.error.issues[0];
    const where = first && first.path.length ? ` at ${first.path.join(".")}` : "";
    throw new ManifestError(
      `manifest does not match the schema${where}: ${first?.message ?? "invalid"}`,
    );
  }
  const manifest = parsed.data as TrialManifest;
  const seen = new Set<string>();
  for (const screen of manifest.screens) {
    if (seen.has(screen.screen_id)) {
      throw new ManifestError(`duplicate screen_id ${screen.screen_id}`);
    }
    seen.add(screen.screen_id);
    checkScreen(screen);
  }
  return manifest;
}
