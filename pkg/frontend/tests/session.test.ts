import { describe, expect, it } from "vitest";

import { IncompleteSession, Session } from "../src/session.js";
import { ratedStimuli } from "../src/types.js";
import { makeManifest } from "./helpers.js";

function playEverything(session: Session, screenId: string): void {
  const screen = session.manifest.screens.find((s) => s.screen_id === screenId)!;
  for (const st of screen.stimuli) session.markPlayed(screenId, st.id);
}

describe("Session", () => {
  it("starts with every slider at 50 and nothing complete", () => {
    const s = new Session(makeManifest(), "r1");
    const st = s.state("adult_a");
    expect(st.order).toHaveLength(12);
    expect(Object.values(st.sliders).every((v) => v === 50)).toBe(true);
    expect(s.complete).toBe(false);
    expect(s.unfinishedScreens()).toEqual(["adult_a", "adult_e"]);
  });

  it("requires every stimulus played, the visible reference included", () => {
    const s = new Session(makeManifest(["a"]), "r1");
    const st = s.state("adult_a");
    for (const id of st.order) {
      s.markPlayed("adult_a", id);
      s.confirmSlider("adult_a", id);
    }
    expect(s.isScreenComplete("adult_a")).toBe(false); // "ref" never played
    s.markPlayed("adult_a", "ref");
    expect(s.isScreenComplete("adult_a")).toBe(true);
  });

  it("requires every slider touched or confirmed", () => {
    const s = new Session(makeManifest(["a"]), "r1");
    playEverything(s, "adult_a");
    expect(s.isScreenComplete("adult_a")).toBe(false);
    const st = s.state("adult_a");
    for (const id of st.order.slice(1)) s.setSlider("adult_a", id, 60);
    expect(s.isScreenComplete("adult_a")).toBe(false); // one slider untouched
    s.confirmSlider("adult_a", st.order[0]!);
    expect(s.isScreenComplete("adult_a")).toBe(true);
  });

  it("validates slider values and stimulus ids", () => {
    const s = new Session(makeManifest(["a"]), "r1");
    expect(() => s.setSlider("adult_a", "s00", 101)).toThrow(/\[0, 100\]/);
    expect(() => s.setSlider("adult_a", "s00", -1)).toThrow(/\[0, 100\]/);
    expect(() => s.setSlider("adult_a", "nope", 10)).toThrow(/not rated/);
    expect(() => s.setSlider("adult_a", "ref", 10)).toThrow(/not rated/);
    expect(() => s.markPlayed("adult_a", "nope")).toThrow(/no stimulus/);
    expect(() => s.state("zzz")).toThrow(/unknown screen/);
    expect(() => new Session(makeManifest(), "  ")).toThrow(/rater_id/);
  });

  it("refuses to build score sets while screens are unfinished", () => {
    const s = new Session(makeManifest(), "r1");
    playEverything(s, "adult_a");
    for (const id of s.state("adult_a").order) s.confirmSlider("adult_a", id);
    expect(s.isScreenComplete("adult_a")).toBe(true);
    try {
      s.toScoreSets();
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(IncompleteSession);
      expect((err as IncompleteSession).unfinished).toEqual(["adult_e"]);
    }
  });

  it("emits one score set per screen covering the rated ids exactly", () => {
    const manifest = makeManifest();
    const s = new Session(manifest, "rater-7");
    for (const screen of manifest.screens) {
      playEverything(s, screen.screen_id);
      for (const id of s.state(screen.screen_id).order) {
        s.confirmSlider(screen.screen_id, id);
      }
    }
    const sets = s.toScoreSets();
    expect(sets).toHaveLength(2);
    for (const [i, set] of sets.entries()) {
      const screen = manifest.screens[i]!;
      expect(set.rater_id).toBe("rater-7");
      expect(set.screen_id).toBe(screen.screen_id);
      const rated = ratedStimuli(screen).map((st) => st.id);
      expect(Object.keys(set.scores).sort()).toEqual([...rated].sort());
      expect("ref" in set.scores).toBe(false);
      // untouched-but-confirmed sliders submit their default
      expect(Object.values(set.scores).every((v) => v === 50)).toBe(true);
    }
  });

  it("keeps moved slider values in the submission", () => {
    const s = new Session(makeManifest(["a"]), "r1");
    playEverything(s, "adult_a");
    const ids = s.state("adult_a").order;
    ids.forEach((id, i) => s.setSlider("adult_a", id, 5 + i * 7));
    const [set] = s.toScoreSets();
    ids.forEach((id, i) => expect(set!.scores[id]).toBe(5 + i * 7));
  });
});
