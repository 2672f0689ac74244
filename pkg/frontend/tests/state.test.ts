import { describe, expect, it } from "vitest";

import {
  acceptSuggestion,
  addTrp,
  applyResponse,
  canEvaluate,
  deleteTrp,
  initialState,
  loadPreset,
  moveTrp,
  rejectSuggestion,
  snapToWall,
} from "../src/state.js";
import { campaignResponse, mixedFactoryPreset } from "./helpers.js";

function loaded() {
  return loadPreset(initialState(), mixedFactoryPreset());
}

describe("preset loading", () => {
  it("copies the 12 markers and hall", () => {
    const s = loaded();
    expect(s.trps).toHaveLength(12);
    expect(s.presetName).toBe("inf-dh-mixed-12");
    expect(s.scenario?.x_len_m).toBe(120);
    expect(s.stale).toBe(false);
    expect(canEvaluate(s)).toBe(true);
  });
});

describe("floorplan edits", () => {
  it("moving a marker keeps it and marks results stale", () => {
    let s = applyResponse(loaded(), campaignResponse(13.11, [58, 27, 8]), loaded().trps);
    expect(s.stale).toBe(false);
    s = moveTrp(s, 0, 10, 10);
    expect(s.trps[0]).toMatchObject({ x: 10, y: 10 });
    expect(s.stale).toBe(true);
    expect(s.pendingSuggestions).toHaveLength(0); // edits void suggestions
  });

  it("dragging outside snaps back inside and flags the rejection", () => {
    const s = moveTrp(loaded(), 0, 500, -20);
    expect(s.trps[0]!.x).toBe(120);
    expect(s.trps[0]!.y).toBe(0);
    expect(s.rejectedDrop).toBe(true);
  });

  it("adding outside the hall is rejected with a cue", () => {
    const s = addTrp(loaded(), 130, 10);
    expect(s.trps).toHaveLength(12);
    expect(s.rejectedDrop).toBe(true);
  });

  it("wall snap projects to the nearest wall", () => {
    expect(snapToWall(mixedFactoryPreset().scenario, 60, 2)).toEqual([60, 0]);
    expect(snapToWall(mixedFactoryPreset().scenario, 3, 40)).toEqual([0, 40]);
    let s = { ...loaded(), wallSnap: true };
    s = addTrp(s, 60, 57);
    expect(s.trps[12]).toMatchObject({ x: 60, y: 60 });
  });

  it("deleting below four markers disables evaluation", () => {
    let s = loaded();
    for (let i = 0; i < 9; i++) s = deleteTrp(s, 0);
    expect(s.trps).toHaveLength(3);
    expect(canEvaluate(s)).toBe(false);
  });
});

describe("campaign responses", () => {
  it("push the ninetieth percentile into the history verbatim", () => {
    const resp = campaignResponse(13.11, [58, 27, 8]);
    const s = applyResponse(loaded(), resp, loaded().trps);
    expect(s.history).toEqual([13.11]);
    expect(s.history[0]).toBe(resp.summary.percentiles["p90_m"]);
    expect(s.pendingSuggestions).toEqual([[58, 27, 8]]);
  });

  it("a response for an edited layout is immediately stale", () => {
    const base = loaded();
    const edited = moveTrp(base, 2, 50, 30);
    const s = applyResponse(edited, campaignResponse(12.5, [10, 10, 8]), base.trps);
    expect(s.stale).toBe(true);
  });

  it("accepting a suggestion adds the marker, rejecting leaves the layout", () => {
    const withResp = applyResponse(loaded(), campaignResponse(13.11, [58, 27, 8]), loaded().trps);
    const accepted = acceptSuggestion(withResp, 0);
    expect(accepted.trps).toHaveLength(13);
    expect(accepted.trps[12]).toMatchObject({ x: 58, y: 27, z: 8 });
    expect(accepted.pendingSuggestions).toHaveLength(0);
    const rejected = rejectSuggestion(withResp, 0);
    expect(rejected.trps).toHaveLength(12);
    expect(rejected.pendingSuggestions).toHaveLength(0);
  });
});
