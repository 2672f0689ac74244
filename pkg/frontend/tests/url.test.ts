import { describe, expect, it } from "vitest";

import { initialState, loadPreset } from "../src/state.js";
import { fromFragment, toFragment } from "../src/url.js";
import { mixedFactoryPreset } from "./helpers.js";

describe("shareable URL fragment", () => {
  it("round-trips the planning session", () => {
    const state = loadPreset(initialState(), mixedFactoryPreset());
    const shared = fromFragment("#" + toFragment({ ...state, displayMode: "cdf" }));
    expect(shared).not.toBeNull();
    expect(shared!.preset).toBe("inf-dh-mixed-12");
    expect(shared!.trps).toHaveLength(12);
    expect(shared!.displayMode).toBe("cdf");
  });

  it("rejects garbage fragments quietly", () => {
    expect(fromFragment("#not-json")).toBeNull();
    expect(fromFragment("")).toBeNull();
    expect(fromFragment("#%7B%22trps%22%3A%22no%22%7D")).toBeNull();
  });
});
