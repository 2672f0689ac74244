import type { DisplayMode, PlannerState, TrpPoint } from "./state.js";

/** The shareable slice of planner state, carried in the URL fragment. */
export interface SharedState {
  preset: string | null;
  trps: TrpPoint[];
  displayMode: DisplayMode;
  wallSnap: boolean;
}

export function toFragment(state: PlannerState): string {
  const shared: SharedState = {
    preset: state.presetName,
    trps: state.trps,
    displayMode: state.displayMode,
    wallSnap: state.wallSnap,
  };
  return encodeURIComponent(JSON.stringify(shared));
}

export function fromFragment(fragment: string): SharedState | null {
  if (!fragment) return null;
  try {
    const parsed = JSON.parse(decodeURIComponent(fragment.replace(/^#/, "")));
    if (!parsed || typeof parsed !== "object" || !Array.isArray(parsed.trps)) return null;
    return parsed as SharedState;
  } catch {
    return null;
  }
}
