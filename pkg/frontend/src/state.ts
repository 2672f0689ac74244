import type {
  EvaluateResponse,
  PresetDoc,
  ScenarioDoc,
  TrpDoc,
} from "./types.js";

export type DisplayMode = "gdop" | "crlb" | "cdf" | "worst";

export interface TrpPoint {
  x: number;
  y: number;
  z: number;
}

/**
 * The planner's single state record. TRP edits are local until an
 * evaluation is requested; `stale` says whether the last response still
 * describes the TRP list on screen.
 */
export interface PlannerState {
  presetName: string | null;
  scenario: ScenarioDoc | null;
  trps: TrpPoint[];
  wallSnap: boolean;
  displayMode: DisplayMode;
  lastResponse: EvaluateResponse | null;
  /** TRP set the last response was computed for. */
  evaluatedTrps: TrpPoint[] | null;
  stale: boolean;
  pendingSuggestions: [number, number, number][];
  /** 90th-percentile values, one per campaign evaluation, verbatim from responses. */
  history: (number | null)[];
  busy: boolean;
  rejectedDrop: boolean;
}

export function initialState(): PlannerState {
  return {
    presetName: null,
    scenario: null,
    trps: [],
    wallSnap: false,
    displayMode: "gdop",
    lastResponse: null,
    evaluatedTrps: null,
    stale: false,
    pendingSuggestions: [],
    history: [],
    busy: false,
    rejectedDrop: false,
  };
}

export function canEvaluate(state: PlannerState): boolean {
  return state.scenario !== null && state.trps.length >= 4 && !state.busy;
}

export function loadPreset(state: PlannerState, preset: PresetDoc): PlannerState {
  return {
    ...initialState(),
    presetName: preset.name,
    scenario: preset.scenario,
    trps: preset.trps.map((t: TrpDoc) => ({ x: t.x, y: t.y, z: t.z })),
    wallSnap: state.wallSnap,
    displayMode: state.displayMode,
  };
}

function inHall(scenario: ScenarioDoc, x: number, y: number): boolean {
  return x >= 0 && x <= scenario.x_len_m && y >= 0 && y <= scenario.y_len_m;
}

function clampToHall(scenario: ScenarioDoc, x: number, y: number): [number, number] {
  return [
    Math.min(Math.max(x, 0), scenario.x_len_m),
    Math.min(Math.max(y, 0), scenario.y_len_m),
  ];
}

/** Project onto the nearest wall of the hall rectangle. */
export function snapToWall(scenario: ScenarioDoc, x: number, y: number): [number, number] {
  [x, y] = clampToHall(scenario, x, y);
  const candidates: [number, [number, number]][] = [
    [y, [x, 0]],
    [scenario.y_len_m - y, [x, scenario.y_len_m]],
    [x, [0, y]],
    [scenario.x_len_m - x, [scenario.x_len_m, y]],
  ];
  candidates.sort((a, b) => a[0] - b[0]);
  return candidates[0]![1];
}

function markEdited(state: PlannerState): PlannerState {
  // Any geometry edit invalidates overlays and pending suggestions.
  return { ...state, stale: state.lastResponse !== null, pendingSuggestions: [] };
}

export function moveTrp(state: PlannerState, index: number, x: number, y: number): PlannerState {
  const scenario = state.scenario;
  const current = state.trps[index];
  if (!scenario || !current) return state;
  // dragging outside the hall snaps the marker back inside
  let [cx, cy] = clampToHall(scenario, x, y);
  if (state.wallSnap) {
    [cx, cy] = snapToWall(scenario, cx, cy);
  }
  const trps = state.trps.slice();
  trps[index] = { x: cx, y: cy, z: current.z };
  return markEdited({ ...state, trps, rejectedDrop: !inHall(scenario, x, y) });
}

export function addTrp(state: PlannerState, x: number, y: number): PlannerState {
  const scenario = state.scenario;
  if (!scenario) return state;
  if (!inHall(scenario, x, y)) {
    return { ...state, rejectedDrop: true };
  }
  let px = x;
  let py = y;
  if (state.wallSnap) {
    [px, py] = snapToWall(scenario, px, py);
  }
  const trps = state.trps.concat([{ x: px, y: py, z: scenario.trp_mount_height_m }]);
  return markEdited({ ...state, trps, rejectedDrop: false });
}

export function deleteTrp(state: PlannerState, index: number): PlannerState {
  if (index < 0 || index >= state.trps.length) return state;
  const trps = state.trps.slice();
  trps.splice(index, 1);
  return markEdited({ ...state, trps });
}

export function applyResponse(
  state: PlannerState,
  response: EvaluateResponse,
  evaluatedTrps: TrpPoint[],
): PlannerState {
  const next: PlannerState = {
    ...state,
    lastResponse: response,
    evaluatedTrps,
    // the overlay matches the on-screen TRPs only if nothing moved meanwhile
    stale: !sameTrps(state.trps, evaluatedTrps),
    pendingSuggestions: [],
    rejectedDrop: false,
  };
  if (response.mode === "campaign") {
    next.pendingSuggestions = response.suggested_trps.slice();
    next.history = state.history.concat([response.summary.percentiles["p90_m"] ?? null]);
  }
  return next;
}

export function acceptSuggestion(state: PlannerState, index: number): PlannerState {
  const suggestion = state.pendingSuggestions[index];
  if (!suggestion) return state;
  const pendingSuggestions = state.pendingSuggestions.filter((_, i) => i !== index);
  const trps = state.trps.concat([{ x: suggestion[0], y: suggestion[1], z: suggestion[2] }]);
  return { ...state, trps, pendingSuggestions, stale: state.lastResponse !== null };
}

export function rejectSuggestion(state: PlannerState, index: number): PlannerState {
  if (index < 0 || index >= state.pendingSuggestions.length) return state;
  return {
    ...state,
    pendingSuggestions: state.pendingSuggestions.filter((_, i) => i !== index),
  };
}

export function sameTrps(a: TrpPoint[], b: TrpPoint[]): boolean {
  return (
    a.length === b.length &&
    a.every((p, i) => p.x === b[i]!.x && p.y === b[i]!.y && p.z === b[i]!.z)
  );
}
