import { ApiClient } from "./api.js";
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
  type DisplayMode,
  type PlannerState,
} from "./state.js";
import type { EvaluateRequest, PresetDoc } from "./types.js";

export interface EvaluateSettings {
  mode: "bounds" | "campaign";
  cellSize: number;
  nDrops: number;
  nSuggestions: number;
  seed: number;
}

const DEFAULT_SETTINGS: EvaluateSettings = {
  mode: "bounds",
  cellSize: 2.0,
  nDrops: 2000,
  nSuggestions: 1,
  seed: 1,
};

type Listener = (state: PlannerState) => void;

/**
 * Owns the planner state and the single in-flight evaluation. Extra
 * evaluate calls while busy queue-replace: only the latest request runs
 * after the current one lands.
 */
export class PlannerController {
  state: PlannerState = initialState();
  settings: EvaluateSettings = { ...DEFAULT_SETTINGS };
  presets: PresetDoc[] = [];
  lastError: string | null = null;
  private listeners: Listener[] = [];
  private queued = false;

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private set(state: PlannerState): void {
    this.state = state;
    this.emit();
  }

  async init(): Promise<void> {
    this.presets = await this.api.presets();
    this.emit();
  }

  loadPresetByName(name: string): void {
    const preset = this.presets.find((p) => p.name === name);
    if (!preset) throw new Error(`unknown preset: ${name}`);
    this.set(loadPreset(this.state, preset));
  }

  accept(index: number): Promise<void> {
    // accepted TRPs join the layout and trigger a fresh evaluation
    this.set(acceptSuggestion(this.state, index));
    return this.evaluate();
  }

  reject(index: number): void {
    this.set(rejectSuggestion(this.state, index));
  }

  move(index: number, x: number, y: number): void {
    this.set(moveTrp(this.state, index, x, y));
  }

  add(x: number, y: number): void {
    this.set(addTrp(this.state, x, y));
  }

  remove(index: number): void {
    this.set(deleteTrp(this.state, index));
  }

  setDisplayMode(mode: DisplayMode): void {
    this.set({ ...this.state, displayMode: mode });
  }

  setWallSnap(on: boolean): void {
    this.set({ ...this.state, wallSnap: on });
  }

  /** Rehydrate a shared session: preset first, then any edited markers. */
  restore(preset: string, trps: { x: number; y: number; z: number }[]): void {
    this.loadPresetByName(preset);
    if (trps.length >= 4) {
      this.set({ ...this.state, trps: trps.slice() });
    }
  }

  buildRequest(): EvaluateRequest {
    if (!this.state.scenario) throw new Error("no scenario loaded");
    const request: EvaluateRequest = {
      scenario: this.state.scenario,
      trps: this.state.trps.map((t) => ({ x: t.x, y: t.y, z: t.z })),
      mode: this.settings.mode,
      seed: this.settings.seed,
    };
    if (this.settings.mode === "bounds") {
      request.cell_size_m = this.settings.cellSize;
    } else {
      request.campaign = {
        n_drops: this.settings.nDrops,
        n_suggestions: this.settings.nSuggestions,
      };
    }
    return request;
  }

  async evaluate(): Promise<void> {
    if (this.state.busy) {
      this.queued = true; // latest wins once the in-flight request lands
      return;
    }
    if (!canEvaluate(this.state)) return;
    const evaluatedTrps = this.state.trps.slice();
    this.set({ ...this.state, busy: true });
    try {
      const response = await this.api.evaluate(this.buildRequest());
      this.lastError = null;
      this.set(applyResponse({ ...this.state, busy: false }, response, evaluatedTrps));
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      this.set({ ...this.state, busy: false });
    }
    if (this.queued) {
      this.queued = false;
      await this.evaluate();
    }
  }
}
