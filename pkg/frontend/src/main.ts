import { ApiClient } from "./api.js";
import { PlannerController } from "./controller.js";
import { fmt } from "./format.js";
import { canvasToFloor, drawScene, gridRange, layerFor, valueAtPoint, PX_PER_M } from "./render.js";
import { canEvaluate, type DisplayMode, type PlannerState } from "./state.js";
import { fromFragment, toFragment } from "./url.js";

const DISPLAY_MODES: [DisplayMode, string][] = [
  ["gdop", "geometry dilution map"],
  ["crlb", "accuracy bound map"],
  ["cdf", "campaign error curve"],
  ["worst", "worst-UE overlay"],
];

export interface PlannerApp {
  controller: PlannerController;
  root: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mountApp(root: HTMLElement, api: ApiClient): PlannerApp {
  const controller = new PlannerController(api);

  const presetSelect = el("select", { id: "preset" });
  const modeSelect = el("select", { id: "display-mode" });
  for (const [value, label] of DISPLAY_MODES) {
    modeSelect.appendChild(el("option", { value }, label));
  }
  const evalModeSelect = el("select", { id: "eval-mode" });
  evalModeSelect.appendChild(el("option", { value: "bounds" }, "bounds"));
  evalModeSelect.appendChild(el("option", { value: "campaign" }, "campaign"));
  const wallSnap = el("input", { type: "checkbox", id: "wall-snap" });
  const evaluateBtn = el("button", { id: "evaluate" }, "evaluate");
  const busyNote = el("span", { id: "busy", hidden: "" }, "evaluating…");
  const staleNote = el("span", { id: "stale", hidden: "" }, "layout edited — results are stale");
  const dropNote = el("span", { id: "drop-rejected", hidden: "" }, "outside the hall");
  const errorNote = el("span", { id: "error" });
  const summary = el("section", { id: "summary" });
  const historyList = el("ul", { id: "history" });
  const suggestionList = el("ul", { id: "suggestions" });
  const legend = el("div", { id: "legend" });
  const readout = el("div", { id: "readout" });
  const canvas = el("canvas", { id: "floor" });

  const aside = el("aside");
  const presetLabel = el("label", {}, "preset ");
  presetLabel.appendChild(presetSelect);
  const modeLabel = el("label", {}, "view ");
  modeLabel.appendChild(modeSelect);
  const evalModeLabel = el("label", {}, "evaluation ");
  evalModeLabel.appendChild(evalModeSelect);
  const snapLabel = el("label", {}, " wall snap ");
  snapLabel.prepend(wallSnap);
  aside.append(
    presetLabel,
    modeLabel,
    evalModeLabel,
    snapLabel,
    evaluateBtn,
    busyNote,
    staleNote,
    dropNote,
    errorNote,
    summary,
    el("h3", {}, "history — ninetieth percentile, meters"),
    historyList,
    el("h3", {}, "suggested additions"),
    suggestionList,
  );
  const stage = el("main");
  stage.append(canvas, readout, legend);
  const shell = el("div", { class: "planner" });
  shell.append(aside, stage);
  root.appendChild(shell);

  let dragIndex: number | null = null;

  function markerAt(px: number, py: number): number | null {
    const state = controller.state;
    if (!state.scenario) return null;
    for (let i = 0; i < state.trps.length; i++) {
      const trp = state.trps[i]!;
      const mx = trp.x * PX_PER_M;
      const my = canvas.height - trp.y * PX_PER_M;
      if (Math.hypot(mx - px, my - py) <= 8) return i;
    }
    return null;
  }

  canvas.addEventListener("mousedown", (ev) => {
    dragIndex = markerAt(ev.offsetX, ev.offsetY);
  });
  canvas.addEventListener("mousemove", (ev) => {
    const floor = canvasToFloor(canvas, controller.state, ev.offsetX, ev.offsetY);
    if (!floor) return;
    if (dragIndex !== null) {
      controller.move(dragIndex, floor[0], floor[1]);
      return;
    }
    const response = controller.state.lastResponse;
    if (response?.mode === "bounds") {
      const v = valueAtPoint(response.grid, layerFor(controller.state.displayMode), floor[0], floor[1]);
      readout.textContent = v === null ? "" : fmt(v);
    }
  });
  canvas.addEventListener("mouseup", () => {
    dragIndex = null;
  });
  canvas.addEventListener("dblclick", (ev) => {
    const index = markerAt(ev.offsetX, ev.offsetY);
    if (index !== null) {
      controller.remove(index);
      return;
    }
    const floor = canvasToFloor(canvas, controller.state, ev.offsetX, ev.offsetY);
    if (floor) controller.add(floor[0], floor[1]);
  });

  presetSelect.addEventListener("change", () => controller.loadPresetByName(presetSelect.value));
  modeSelect.addEventListener("change", () => controller.setDisplayMode(modeSelect.value as DisplayMode));
  evalModeSelect.addEventListener("change", () => {
    controller.settings.mode = evalModeSelect.value as "bounds" | "campaign";
  });
  wallSnap.addEventListener("change", () => controller.setWallSnap(wallSnap.checked));
  evaluateBtn.addEventListener("click", () => void controller.evaluate());

  function renderSummary(state: PlannerState): void {
    summary.textContent = "";
    const response = state.lastResponse;
    if (!response || response.mode !== "campaign") return;
    const rows: [string, string][] = [
      ["drops", fmt(response.summary.n_drops)],
      ["availability", fmt(response.summary.availability)],
    ];
    for (const [key, value] of Object.entries(response.summary.percentiles)) {
      rows.push([key, fmt(value)]);
    }
    for (const [label, value] of rows) {
      summary.appendChild(el("div", { class: "row" }, `${label} ${value}`));
    }
  }

  function render(state: PlannerState): void {
    if (presetSelect.options.length !== controller.presets.length) {
      presetSelect.textContent = "";
      presetSelect.appendChild(el("option", { value: "" }, "pick a preset"));
      for (const preset of controller.presets) {
        presetSelect.appendChild(el("option", { value: preset.name }, preset.name));
      }
    }
    if (state.presetName) presetSelect.value = state.presetName;

    const ready = canEvaluate(state);
    evaluateBtn.disabled = !ready;
    evaluateBtn.title =
      state.trps.length < 4 ? "needs at least four radios for a fix" : "";
    busyNote.hidden = !state.busy;
    staleNote.hidden = !state.stale;
    dropNote.hidden = !state.rejectedDrop;
    errorNote.textContent = controller.lastError ?? "";

    renderSummary(state);

    historyList.textContent = "";
    for (const value of state.history) {
      historyList.appendChild(el("li", {}, fmt(value)));
    }

    suggestionList.textContent = "";
    state.pendingSuggestions.forEach((s, i) => {
      const item = el("li", {});
      item.appendChild(el("span", {}, `${fmt(s[0])}, ${fmt(s[1])}`));
      const acceptBtn = el("button", { class: "accept" }, "accept");
      acceptBtn.addEventListener("click", () => void controller.accept(i));
      const rejectBtn = el("button", { class: "reject" }, "reject");
      rejectBtn.addEventListener("click", () => controller.reject(i));
      item.append(" ", acceptBtn, " ", rejectBtn);
      suggestionList.appendChild(item);
    });

    legend.textContent = "";
    const response = state.lastResponse;
    if (response?.mode === "bounds") {
      const range = gridRange(response.grid, layerFor(state.displayMode));
      if (range) {
        legend.append(
          el("span", { class: "lo" }, `low ${fmt(range[0])}`),
          " ",
          el("span", { class: "hi" }, `high ${fmt(range[1])}`),
        );
      }
    }

    drawScene(canvas, state);
    if (typeof window !== "undefined" && window.location) {
      window.location.hash = toFragment(state);
    }
  }

  controller.subscribe(render);
  return { controller, root };
}

export async function startApp(root: HTMLElement, api: ApiClient): Promise<PlannerApp> {
  const app = mountApp(root, api);
  await app.controller.init();
  const shared = fromFragment(window.location.hash);
  if (shared?.preset) {
    app.controller.restore(shared.preset, shared.trps);
  }
  return app;
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    void startApp(root, new ApiClient());
  }
}
