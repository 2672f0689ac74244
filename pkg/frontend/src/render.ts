import type { DisplayMode, PlannerState } from "./state.js";
import type { GridCell, GridDoc } from "./types.js";

export const PX_PER_M = 6;

export type GridLayer = "gdop_2d" | "crlb_rmse_2d_m";

export function layerFor(mode: DisplayMode): GridLayer {
  return mode === "crlb" ? "crlb_rmse_2d_m" : "gdop_2d";
}

export function cellNumber(cell: GridCell | undefined): number | null {
  return typeof cell === "number" ? cell : null;
}

/** Value of the grid cell containing a floor point, as served (no math). */
export function valueAtPoint(grid: GridDoc, layer: GridLayer, x: number, y: number): number | null {
  const ix = Math.floor((x - grid.origin[0]) / grid.cell_size_m);
  const iy = Math.floor((y - grid.origin[1]) / grid.cell_size_m);
  if (ix < 0 || iy < 0 || ix >= grid.nx || iy >= grid.ny) return null;
  return cellNumber(grid[layer][iy]?.[ix]);
}

/** Smallest and largest served cell values; both are members of the grid. */
export function gridRange(grid: GridDoc, layer: GridLayer): [number, number] | null {
  let lo: number | null = null;
  let hi: number | null = null;
  for (const row of grid[layer]) {
    for (const cell of row) {
      const v = cellNumber(cell);
      if (v === null) continue;
      if (lo === null || v < lo) lo = v;
      if (hi === null || v > hi) hi = v;
    }
  }
  return lo === null || hi === null ? null : [lo, hi];
}

/** Blue (good) to red (bad) ramp; a flat grid renders in a single color. */
export function colorFor(value: number, lo: number, hi: number): string {
  const t = hi > lo ? (value - lo) / (hi - lo) : 0;
  const hue = 225 - 225 * t;
  return `hsl(${hue}, 80%, 55%)`;
}

function hatch(ctx: CanvasRenderingContext2D, x: number, y: number, w: number, h: number): void {
  ctx.save();
  ctx.strokeStyle = "#666";
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let off = -h; off < w; off += 4) {
    ctx.moveTo(x + off, y + h);
    ctx.lineTo(x + off + h, y);
  }
  ctx.rect(x, y, w, h);
  ctx.stroke();
  ctx.restore();
}

export function drawScene(canvas: HTMLCanvasElement, state: PlannerState): void {
  const ctx = canvas.getContext?.("2d");
  if (!ctx || !state.scenario) return;
  const sc = state.scenario;
  const w = sc.x_len_m * PX_PER_M;
  const h = sc.y_len_m * PX_PER_M;
  canvas.width = w;
  canvas.height = h;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#11131a";
  ctx.fillRect(0, 0, w, h);

  const response = state.lastResponse;
  if (response && response.mode === "bounds" && (state.displayMode === "gdop" || state.displayMode === "crlb")) {
    const grid = response.grid;
    const layer = layerFor(state.displayMode);
    const range = gridRange(grid, layer);
    const cellPx = grid.cell_size_m * PX_PER_M;
    for (let iy = 0; iy < grid.ny; iy++) {
      for (let ix = 0; ix < grid.nx; ix++) {
        const px = (grid.origin[0] + ix * grid.cell_size_m) * PX_PER_M;
        const py = h - (grid.origin[1] + (iy + 1) * grid.cell_size_m) * PX_PER_M;
        const v = cellNumber(grid[layer][iy]?.[ix]);
        if (v === null || range === null) {
          hatch(ctx, px, py, cellPx, cellPx);
        } else {
          ctx.fillStyle = colorFor(v, range[0], range[1]);
          ctx.fillRect(px, py, cellPx, cellPx);
        }
      }
    }
  }

  if (response && response.mode === "campaign" && state.displayMode === "cdf") {
    ctx.strokeStyle = "#6cf";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const maxErr = response.cdf.length ? response.cdf[response.cdf.length - 1]!.error_m : 1;
    response.cdf.forEach((point, i) => {
      const px = (point.error_m / Math.max(maxErr, 1e-9)) * (w - 20) + 10;
      const py = h - point.probability * (h - 20) - 10;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }

  if (response && response.mode === "campaign" && state.displayMode === "worst") {
    ctx.fillStyle = "rgba(255, 90, 90, 0.8)";
    for (const [x, y] of response.worst_ue_positions) {
      ctx.beginPath();
      ctx.arc(x * PX_PER_M, h - y * PX_PER_M, 2.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  // hall outline
  ctx.strokeStyle = "#e04545";
  ctx.lineWidth = 2;
  ctx.strokeRect(0, 0, w, h);

  // pending suggestions (hollow), then TRP markers (triangles)
  ctx.strokeStyle = "#ffd166";
  ctx.lineWidth = 2;
  for (const [x, y] of state.pendingSuggestions) {
    ctx.beginPath();
    ctx.arc(x * PX_PER_M, h - y * PX_PER_M, 7, 0, 2 * Math.PI);
    ctx.stroke();
  }
  for (const trp of state.trps) {
    const px = trp.x * PX_PER_M;
    const py = h - trp.y * PX_PER_M;
    ctx.fillStyle = state.stale ? "#8a8f98" : "#35d07f";
    ctx.beginPath();
    ctx.moveTo(px, py - 6);
    ctx.lineTo(px - 5.5, py + 5);
    ctx.lineTo(px + 5.5, py + 5);
    ctx.closePath();
    ctx.fill();
  }
}

/** Canvas pixel to floor meters (y axis points up on the floor plan). */
export function canvasToFloor(
  canvas: HTMLCanvasElement,
  state: PlannerState,
  px: number,
  py: number,
): [number, number] | null {
  if (!state.scenario) return null;
  return [px / PX_PER_M, (canvas.height - py) / PX_PER_M];
}
