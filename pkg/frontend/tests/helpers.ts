import { vi } from "vitest";
import type { CampaignResponse, GridCell, PresetDoc, ScenarioDoc } from "../src/types.js";

export function factoryScenario(): ScenarioDoc {
  return {
    family: "InF-DH",
    x_len_m: 120.0,
    y_len_m: 60.0,
    ceiling_height_m: 10.0,
    trp_mount_height_m: 8.0,
    ue_height_m: 1.5,
    clutter_density: 0.6,
    clutter_size_m: 2.0,
    clutter_height_m: 6.0,
    carrier: {
      carrier_frequency_hz: 2.0e9,
      subcarrier_spacing_hz: 30.0e3,
      n_subcarriers: 4096,
      prs_bandwidth_hz: 100.0e6,
    },
  };
}

export function mixedFactoryPreset(): PresetDoc {
  const xy: [number, number][] = [
    [0, 0],
    [120, 0],
    [120, 60],
    [0, 60],
    [40, 0],
    [80, 0],
    [40, 60],
    [80, 60],
    [30, 15],
    [90, 15],
    [30, 45],
    [90, 45],
  ];
  return {
    name: "inf-dh-mixed-12",
    scenario: factoryScenario(),
    trps: xy.map(([x, y], id) => ({ id, x, y, z: 8.0 })),
    layout: "mixed",
  };
}

export function campaignResponse(
  p90: number,
  suggestion: [number, number, number],
): CampaignResponse {
  return {
    mode: "campaign",
    summary: {
      n_drops: 2000,
      availability: 1.0,
      percentiles: { p80_m: p90 * 0.74, p90_m: p90, p95_m: p90 * 1.26 },
    },
    cdf: [
      { error_m: p90 * 0.31, probability: 0.5 },
      { error_m: p90, probability: 0.9 },
      { error_m: p90 * 1.62, probability: 1.0 },
    ],
    los_histogram: { "0": 1650, "1": 290, "2": 60 },
    worst_ue_positions: [
      [57.3, 28.1],
      [61.8, 24.6],
      [55.2, 31.4],
    ],
    suggested_trps: [suggestion],
  };
}

export function boundsResponse(nx = 4, ny = 3, base = 0.41): {
  mode: "bounds";
  grid: {
    origin: [number, number];
    cell_size_m: number;
    nx: number;
    ny: number;
    evaluation_height_m: number;
    gdop_2d: GridCell[][];
    crlb_rmse_2d_m: GridCell[][];
    crlb_rmse_3d_m: GridCell[][];
  };
} {
  const layer = (scale: number): GridCell[][] =>
    Array.from({ length: ny }, (_, iy) =>
      Array.from({ length: nx }, (_, ix) => base * scale + ix * 0.07 + iy * 0.11),
    );
  return {
    mode: "bounds",
    grid: {
      origin: [0, 0],
      cell_size_m: 30.0,
      nx,
      ny,
      evaluation_height_m: 1.5,
      gdop_2d: layer(1),
      crlb_rmse_2d_m: layer(0.2),
      crlb_rmse_3d_m: layer(0.33),
    },
  };
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: string | null;
}

export interface FetchMock {
  requests: RecordedRequest[];
  responseBodies: string[];
  evaluateCalls(): RecordedRequest[];
}

/**
 * Install a fetch stub: GET /api/presets serves the preset catalog, POST
 * /api/evaluate serves the queued bodies in order. Records every request
 * and every body string handed out.
 */
export function installFetchMock(
  presets: PresetDoc[],
  evaluations: unknown[],
): FetchMock {
  const requests: RecordedRequest[] = [];
  const responseBodies: string[] = [];
  let evalIndex = 0;

  const fetchImpl = async (input: unknown, init?: { method?: string; body?: string }) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    requests.push({ url, method, body: init?.body ?? null });
    let payload: string;
    if (url.endsWith("/api/presets")) {
      payload = JSON.stringify(presets);
    } else if (url.endsWith("/api/evaluate")) {
      if (evalIndex >= evaluations.length) {
        throw new Error("fetch mock: no evaluation response queued");
      }
      payload = JSON.stringify(evaluations[evalIndex++]);
    } else {
      throw new Error(`fetch mock: unexpected url ${url}`);
    }
    responseBodies.push(payload);
    return {
      ok: true,
      status: 200,
      json: async () => JSON.parse(payload),
      text: async () => payload,
    };
  };

  vi.stubGlobal("fetch", fetchImpl);
  return {
    requests,
    responseBodies,
    evaluateCalls: () => requests.filter((r) => r.url.endsWith("/api/evaluate")),
  };
}

export function textNodesOf(root: Node): string[] {
  const out: string[] = [];
  const walk = (node: Node): void => {
    if (node.nodeType === 3 && node.textContent) {
      out.push(node.textContent);
    }
    node.childNodes.forEach(walk);
  };
  walk(root);
  return out;
}
