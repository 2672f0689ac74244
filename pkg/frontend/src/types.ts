/** Wire types for the evaluation service. Field names match the JSON exactly. */

export interface CarrierDoc {
  carrier_frequency_hz: number;
  subcarrier_spacing_hz: number;
  n_subcarriers: number;
  prs_bandwidth_hz: number;
}

export interface ScenarioDoc {
  family: string;
  x_len_m: number;
  y_len_m: number;
  ceiling_height_m: number;
  trp_mount_height_m: number;
  ue_height_m: number;
  clutter_density: number;
  clutter_size_m: number;
  clutter_height_m: number;
  carrier: CarrierDoc;
}

export interface TrpDoc {
  id: number;
  x: number;
  y: number;
  z: number;
}

export interface PresetDoc {
  name: string;
  scenario: ScenarioDoc;
  trps: TrpDoc[];
  layout: string;
}

export type GridCell = number | { singular: true };

export interface GridDoc {
  origin: [number, number];
  cell_size_m: number;
  nx: number;
  ny: number;
  evaluation_height_m: number;
  gdop_2d: GridCell[][];
  crlb_rmse_2d_m: GridCell[][];
  crlb_rmse_3d_m: GridCell[][];
}

export interface BoundsResponse {
  mode: "bounds";
  grid: GridDoc;
}

export interface CdfPoint {
  error_m: number;
  probability: number;
}

export interface CampaignSummary {
  n_drops: number;
  availability: number;
  percentiles: { [key: string]: number | null };
}

export interface CampaignResponse {
  mode: "campaign";
  summary: CampaignSummary;
  cdf: CdfPoint[];
  los_histogram: { [links: string]: number };
  worst_ue_positions: [number, number][];
  suggested_trps: [number, number, number][];
}

export type EvaluateResponse = BoundsResponse | CampaignResponse;

export interface CampaignOptions {
  n_drops?: number;
  measurement_mode?: "all_trps" | "los_only";
  n_suggestions?: number;
}

export interface EvaluateRequest {
  scenario: ScenarioDoc;
  trps: { x: number; y: number; z: number }[];
  mode: "bounds" | "campaign";
  cell_size_m?: number;
  seed?: number;
  noise?: { sigma_toa_m?: number; nlos_bias_mean_m?: number };
  campaign?: CampaignOptions;
}
