import type { EvaluateRequest, EvaluateResponse, PresetDoc } from "./types.js";

/** Thin fetch wrapper: the planner's only gateway to numbers. */
export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async presets(): Promise<PresetDoc[]> {
    const resp = await fetch(`${this.baseUrl}/api/presets`);
    if (!resp.ok) {
      throw new Error(`presets request failed: ${resp.status}`);
    }
    return (await resp.json()) as PresetDoc[];
  }

  async evaluate(request: EvaluateRequest): Promise<EvaluateResponse> {
    const resp = await fetch(`${this.baseUrl}/api/evaluate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    const body = await resp.json();
    if (!resp.ok) {
      const detail = typeof body?.error === "string" ? body.error : `status ${resp.status}`;
      throw new Error(`evaluation rejected: ${detail}`);
    }
    return body as EvaluateResponse;
  }
}
