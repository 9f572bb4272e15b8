/** Typed client for the synthesis HTTP API. */

export interface BoundsJson {
  lower: number[];
  upper: number[];
}

export interface SynthesisPayload {
  mode: "stability" | "safety";
  time_domain: "continuous" | "discrete";
  model_kind: "linear" | "polynomial";
  x0: { content: string; format: string };
  u0: { content: string; format: string };
  x1: { content: string; format: string };
  monomials?: string;
  theta?: "auto" | string[][];
  state_space?: BoundsJson;
  initial_set?: BoundsJson;
  unsafe_sets?: BoundsJson[];
  epsilon?: number;
  decrease_margin?: number;
}

export interface CertificateJson {
  kind: string;
  system_class: string;
  certificate_polynomial: string;
  p_matrix: number[][];
  h: unknown[][];
  controller: string[];
  gamma: number | null;
  lambda: number | null;
  theta: string[][] | null;
  monomials: string | null;
}

export interface ReportEnvelope {
  certificate: CertificateJson;
  diagnostics: { wall_time_s: number };
}

export type ApiResult<T> =
  | { ok: true; body: T }
  | { ok: false; error: string; retryable: boolean };

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(`${this.baseUrl}/api/health`);
      return resp.ok;
    } catch {
      return false;
    }
  }

  async synthesize(payload: SynthesisPayload): Promise<ApiResult<ReportEnvelope>> {
    let resp: Response;
    try {
      resp = await fetch(`${this.baseUrl}/api/synthesize`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch {
      return { ok: false, error: "Network failure, please retry", retryable: true };
    }
    const body = await resp.json().catch(() => ({}));
    if (resp.ok) {
      return { ok: true, body: body as ReportEnvelope };
    }
    const message =
      typeof body === "object" && body !== null && "error" in body
        ? String((body as { error: unknown }).error)
        : `Request failed (${resp.status})`;
    return { ok: false, error: message, retryable: false };
  }
}
