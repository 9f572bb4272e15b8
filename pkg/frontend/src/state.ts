/** Form state, field gating, and request assembly. */

import type { BoundsJson, SynthesisPayload } from "./api.js";

export interface BoundsDraft {
  lower: string;
  upper: string;
}

export interface FormState {
  timeDomain: "continuous" | "discrete";
  modelKind: "linear" | "polynomial";
  mode: "stability" | "safety";
  x0: string;
  u0: string;
  x1: string;
  monomials: string;
  thetaAuto: boolean;
  theta: string;
  stateSpace: BoundsDraft;
  initialSet: BoundsDraft;
  unsafeSets: BoundsDraft[];
  busy: boolean;
}

export function initialState(): FormState {
  return {
    timeDomain: "discrete",
    modelKind: "linear",
    mode: "stability",
    x0: "",
    u0: "",
    x1: "",
    monomials: "",
    thetaAuto: true,
    theta: "",
    stateSpace: { lower: "", upper: "" },
    initialSet: { lower: "", upper: "" },
    unsafeSets: [{ lower: "", upper: "" }],
    busy: false,
  };
}

export interface Visibility {
  monomials: boolean;
  theta: boolean;
  regions: boolean;
}

/** Which inputs the selected class needs; everything else stays hidden. */
export function visibility(state: FormState): Visibility {
  const polynomial = state.modelKind === "polynomial";
  return {
    monomials: polynomial,
    theta: polynomial && state.timeDomain === "discrete",
    regions: state.mode === "safety",
  };
}

/** Shape of a pasted matrix: rows = dimensions, columns = samples. */
export function matrixShape(text: string): { rows: number; cols: number } | null {
  const rows = text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => line.split(",").map((cell) => cell.trim()));
  if (rows.length === 0) return null;
  const cols = rows[0].length;
  for (const row of rows) {
    if (row.length !== cols) return null;
    for (const cell of row) {
      if (cell === "" || Number.isNaN(Number(cell))) return null;
    }
  }
  return { rows: rows.length, cols };
}

const SPACES_ERROR =
  "Provided spaces are not valid. Please provide valid lower and upper bounds";

function parseBounds(draft: BoundsDraft): BoundsJson | null {
  const parse = (text: string) =>
    text
      .split(",")
      .map((cell) => cell.trim())
      .filter((cell) => cell.length > 0)
      .map(Number);
  const lower = parse(draft.lower);
  const upper = parse(draft.upper);
  if (
    lower.length === 0 ||
    lower.length !== upper.length ||
    lower.some(Number.isNaN) ||
    upper.some(Number.isNaN) ||
    lower.some((lo, i) => lo >= upper[i])
  ) {
    return null;
  }
  return { lower, upper };
}

export type BuildResult =
  | { ok: true; payload: SynthesisPayload }
  | { ok: false; error: string };

/** Client-side gating: never send a request missing required fields. */
export function buildRequest(state: FormState): BuildResult {
  for (const [name, text] of [
    ["X0", state.x0],
    ["U0", state.u0],
    ["X1", state.x1],
  ] as const) {
    if (matrixShape(text) === null) {
      return { ok: false, error: `${name} is missing or not a numeric matrix` };
    }
  }
  const payload: SynthesisPayload = {
    mode: state.mode,
    time_domain: state.timeDomain,
    model_kind: state.modelKind,
    x0: { content: state.x0, format: "csv" },
    u0: { content: state.u0, format: "csv" },
    x1: { content: state.x1, format: "csv" },
  };
  const show = visibility(state);
  if (show.monomials) {
    if (!state.monomials.trim()) {
      return { ok: false, error: "Monomials are required for polynomial models" };
    }
    payload.monomials = state.monomials;
  }
  if (show.theta) {
    if (state.thetaAuto) {
      payload.theta = "auto";
    } else {
      const rows = state.theta
        .split("\n")
        .map((line) => line.trim())
        .filter((line) => line.length > 0)
        .map((line) => line.split(";").map((cell) => cell.trim()));
      if (rows.length === 0) {
        return { ok: false, error: "Theta_x is required unless autofill is enabled" };
      }
      payload.theta = rows;
    }
  }
  if (show.regions) {
    const stateSpace = parseBounds(state.stateSpace);
    const initialSet = parseBounds(state.initialSet);
    const unsafeSets = state.unsafeSets.map(parseBounds);
    if (!stateSpace || !initialSet || unsafeSets.some((b) => b === null)) {
      return { ok: false, error: SPACES_ERROR };
    }
    payload.state_space = stateSpace;
    payload.initial_set = initialSet;
    payload.unsafe_sets = unsafeSets as BoundsJson[];
  }
  return { ok: true, payload };
}
