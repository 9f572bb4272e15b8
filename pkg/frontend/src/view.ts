/** DOM construction and incremental sync for the one-page form. */

import type { CertificateJson, ReportEnvelope } from "./api.js";
import { FormState, matrixShape, visibility } from "./state.js";

const MATRIX_FIELDS: Array<{ key: "x0" | "u0" | "x1"; label: string }> = [
  { key: "x0", label: "X0 (states)" },
  { key: "u0", label: "U0 (inputs)" },
  { key: "x1", label: "X1 (successors / derivatives)" },
];

function radioGroup(name: string, options: string[], checked: string): string {
  return options
    .map(
      (value) => `
      <label><input type="radio" name="${name}" value="${value}"
        ${value === checked ? "checked" : ""}> ${value}</label>`
    )
    .join("");
}

function boundsEditor(prefix: string, label: string): string {
  return `
    <fieldset class="bounds" data-bounds="${prefix}">
      <legend>${label}</legend>
      <label>lower <input type="text" data-field="${prefix}.lower" placeholder="-1, -1"></label>
      <label>upper <input type="text" data-field="${prefix}.upper" placeholder="1, 1"></label>
    </fieldset>`;
}

export function buildForm(root: HTMLElement): void {
  root.innerHTML = `
    <h1>Trajectory certificate studio</h1>
    <form id="synth-form" autocomplete="off">
      <section class="selectors">
        <fieldset id="time-domain"><legend>Time domain</legend>
          ${radioGroup("timeDomain", ["continuous", "discrete"], "discrete")}
        </fieldset>
        <fieldset id="model-kind"><legend>Model</legend>
          ${radioGroup("modelKind", ["linear", "polynomial"], "linear")}
        </fieldset>
        <fieldset id="mode"><legend>Property</legend>
          ${radioGroup("mode", ["stability", "safety"], "stability")}
        </fieldset>
      </section>
      <section class="data-entry">
        ${MATRIX_FIELDS.map(
          ({ key, label }) => `
          <div class="matrix-field" id="field-${key}">
            <label for="${key}">${label}</label>
            <textarea id="${key}" data-field="${key}" rows="4"
              placeholder="comma-separated rows, one line per dimension"></textarea>
            <input type="file" id="${key}-file" data-file="${key}">
          </div>`
        ).join("")}
        <p id="dimension-badge" class="badge" hidden></p>
      </section>
      <section id="monomial-section" hidden>
        <label for="monomials">Monomials M(x)</label>
        <input type="text" id="monomials" data-field="monomials"
          placeholder="x1; x2; x1*x2">
      </section>
      <section id="theta-section" hidden>
        <label><input type="checkbox" id="theta-auto" checked> autofill Theta_x</label>
        <textarea id="theta" data-field="theta" rows="3" hidden
          placeholder="one row per monomial, entries split by ; e.g.&#10;1; 0&#10;x2; 0"></textarea>
      </section>
      <section id="region-section" hidden>
        ${boundsEditor("stateSpace", "State space X")}
        ${boundsEditor("initialSet", "Initial set X_I")}
        <div id="unsafe-list"></div>
        <button type="button" id="add-unsafe">add unsafe set</button>
      </section>
      <section class="actions">
        <button type="submit" id="calculate">Calculate</button>
        <button type="button" id="reset">Reset</button>
      </section>
    </form>
    <section id="results">
      <h2>INFO</h2>
      <p id="info" class="info"></p>
      <div id="certificate" hidden>
        <p id="summary"></p>
        <p id="levels" hidden></p>
        <pre id="certificate-polynomial"></pre>
        <h3>P</h3><pre id="p-matrix"></pre>
        <h3>H</h3><pre id="h-matrix"></pre>
        <h3>controller</h3><pre id="controller"></pre>
        <div id="theta-block" hidden><h3>Theta_x</h3><pre id="theta-out"></pre></div>
      </div>
    </section>`;
}

function setHidden(root: HTMLElement, selector: string, hidden: boolean): void {
  const node = root.querySelector<HTMLElement>(selector);
  if (node) node.hidden = hidden;
}

export function syncForm(root: HTMLElement, state: FormState): void {
  const show = visibility(state);
  setHidden(root, "#monomial-section", !show.monomials);
  setHidden(root, "#theta-section", !show.theta);
  setHidden(root, "#region-section", !show.regions);
  setHidden(root, "#theta", state.thetaAuto);

  const badge = root.querySelector<HTMLElement>("#dimension-badge");
  const shape = matrixShape(state.x0);
  if (badge) {
    badge.hidden = shape === null;
    if (shape) badge.textContent = `n = ${shape.rows}, T = ${shape.cols}`;
  }

  const unsafeList = root.querySelector<HTMLElement>("#unsafe-list");
  if (unsafeList && show.regions) {
    const current = unsafeList.querySelectorAll("fieldset").length;
    if (current !== state.unsafeSets.length) {
      unsafeList.innerHTML = state.unsafeSets
        .map(
          (_, i) => `
          <fieldset class="bounds" data-bounds="unsafe${i}">
            <legend>Unsafe set ${i + 1}</legend>
            <label>lower <input type="text" data-field="unsafe.${i}.lower"></label>
            <label>upper <input type="text" data-field="unsafe.${i}.upper"></label>
            <button type="button" data-remove-unsafe="${i}">remove</button>
          </fieldset>`
        )
        .join("");
      state.unsafeSets.forEach((draft, i) => {
        const lower = unsafeList.querySelector<HTMLInputElement>(
          `[data-field="unsafe.${i}.lower"]`
        );
        const upper = unsafeList.querySelector<HTMLInputElement>(
          `[data-field="unsafe.${i}.upper"]`
        );
        if (lower) lower.value = draft.lower;
        if (upper) upper.value = draft.upper;
      });
    }
  }

  const calculate = root.querySelector<HTMLButtonElement>("#calculate");
  if (calculate) calculate.disabled = state.busy;
}

function formatMatrix(rows: unknown[][]): string {
  return rows
    .map((row) => row.map((v) => (typeof v === "number" ? `${v}` : String(v))).join("  "))
    .join("\n");
}

export function renderError(root: HTMLElement, message: string): void {
  const info = root.querySelector<HTMLElement>("#info");
  if (info) {
    info.textContent = message;
    info.classList.add("error");
  }
  setHidden(root, "#certificate", true);
}

export function renderReport(root: HTMLElement, report: ReportEnvelope): void {
  const info = root.querySelector<HTMLElement>("#info");
  if (info) {
    info.textContent = "solved";
    info.classList.remove("error");
  }
  const cert: CertificateJson = report.certificate;
  setHidden(root, "#certificate", false);
  const summary = root.querySelector<HTMLElement>("#summary");
  if (summary) {
    summary.textContent =
      `${cert.kind} for ${cert.system_class}; ` +
      `wall time ${report.diagnostics.wall_time_s.toFixed(3)} s`;
  }
  const levels = root.querySelector<HTMLElement>("#levels");
  if (levels) {
    const isBarrier = cert.gamma !== null && cert.lambda !== null;
    levels.hidden = !isBarrier;
    if (isBarrier) {
      levels.textContent = `gamma = ${cert.gamma}, lambda = ${cert.lambda}`;
    }
  }
  const setText = (selector: string, text: string) => {
    const node = root.querySelector<HTMLElement>(selector);
    if (node) node.textContent = text;
  };
  setText(
    "#certificate-polynomial",
    `${cert.kind === "CLF" ? "V" : "B"}(x) = ${cert.certificate_polynomial}`
  );
  setText("#p-matrix", formatMatrix(cert.p_matrix));
  setText("#h-matrix", formatMatrix(cert.h));
  setText("#controller", cert.controller.join("\n"));
  const thetaBlock = root.querySelector<HTMLElement>("#theta-block");
  if (thetaBlock) {
    thetaBlock.hidden = cert.theta === null;
    if (cert.theta) setText("#theta-out", formatMatrix(cert.theta));
  }
}
