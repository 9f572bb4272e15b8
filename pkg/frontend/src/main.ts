/** Wire the form to the API: one in-flight request, reactive field gating. */

import { ApiClient } from "./api.js";
import { buildRequest, FormState, initialState } from "./state.js";
import { buildForm, renderError, renderReport, syncForm } from "./view.js";

export interface App {
  state: FormState;
  submit: () => Promise<void>;
  reset: () => void;
}

export function mount(root: HTMLElement, client: ApiClient): App {
  let state = initialState();
  buildForm(root);
  syncForm(root, state);

  const update = (mutate: (s: FormState) => void) => {
    mutate(state);
    syncForm(root, state);
  };

  root.addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    if (target.name === "timeDomain" || target.name === "modelKind" || target.name === "mode") {
      update((s) => {
        (s as unknown as Record<string, string>)[target.name] = target.value;
      });
    } else if (target.id === "theta-auto") {
      update((s) => {
        s.thetaAuto = target.checked;
      });
    } else if (target.dataset.file) {
      const file = target.files && target.files[0];
      const key = target.dataset.file as "x0" | "u0" | "x1";
      if (file) {
        file.text().then((content) => {
          const area = root.querySelector<HTMLTextAreaElement>(`#${key}`);
          if (area) area.value = content;
          update((s) => {
            s[key] = content;
          });
        });
      }
    }
  });

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLInputElement | HTMLTextAreaElement;
    const field = target.dataset.field;
    if (!field) return;
    update((s) => {
      if (field === "x0" || field === "u0" || field === "x1") {
        s[field] = target.value;
      } else if (field === "monomials" || field === "theta") {
        s[field] = target.value;
      } else if (field.startsWith("stateSpace.") || field.startsWith("initialSet.")) {
        const [box, side] = field.split(".") as ["stateSpace" | "initialSet", "lower" | "upper"];
        s[box][side] = target.value;
      } else if (field.startsWith("unsafe.")) {
        const [, index, side] = field.split(".");
        s.unsafeSets[Number(index)][side as "lower" | "upper"] = target.value;
      }
    });
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "add-unsafe") {
      update((s) => {
        s.unsafeSets.push({ lower: "", upper: "" });
      });
    } else if (target.dataset.removeUnsafe !== undefined) {
      update((s) => {
        s.unsafeSets.splice(Number(target.dataset.removeUnsafe), 1);
        if (s.unsafeSets.length === 0) s.unsafeSets.push({ lower: "", upper: "" });
      });
    } else if (target.id === "reset") {
      app.reset();
    }
  });

  const submit = async () => {
    if (state.busy) return;
    const built = buildRequest(state);
    if (!built.ok) {
      renderError(root, built.error);
      return;
    }
    update((s) => {
      s.busy = true;
    });
    const result = await client.synthesize(built.payload);
    update((s) => {
      s.busy = false;
    });
    if (result.ok) {
      renderReport(root, result.body);
    } else {
      renderError(root, result.error);
    }
  };

  root.querySelector("#synth-form")?.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });
  document.addEventListener("keydown", (event) => {
    if ((event.metaKey || event.ctrlKey) && event.key === "Enter") {
      event.preventDefault();
      void submit();
    }
  });

  const reset = () => {
    state = initialState();
    buildForm(root);
    syncForm(root, state);
  };

  const app = { submit, reset } as App;
  Object.defineProperty(app, "state", {
    get: () => state,
    set: (next: FormState) => {
      state = next;
      syncForm(root, state);
    },
  });
  return app;
}

declare global {
  interface Window {
    __certsynthApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const root = document.getElementById("app") as HTMLElement;
  window.__certsynthApp = mount(root, new ApiClient(""));
}
