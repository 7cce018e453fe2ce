/** Invoke page: builds the invocation request from the form and renders the
 * response, including the all-possible-values table for sampling functions.
 */

import { InvokeRequest, InvokeResponse } from "../api.js";
import { AppContext, PageHandle } from "../app.js";
import { clear, el, errorBanner, jsonBlock, table } from "../format.js";

export function renderInvoke(root: HTMLElement, ctx: AppContext): PageHandle {
  const functionSelect = el("select", {});
  const inputField = el("input", { type: "text", value: "4", spellcheck: "false" });
  const shotsField = el("input", { type: "number", min: "1", value: "1024" });
  const seedField = el("input", { type: "text", placeholder: "random", spellcheck: "false" });
  const providerSelect = el("select", {});
  const modeSelect = el("select", {});
  modeSelect.append(
    new Option("autoselect least busy", "autoselect"),
    new Option("named backend", "named"),
  );
  const typeSelect = el("select", {});
  typeSelect.append(
    new Option("any type", ""),
    new Option("simulator", "simulator"),
    new Option("qpu", "qpu"),
  );
  const backendSelect = el("select", {});
  const waitToggle = el("input", { type: "checkbox", checked: "checked" });
  const submit = el("button", { type: "submit", class: "primary" }, "Invoke");
  const output = el("div", {});

  const namedRow = el("label", {}, "Backend", backendSelect);
  const typeRow = el("label", {}, "Type filter", typeSelect);

  function syncMode(): void {
    const named = modeSelect.value === "named";
    namedRow.style.display = named ? "" : "none";
    typeRow.style.display = named ? "none" : "";
  }
  modeSelect.addEventListener("change", syncMode);

  async function loadChoices(): Promise<void> {
    const [functions, providers, backends] = await Promise.all([
      ctx.client.listFunctions(),
      ctx.client.listProviders(),
      ctx.client.listBackends(),
    ]);
    clear(functionSelect);
    for (const record of functions.items) {
      if (record.status === "DEPLOYED") {
        functionSelect.append(new Option(`${record.name} (v${record.version})`, record.name));
      }
    }
    if (ctx.session.selectedFunction) {
      functionSelect.value = ctx.session.selectedFunction;
    }
    clear(providerSelect);
    for (const provider of providers.items) {
      providerSelect.append(new Option(provider.name, provider.name));
    }
    providerSelect.value = "internal";
    clear(backendSelect);
    for (const backend of backends.items) {
      backendSelect.append(
        new Option(`${backend.name} (${backend.provider}, ${backend.qubits}q)`, backend.name),
      );
    }
  }

  function buildRequest(): InvokeRequest {
    const request: InvokeRequest = {
      shots: Number(shotsField.value),
      waitForResult: waitToggle.checked,
      provider: providerSelect.value,
    };
    const rawInput = inputField.value.trim();
    if (rawInput !== "") {
      request.input = /^-?\d+$/.test(rawInput) ? Number(rawInput) : rawInput;
    }
    const rawSeed = seedField.value.trim();
    if (rawSeed !== "") request.seed = Number(rawSeed);
    if (modeSelect.value === "named") {
      request.backendInfo = { backendName: backendSelect.value, autoselect: false };
    } else {
      request.backendInfo = { autoselect: true };
      if (typeSelect.value) request.backendInfo.type = typeSelect.value;
    }
    return request;
  }

  function renderResponse(response: InvokeResponse): void {
    clear(output);
    const card = el("div", { class: "card" });
    if (response.job_id && response.result === undefined) {
      card.append(
        el("h3", {}, "Job accepted"),
        el("p", {}, "Running without wait; track it on the Jobs page."),
        el("p", {}, el("code", {}, response.job_id)),
      );
      output.append(card);
      return;
    }
    card.append(
      el("h3", {}, "Result"),
      el("div", { class: "result-value" }, JSON.stringify(response.result)),
      el("p", { class: "muted" }, `backend: ${response.backend_device}`),
    );
    const detail = response.detail;
    if (detail) {
      if (typeof detail.random_number_binary === "string") {
        card.append(el("p", {}, "Binary: ", el("code", {}, detail.random_number_binary)));
      }
      const outcomes = detail.all_possible_values;
      if (outcomes && typeof outcomes === "object") {
        const rows = Object.entries(outcomes).map(([binary, value]) => [
          el("code", {}, binary),
          String(value),
        ]);
        card.append(
          el("h4", {}, "All possible values"),
          table(["Outcome", "Value"], rows, "data compact"),
        );
      }
      card.append(el("details", {},
        el("summary", {}, "Raw response"),
        jsonBlock(response),
      ));
    }
    output.append(card);
  }

  const form = el("form", { class: "card invoke-form" },
    el("h2", {}, "Invoke"),
    el("label", {}, "Function", functionSelect),
    el("div", { class: "field-row" },
      el("label", {}, "Input", inputField),
      el("label", {}, "Shots", shotsField),
      el("label", {}, "Seed", seedField),
    ),
    el("div", { class: "field-row" },
      el("label", {}, "Provider", providerSelect),
      el("label", {}, "Selection", modeSelect),
      typeRow,
      namedRow,
    ),
    el("label", { class: "toggle" }, waitToggle, " wait for result"),
    submit,
  );
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    clear(output);
    submit.setAttribute("disabled", "disabled");
    try {
      const response = await ctx.client.invoke(functionSelect.value, buildRequest());
      renderResponse(response);
    } catch (error) {
      output.append(errorBanner(error));
    } finally {
      submit.removeAttribute("disabled");
    }
  });

  root.append(form, output);
  syncMode();
  void loadChoices().catch((error) => output.append(errorBanner(error)));
  return {};
}
