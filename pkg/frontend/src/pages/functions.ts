/** Functions page: list, create with a source editor, update, scale, delete,
 * and deployment logs. Mutations refresh the table read-after-write.
 */

import { FunctionRecord } from "../api.js";
import { AppContext, PageHandle } from "../app.js";
import { clear, el, errorBanner, jsonBlock, statusBadge, table, timestamp } from "../format.js";
import { Poller } from "../poll.js";

const MAX_SOURCE_BYTES = 64 * 1024; // editor-side sanity check only

const STARTER_SOURCE = `qir 1;
qubits 2;
h 0;
cx 0, 1;
measure all;
`;

export function renderFunctions(root: HTMLElement, ctx: AppContext): PageHandle {
  const notice = el("div", {});
  const listHost = el("div", {});
  const editorHost = el("div", {});
  root.append(
    el("section", {}, el("h2", {}, "Functions"), notice, listHost),
    el("section", {}, editorHost),
  );

  let editing: FunctionRecord | null = null;

  function showError(error: unknown): void {
    clear(notice);
    notice.append(errorBanner(error));
  }

  async function refresh(): Promise<void> {
    const page = await ctx.client.listFunctions();
    clear(listHost);
    if (page.items.length === 0) {
      listHost.append(el("p", { class: "muted" }, "No functions deployed yet."));
      return;
    }
    const rows = page.items.map((record) => {
      const actions = el("span", { class: "actions" });
      const invokeButton = el("button", { type: "button" }, "Invoke");
      invokeButton.addEventListener("click", () => {
        ctx.session.selectedFunction = record.name;
        ctx.navigate("invoke");
      });
      const editButton = el("button", { type: "button" }, "Edit");
      editButton.addEventListener("click", () => {
        editing = record;
        renderEditor();
      });
      const scaleButton = el("button", { type: "button" }, "Scale");
      scaleButton.addEventListener("click", async () => {
        const raw = window.prompt(`Replicas for ${record.name}`, String(record.replicas));
        if (raw === null) return;
        const replicas = Number(raw);
        if (!Number.isInteger(replicas)) {
          showError({ code: "ValidationError", message: "replicas must be an integer" });
          return;
        }
        try {
          await ctx.client.scaleFunction(record.name, replicas);
          clear(notice);
          await refresh();
        } catch (error) {
          showError(error);
        }
      });
      const logsButton = el("button", { type: "button" }, "Logs");
      logsButton.addEventListener("click", async () => {
        try {
          const logs = await ctx.client.functionLogs(record.name);
          clear(notice);
          notice.append(
            el("div", { class: "card" },
              el("h3", {}, `Build log · ${logs.name} v${logs.version}`),
              el("pre", { class: "log" }, logs.build_log.join("\n")),
            ),
          );
        } catch (error) {
          showError(error);
        }
      });
      const deleteButton = el("button", { type: "button", class: "danger" }, "Delete");
      deleteButton.addEventListener("click", async () => {
        if (!window.confirm(`Delete function ${record.name}?`)) return;
        try {
          await ctx.client.deleteFunction(record.name);
          clear(notice);
          await refresh();
        } catch (error) {
          showError(error);
        }
      });
      actions.append(invokeButton, editButton, scaleButton, logsButton, deleteButton);
      return [
        el("code", {}, record.name),
        `v${record.version}`,
        statusBadge(record.status),
        `${record.active_replicas}/${record.replicas}`,
        record.processors.post,
        el("code", {}, record.endpoint),
        timestamp(record.updated_at),
        actions,
      ];
    });
    listHost.append(
      table(
        ["Name", "Version", "Status", "Replicas", "Post", "Endpoint", "Updated", ""],
        rows,
      ),
    );
  }

  function renderEditor(): void {
    clear(editorHost);
    const isUpdate = editing !== null;
    const nameInput = el("input", {
      type: "text",
      value: editing ? editing.name : "",
      placeholder: "function name",
      spellcheck: "false",
    });
    if (isUpdate) nameInput.setAttribute("disabled", "disabled");
    const sourceArea = el("textarea", { rows: "10", spellcheck: "false" });
    sourceArea.value = editing ? editing.source : STARTER_SOURCE;
    const postInput = el("input", {
      type: "text",
      value: editing ? editing.processors.post : "most_frequent",
    });
    const replicasInput = el("input", {
      type: "number",
      min: "1",
      value: editing ? String(editing.replicas) : "1",
    });
    if (isUpdate) replicasInput.setAttribute("disabled", "disabled");
    const status = el("div", {});
    const submit = el("button", { type: "submit", class: "primary" },
      isUpdate ? `Update ${editing!.name}` : "Create function");
    const cancel = el("button", { type: "button", class: "ghost" }, "Reset");
    cancel.addEventListener("click", () => {
      editing = null;
      renderEditor();
    });

    const form = el("form", { class: "card editor" },
      el("h3", {}, isUpdate ? "Update function" : "New function"),
      el("label", {}, "Name", nameInput),
      el("label", {}, "Circuit source", sourceArea),
      el("div", { class: "field-row" },
        el("label", {}, "Post-processor", postInput),
        el("label", {}, "Replicas", replicasInput),
      ),
      el("div", { class: "field-row" }, submit, cancel),
      status,
    );
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      clear(status);
      const source = sourceArea.value;
      if (new TextEncoder().encode(source).length > MAX_SOURCE_BYTES) {
        status.append(errorBanner({
          code: "ValidationError",
          message: `source exceeds ${MAX_SOURCE_BYTES} bytes; authoritative checks run server-side`,
        }));
        return;
      }
      try {
        if (isUpdate) {
          await ctx.client.updateFunction(editing!.name, {
            source,
            processors: { post: postInput.value.trim() },
          });
        } else {
          await ctx.client.createFunction({
            name: nameInput.value.trim(),
            source,
            processors: { post: postInput.value.trim() },
            replicas: Number(replicasInput.value),
          });
        }
        editing = null;
        renderEditor();
        await refresh();
      } catch (error) {
        // BuildError detail carries line/column from the server's parser
        status.append(errorBanner(error));
        if (error && typeof error === "object" && "detail" in error) {
          const detail = (error as { detail: unknown }).detail;
          if (detail && Object.keys(detail as object).length > 0) {
            status.append(jsonBlock(detail));
          }
        }
      }
    });
    editorHost.append(form);
  }

  renderEditor();
  const poller = new Poller(ctx.session.pollIntervalMillis, refresh);
  poller.start();
  return { destroy: () => poller.stop() };
}
