/** Backends page: provider catalog with live queue depths. */

import { AppContext, PageHandle } from "../app.js";
import { clear, el, errorBanner, table } from "../format.js";
import { Poller } from "../poll.js";

export function renderBackends(root: HTMLElement, ctx: AppContext): PageHandle {
  const host = el("div", {});
  root.append(el("section", {}, el("h2", {}, "Backends"), host));

  async function refresh(): Promise<void> {
    try {
      const page = await ctx.client.listBackends();
      clear(host);
      const rows = page.items.map((backend) => [
        el("code", {}, backend.name),
        backend.provider,
        backend.type,
        String(backend.qubits),
        backend.operational
          ? el("span", { class: "badge badge-done" }, "up")
          : el("span", { class: "badge badge-error" }, "down"),
        String(backend.queue_length),
        `$${backend.per_task_price} / task`,
        `$${backend.per_shot_price} / shot`,
      ]);
      host.append(table(
        ["Name", "Provider", "Type", "Qubits", "State", "Queue", "Task price", "Shot price"],
        rows,
      ));
    } catch (error) {
      clear(host);
      host.append(errorBanner(error));
    }
  }

  const poller = new Poller(ctx.session.pollIntervalMillis, refresh);
  poller.start();
  return { destroy: () => poller.stop() };
}
