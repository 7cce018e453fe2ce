/** System page: one status snapshot, refreshed on the shared poll cadence. */

import { AppContext, PageHandle } from "../app.js";
import { clear, el, errorBanner, jsonBlock, seconds } from "../format.js";
import { Poller } from "../poll.js";

function statCard(label: string, value: string): HTMLElement {
  return el("div", { class: "stat" },
    el("div", { class: "stat-value" }, value),
    el("div", { class: "stat-label" }, label),
  );
}

export function renderSystem(root: HTMLElement, ctx: AppContext): PageHandle {
  const host = el("div", {});
  root.append(el("section", {}, el("h2", {}, "System"), host));

  async function refresh(): Promise<void> {
    try {
      const status = await ctx.client.systemStatus();
      clear(host);
      const byStatus = Object.entries(status.jobs.by_status)
        .map(([state, count]) => `${state} ${count}`)
        .join(" · ") || "none";
      const operational = status.backends.filter((b) => b.operational).length;
      host.append(
        el("div", { class: "stat-row" },
          statCard("uptime", seconds(status.uptime_seconds)),
          statCard("jobs", String(status.jobs.total)),
          statCard("jobs by status", byStatus),
          statCard("backends up", `${operational}/${status.backends.length}`),
        ),
        el("div", { class: "card" },
          el("h3", {}, "Functions"),
          jsonBlock(status.functions),
        ),
        el("div", { class: "card" },
          el("h3", {}, "Invocations"),
          jsonBlock(status.invocations),
        ),
      );
    } catch (error) {
      clear(host);
      host.append(errorBanner(error));
    }
  }

  const poller = new Poller(ctx.session.pollIntervalMillis, refresh);
  poller.start();
  return { destroy: () => poller.stop() };
}
