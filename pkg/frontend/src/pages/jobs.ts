/** Jobs page: live-polled list with a status timeline and result viewer. */

import { JobDoc } from "../api.js";
import { AppContext, PageHandle } from "../app.js";
import { clear, el, errorBanner, jsonBlock, seconds, shortId, statusBadge, table, timestamp } from "../format.js";
import { Poller } from "../poll.js";

function timeline(job: JobDoc): HTMLElement {
  const steps: [string, string | null][] = [
    ["submitted", job.submit_time],
    ["running", job.running_start_time],
    ["completed", job.completion_time],
  ];
  const list = el("ul", { class: "timeline" });
  for (const [label, at] of steps) {
    list.append(el("li", { class: at ? "done" : "pending" },
      el("span", { class: "step" }, label), " ", timestamp(at)));
  }
  return list;
}

export function renderJobs(root: HTMLElement, ctx: AppContext): PageHandle {
  const notice = el("div", {});
  const listHost = el("div", {});
  const detailHost = el("div", {});
  root.append(
    el("section", {}, el("h2", {}, "Jobs"), notice, listHost),
    el("section", {}, detailHost),
  );

  let selected: string | null = null;

  function renderDetail(job: JobDoc): void {
    clear(detailHost);
    const card = el("div", { class: "card" },
      el("h3", {}, `Job ${shortId(job.job_id)}`),
      statusBadge(job.status),
      timeline(job),
      el("p", { class: "muted" },
        `${job.function_name} on ${job.backend_name} · ${job.shots} shots · ${seconds(job.total_run_time)}`),
    );
    if (job.error) card.append(errorBanner({ code: "JobError", message: job.error }));
    if (job.result !== null && job.result !== undefined) {
      card.append(el("div", { class: "result-value" }, JSON.stringify(job.result)));
    }
    if (job.counts) {
      const total = Object.values(job.counts).reduce((a, b) => a + b, 0) || 1;
      const rows = Object.entries(job.counts)
        .sort((a, b) => b[1] - a[1])
        .slice(0, 32)
        .map(([key, count]) => {
          const bar = el("div", { class: "bar" });
          bar.style.width = `${Math.max(2, Math.round((count / total) * 100))}%`;
          return [el("code", {}, key), String(count), bar];
        });
      card.append(el("h4", {}, "Counts"), table(["Outcome", "Shots", ""], rows, "data compact"));
    }
    card.append(el("details", {}, el("summary", {}, "Raw document"), jsonBlock(job)));
    detailHost.append(card);
  }

  async function refresh(): Promise<void> {
    const page = await ctx.client.listJobs(0, 50);
    clear(listHost);
    if (page.items.length === 0) {
      listHost.append(el("p", { class: "muted" }, "No jobs yet."));
      return;
    }
    const rows = page.items
      .slice()
      .reverse()
      .map((job) => {
        const open = el("button", { type: "button" }, "View");
        open.addEventListener("click", async () => {
          selected = job.job_id;
          renderDetail(await ctx.client.getJob(job.job_id));
        });
        const remove = el("button", { type: "button", class: "danger" }, "Delete");
        remove.addEventListener("click", async () => {
          try {
            await ctx.client.deleteJob(job.job_id);
            clear(notice);
            if (selected === job.job_id) {
              selected = null;
              clear(detailHost);
            }
            await refresh();
          } catch (error) {
            clear(notice);
            notice.append(errorBanner(error));
          }
        });
        return [
          el("code", {}, shortId(job.job_id)),
          job.function_name,
          job.backend_name,
          statusBadge(job.status),
          String(job.shots),
          timestamp(job.submit_time),
          seconds(job.total_run_time),
          el("span", { class: "actions" }, open, remove),
        ];
      });
    listHost.append(table(
      ["Job", "Function", "Backend", "Status", "Shots", "Submitted", "Runtime", ""],
      rows,
    ));
    if (selected) {
      try {
        renderDetail(await ctx.client.getJob(selected));
      } catch {
        selected = null;
        clear(detailHost);
      }
    }
  }

  const poller = new Poller(ctx.session.pollIntervalMillis, refresh);
  poller.start();
  return { destroy: () => poller.stop() };
}
