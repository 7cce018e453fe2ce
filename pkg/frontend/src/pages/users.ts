/** Users page: administrator listing. Creation and deletion stay on the
 * HTTP API; the console intentionally stops at visibility.
 */

import { AppContext, PageHandle } from "../app.js";
import { clear, el, errorBanner, table, timestamp } from "../format.js";

export function renderUsers(root: HTMLElement, ctx: AppContext): PageHandle {
  const host = el("div", {});
  root.append(el("section", {}, el("h2", {}, "Users"), host));

  void (async () => {
    try {
      const page = await ctx.client.listUsers();
      const rows = page.items.map((user) => [
        el("code", {}, user.id),
        user.username,
        user.role,
        timestamp(user.created_at),
      ]);
      clear(host);
      host.append(table(["Id", "Username", "Role", "Created"], rows));
    } catch (error) {
      clear(host);
      host.append(errorBanner(error));
    }
  })();

  return {};
}
