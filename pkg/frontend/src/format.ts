/** Small rendering helpers shared by the pages. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function shortId(id: string): string {
  return id.length > 12 ? id.slice(0, 12) : id;
}

export function timestamp(iso: string | null): string {
  if (!iso) return "-";
  const date = new Date(iso);
  if (Number.isNaN(date.getTime())) return iso;
  return date.toLocaleTimeString(undefined, { hour12: false });
}

export function seconds(value: number | null | undefined): string {
  if (value === null || value === undefined) return "-";
  return value < 1 ? `${Math.round(value * 1000)} ms` : `${value.toFixed(2)} s`;
}

export function statusBadge(status: string): HTMLElement {
  return el("span", { class: `badge badge-${status.toLowerCase()}` }, status);
}

export function jsonBlock(value: unknown): HTMLElement {
  return el("pre", { class: "json" }, JSON.stringify(value, null, 2));
}

/** Table from a header row and cell rows; cells may be nodes or strings. */
export function table(
  headers: string[],
  rows: (Node | string)[][],
  className = "data",
): HTMLTableElement {
  const head = el("tr", {});
  for (const header of headers) head.append(el("th", {}, header));
  const body = el("tbody", {});
  for (const row of rows) {
    const tr = el("tr", {});
    for (const cell of row) tr.append(el("td", {}, cell));
    body.append(tr);
  }
  const tableNode = el("table", { class: className });
  tableNode.append(el("thead", {}, head), body);
  return tableNode;
}

/** Inline error banner with the server's code and message. */
export function errorBanner(error: unknown): HTMLElement {
  let code = "Error";
  let message = String(error);
  if (error && typeof error === "object" && "code" in error && "message" in error) {
    code = String((error as { code: unknown }).code);
    message = String((error as { message: unknown }).message);
  }
  return el("div", { class: "error-banner" }, el("strong", {}, code), ` ${message}`);
}
