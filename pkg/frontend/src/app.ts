/** Dashboard shell: session handling, role-gated navigation, hash routing.
 *
 * The server is the enforcement point for permissions; the nav only mirrors
 * the role matrix so users are not offered pages that would 403.
 */

import { ApiError, QfaasClient, UserDoc } from "./api.js";
import { clear, el, errorBanner } from "./format.js";
import { renderBackends } from "./pages/backends.js";
import { renderFunctions } from "./pages/functions.js";
import { renderInvoke } from "./pages/invoke.js";
import { renderJobs } from "./pages/jobs.js";
import { renderSystem } from "./pages/system.js";
import { renderUsers } from "./pages/users.js";

const SESSION_KEY = "qfaas.session";
const DEFAULT_POLL_MILLIS = 2000;

export interface Session {
  serverUrl: string;
  token: string;
  username: string;
  role: UserDoc["role"];
  selectedFunction: string | null;
  pollIntervalMillis: number;
}

export interface AppContext {
  client: QfaasClient;
  session: Session;
  navigate(page: string): void;
  logout(): void;
}

export interface PageHandle {
  destroy?(): void;
}

type PageRenderer = (root: HTMLElement, ctx: AppContext) => PageHandle | void;

const PAGES: Record<string, { title: string; render: PageRenderer }> = {
  functions: { title: "Functions", render: renderFunctions },
  invoke: { title: "Invoke", render: renderInvoke },
  jobs: { title: "Jobs", render: renderJobs },
  backends: { title: "Backends", render: renderBackends },
  system: { title: "System", render: renderSystem },
  users: { title: "Users", render: renderUsers },
};

// End-users get the consuming views only; engineers the operating views;
// administrators additionally the user listing.
const PAGES_BY_ROLE: Record<UserDoc["role"], string[]> = {
  end_user: ["invoke", "jobs"],
  engineer: ["functions", "invoke", "jobs", "backends", "system"],
  administrator: ["functions", "invoke", "jobs", "backends", "system", "users"],
};

function loadStoredSession(): { serverUrl: string; token: string } | null {
  try {
    const raw = sessionStorage.getItem(SESSION_KEY);
    if (!raw) return null;
    const parsed = JSON.parse(raw);
    if (typeof parsed.serverUrl === "string" && typeof parsed.token === "string") {
      return { serverUrl: parsed.serverUrl, token: parsed.token };
    }
  } catch {
    sessionStorage.removeItem(SESSION_KEY);
  }
  return null;
}

function storeSession(serverUrl: string, token: string): void {
  sessionStorage.setItem(SESSION_KEY, JSON.stringify({ serverUrl, token }));
}

/** Build-time default; a data-server attribute on the root overrides it. */
function defaultServerUrl(root: HTMLElement): string {
  return root.dataset.server || window.location.origin;
}

class App {
  private readonly root: HTMLElement;
  private context: AppContext | null = null;
  private activePage: PageHandle | void = undefined;

  constructor(root: HTMLElement) {
    this.root = root;
    window.addEventListener("hashchange", () => this.route());
  }

  async boot(): Promise<void> {
    const stored = loadStoredSession();
    if (!stored) {
      this.renderLogin();
      return;
    }
    try {
      await this.openSession(stored.serverUrl, stored.token);
    } catch {
      sessionStorage.removeItem(SESSION_KEY);
      this.renderLogin();
    }
  }

  private async openSession(serverUrl: string, token: string): Promise<void> {
    const client = new QfaasClient(serverUrl, token);
    const me = await client.me();
    storeSession(serverUrl, token);
    const session: Session = {
      serverUrl,
      token,
      username: me.username,
      role: me.role,
      selectedFunction: null,
      pollIntervalMillis: DEFAULT_POLL_MILLIS,
    };
    this.context = {
      client,
      session,
      navigate: (page) => {
        window.location.hash = `#/${page}`;
      },
      logout: () => {
        sessionStorage.removeItem(SESSION_KEY);
        this.context = null;
        window.location.hash = "";
        this.renderLogin();
      },
    };
    this.route();
  }

  private renderLogin(message?: HTMLElement): void {
    this.teardownPage();
    clear(this.root);
    const serverInput = el("input", {
      type: "text",
      value: defaultServerUrl(this.root),
      autocomplete: "off",
      spellcheck: "false",
    });
    const tokenInput = el("input", {
      type: "password",
      placeholder: "access token",
      autocomplete: "off",
    });
    const status = el("div", {});
    if (message) status.append(message);
    const form = el("form", { class: "login-card" },
      el("h1", {}, "qfaas console"),
      el("label", {}, "Gateway", serverInput),
      el("label", {}, "Token", tokenInput),
      el("button", { type: "submit", class: "primary" }, "Sign in"),
      status,
    );
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      clear(status);
      try {
        await this.openSession(serverInput.value.trim(), tokenInput.value.trim());
      } catch (error) {
        status.append(errorBanner(
          error instanceof ApiError ? error : { code: "ConnectionError", message: String(error) },
        ));
      }
    });
    this.root.append(el("div", { class: "login-wrap" }, form));
  }

  private teardownPage(): void {
    if (this.activePage && this.activePage.destroy) this.activePage.destroy();
    this.activePage = undefined;
  }

  private route(): void {
    const ctx = this.context;
    if (!ctx) return;
    const allowed = PAGES_BY_ROLE[ctx.session.role];
    let page = window.location.hash.replace(/^#\//, "");
    if (!allowed.includes(page)) page = allowed[0];
    this.teardownPage();
    clear(this.root);

    const nav = el("nav", {});
    for (const name of allowed) {
      const link = el("a", { href: `#/${name}` }, PAGES[name].title);
      if (name === page) link.classList.add("active");
      nav.append(link);
    }
    const header = el("header", {},
      el("span", { class: "brand" }, "qfaas"),
      nav,
      el("span", { class: "spacer" }),
      el("span", { class: "user-chip" }, `${ctx.session.username} · ${ctx.session.role}`),
    );
    const logoutButton = el("button", { class: "ghost", type: "button" }, "Sign out");
    logoutButton.addEventListener("click", () => ctx.logout());
    header.append(logoutButton);

    const main = el("main", {});
    this.root.append(header, main);
    this.activePage = PAGES[page].render(main, ctx);
  }
}

const rootElement = document.getElementById("app");
if (rootElement) {
  void new App(rootElement).boot();
}
