/** Typed client for the qfaas gateway REST API.
 *
 * The dashboard and the integration harness share this module, so every
 * request the UI can make goes through `call` and is visible to the
 * `onRequest` trace hook. The client never invents endpoints: each method
 * maps to exactly one documented route.
 */

export interface ErrorBody {
  code: string;
  message: string;
  detail: unknown;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export interface RequestTrace {
  method: string;
  path: string;
  status: number;
}

export interface Page<T> {
  items: T[];
  total: number;
  offset: number;
  limit: number | null;
}

export interface UserDoc {
  id: string;
  username: string;
  role: "administrator" | "engineer" | "end_user";
  created_at: string;
  token?: string;
}

export interface FunctionRecord {
  name: string;
  author: string;
  source: string;
  dialect_tag: string;
  kind: string;
  declared_params: string[];
  processors: { pre: string; post: string };
  config: Record<string, unknown>;
  image_digest: string;
  replicas: number;
  active_replicas: number;
  endpoint: string;
  status: string;
  version: number;
  created_at: string;
  updated_at: string;
}

export interface FunctionLogs {
  name: string;
  status: string;
  version: number;
  build_log: string[];
}

export interface CreateFunctionRequest {
  name: string;
  source: string;
  dialectTag?: string;
  processors?: { pre?: string; post?: string };
  config?: Record<string, unknown>;
  replicas?: number;
}

export interface UpdateFunctionRequest {
  source?: string;
  dialectTag?: string;
  processors?: { pre?: string; post?: string };
  config?: Record<string, unknown>;
}

export interface JobDoc {
  job_id: string;
  provider_job_id: string;
  owner: string;
  function_name: string;
  backend_name: string;
  shots: number;
  seed: number;
  status: "QUEUED" | "RUNNING" | "DONE" | "ERROR";
  submit_time: string | null;
  running_start_time: string | null;
  completion_time: string | null;
  total_run_time: number | null;
  counts: Record<string, number> | null;
  result: unknown;
  detail: Record<string, unknown> | null;
  error: string | null;
}

export interface BackendDoc {
  name: string;
  provider: string;
  type: string;
  qubits: number;
  operational: boolean;
  queue_length: number;
  per_task_price: string;
  per_shot_price: string;
}

export interface ProviderDoc {
  name: string;
  kind: string;
  backends: string[];
  requires_credential: boolean;
}

export interface BackendInfoRequest {
  backendName?: string;
  autoselect?: boolean;
  type?: string | string[];
  internal?: boolean;
  apiToken?: string;
  hub?: string;
}

export interface InvokeRequest {
  input?: number | string;
  shots?: number;
  seed?: number;
  provider?: string;
  waitForResult?: boolean;
  backendInfo?: BackendInfoRequest;
}

export interface ProviderInfo {
  shots: number;
  job_id: string;
  job_status: string;
  running_start_time: string | null;
  completion_time: string | null;
  total_run_time: number | null;
}

/** Synchronous invocation response; detail keys vary by post-processor. */
export interface InvokeResponse {
  result: unknown;
  backend_device: string;
  detail?: {
    provider_info: ProviderInfo;
    random_number_binary?: string;
    counts?: number;
    all_possible_values?: Record<string, number>;
    [key: string]: unknown;
  };
  job_id?: string;
}

export interface SystemStatus {
  uptime_seconds: number;
  functions: Record<string, unknown>;
  invocations: Record<string, unknown>;
  backends: BackendDoc[];
  jobs: { total: number; by_status: Record<string, number> };
}

export interface ClientOptions {
  fetchImpl?: typeof fetch;
  onRequest?: (trace: RequestTrace) => void;
}

function isErrorBody(value: unknown): value is ErrorBody {
  return (
    typeof value === "object" &&
    value !== null &&
    typeof (value as ErrorBody).code === "string" &&
    typeof (value as ErrorBody).message === "string"
  );
}

export class QfaasClient {
  readonly baseUrl: string;
  token: string | null;
  private readonly fetchImpl: typeof fetch;
  private readonly onRequest?: (trace: RequestTrace) => void;

  constructor(baseUrl: string, token: string | null = null, options: ClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.token = token;
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
    this.onRequest = options.onRequest;
  }

  private async call<T>(
    method: string,
    path: string,
    body?: unknown,
    query?: Record<string, string | number | undefined>,
  ): Promise<T> {
    let url = this.baseUrl + path;
    if (query) {
      const params = new URLSearchParams();
      for (const [key, value] of Object.entries(query)) {
        if (value !== undefined) params.set(key, String(value));
      }
      const qs = params.toString();
      if (qs) url += "?" + qs;
    }
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchImpl(url, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    this.onRequest?.({ method, path, status: response.status });
    const text = await response.text();
    let parsed: unknown = null;
    if (text) {
      try {
        parsed = JSON.parse(text);
      } catch {
        throw new ApiError(response.status, {
          code: "BadResponse",
          message: `non-JSON response (${response.status})`,
          detail: text.slice(0, 200),
        });
      }
    }
    if (!response.ok) {
      if (isErrorBody(parsed)) throw new ApiError(response.status, parsed);
      throw new ApiError(response.status, {
        code: "HTTPError",
        message: `unexpected status ${response.status}`,
        detail: parsed,
      });
    }
    return parsed as T;
  }

  // -- users ------------------------------------------------------------

  me(): Promise<UserDoc> {
    return this.call("GET", "/api/users/me");
  }

  listUsers(offset?: number, limit?: number): Promise<Page<UserDoc>> {
    return this.call("GET", "/api/users", undefined, { offset, limit });
  }

  createUser(username: string, role: string): Promise<UserDoc> {
    return this.call("POST", "/api/users", { username, role });
  }

  getUser(userId: string): Promise<UserDoc> {
    return this.call("GET", `/api/users/${encodeURIComponent(userId)}`);
  }

  deleteUser(userId: string): Promise<{ deleted: string }> {
    return this.call("DELETE", `/api/users/${encodeURIComponent(userId)}`);
  }

  // -- functions ----------------------------------------------------------

  listFunctions(offset?: number, limit?: number): Promise<Page<FunctionRecord>> {
    return this.call("GET", "/api/functions", undefined, { offset, limit });
  }

  getFunction(name: string): Promise<FunctionRecord> {
    return this.call("GET", `/api/functions/${encodeURIComponent(name)}`);
  }

  createFunction(request: CreateFunctionRequest): Promise<FunctionRecord> {
    return this.call("POST", "/api/functions", request);
  }

  updateFunction(name: string, patch: UpdateFunctionRequest): Promise<FunctionRecord> {
    return this.call("PUT", `/api/functions/${encodeURIComponent(name)}`, patch);
  }

  deleteFunction(name: string): Promise<{ deleted: string }> {
    return this.call("DELETE", `/api/functions/${encodeURIComponent(name)}`);
  }

  scaleFunction(name: string, replicas: number): Promise<FunctionRecord> {
    return this.call("POST", `/api/functions/${encodeURIComponent(name)}/scale`, {
      replicas,
    });
  }

  functionLogs(name: string): Promise<FunctionLogs> {
    return this.call("GET", `/api/functions/${encodeURIComponent(name)}/logs`);
  }

  // -- jobs --------------------------------------------------------------

  listJobs(offset?: number, limit?: number): Promise<Page<JobDoc>> {
    return this.call("GET", "/api/jobs", undefined, { offset, limit });
  }

  getJob(jobId: string): Promise<JobDoc> {
    return this.call("GET", `/api/jobs/${encodeURIComponent(jobId)}`);
  }

  deleteJob(jobId: string): Promise<{ deleted: string }> {
    return this.call("DELETE", `/api/jobs/${encodeURIComponent(jobId)}`);
  }

  // -- providers / backends ------------------------------------------------

  listProviders(): Promise<Page<ProviderDoc>> {
    return this.call("GET", "/api/providers");
  }

  registerCredential(provider: string, credential: string): Promise<{ provider: string; registered: boolean }> {
    return this.call("POST", `/api/providers/${encodeURIComponent(provider)}/credentials`, {
      credential,
    });
  }

  listCredentials(): Promise<{ providers: string[] }> {
    return this.call("GET", "/api/credentials");
  }

  listBackends(): Promise<Page<BackendDoc>> {
    return this.call("GET", "/api/backends");
  }

  getBackend(name: string): Promise<BackendDoc> {
    return this.call("GET", `/api/backends/${encodeURIComponent(name)}`);
  }

  // -- system / invocation ---------------------------------------------------

  systemStatus(): Promise<SystemStatus> {
    return this.call("GET", "/api/system/status");
  }

  invoke(name: string, request: InvokeRequest): Promise<InvokeResponse> {
    return this.call("POST", `/function/${encodeURIComponent(name)}`, request);
  }
}
