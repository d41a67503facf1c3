/** Thin client for the design-feedback HTTP API. All feedback content
 * comes from the server; the browser never computes any. */
import type { ProjectDoc, ReportDoc, RevisionDescriptor } from "./types.js";

/** Minimal response surface so tests can substitute a bare transport. */
export interface MinimalResponse {
  ok: boolean;
  status: number;
  text(): Promise<string>;
}

export interface MinimalRequestInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string | Uint8Array;
}

export type FetchLike = (input: string, init?: MinimalRequestInit) => Promise<MinimalResponse>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`api error ${status}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private token: string | null = null,
    private fetchImpl: FetchLike = (input, init) =>
      globalThis.fetch(input, init as RequestInit) as Promise<MinimalResponse>,
  ) {}

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(path: string, init: MinimalRequestInit = {}): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      ...init,
      headers: this.headers(init.headers ?? {}),
    });
    const text = await response.text();
    const body = text ? JSON.parse(text) : null;
    if (!response.ok) throw new ApiError(response.status, body);
    return body as T;
  }

  listProjects(): Promise<ProjectDoc[]> {
    return this.request("/projects");
  }

  createProject(name: string): Promise<ProjectDoc> {
    return this.request("/projects", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ name }),
    });
  }

  deleteProject(id: string): Promise<unknown> {
    return this.request(`/projects/${id}`, { method: "DELETE" });
  }

  listRevisions(projectId: string): Promise<{ project_id: string; revisions: RevisionDescriptor[] }> {
    return this.request(`/projects/${projectId}/revisions`);
  }

  /** POST the image as multipart form data; resolves with the queued
   * revision descriptor (the server answers 202). The multipart body is
   * assembled by hand so any fetch transport can carry it. */
  async uploadRevision(projectId: string, filename: string, bytes: Uint8Array): Promise<RevisionDescriptor> {
    const boundary = `----vizcritic${Math.random().toString(36).slice(2)}`;
    const mime = filename.toLowerCase().endsWith(".png") ? "image/png" : "image/jpeg";
    const encoder = new TextEncoder();
    const head = encoder.encode(
      `--${boundary}\r\n` +
        `Content-Disposition: form-data; name="image"; filename="${filename}"\r\n` +
        `Content-Type: ${mime}\r\n\r\n`,
    );
    const tail = encoder.encode(`\r\n--${boundary}--\r\n`);
    const body = new Uint8Array(head.length + bytes.length + tail.length);
    body.set(head, 0);
    body.set(bytes, head.length);
    body.set(tail, head.length + bytes.length);

    const response = await this.fetchImpl(`${this.baseUrl}/projects/${projectId}/revisions`, {
      method: "POST",
      headers: this.headers({ "Content-Type": `multipart/form-data; boundary=${boundary}` }),
      body,
    });
    const parsed = JSON.parse(await response.text());
    if (response.status !== 202) throw new ApiError(response.status, parsed);
    return parsed as RevisionDescriptor;
  }

  getReport(projectId: string, sequence: number): Promise<ReportDoc> {
    return this.request(`/projects/${projectId}/revisions/${sequence}/report`);
  }

  getArchivePair(projectId: string, a: number, b: number): Promise<{ a: ReportDoc; b: ReportDoc }> {
    return this.request(`/projects/${projectId}/archive?a=${a}&b=${b}`);
  }

  artifactUrl(projectId: string, sequence: number, ref: string): string {
    return `${this.baseUrl}/artifacts/${projectId}/revisions/${sequence}/${ref}`;
  }
}
