/**
 * Typed client for the annotation service.
 *
 * Saves never overwrite silently: putAnnotation reports a 409 conflict
 * as data (with the server's current version) and the caller must
 * decide to reload or re-submit.
 */
import type {
  AnnotationDoc,
  PoseResponse,
  SaveResult,
  SequenceInfo,
  TaxonomyResponse,
  Violation,
} from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  listSequences(): Promise<SequenceInfo[]> {
    return this.getJson("/api/sequences");
  }

  getPoses(
    sequenceId: string,
    from: number,
    to: number,
    aligned = true,
  ): Promise<PoseResponse> {
    const params = new URLSearchParams({
      from: String(from),
      to: String(to),
      aligned: String(aligned),
    });
    return this.getJson(
      `/api/sequences/${encodeURIComponent(sequenceId)}/poses?${params}`,
    );
  }

  getAnnotation(sequenceId: string): Promise<AnnotationDoc> {
    return this.getJson(
      `/api/sequences/${encodeURIComponent(sequenceId)}/annotation`,
    );
  }

  async putAnnotation(
    sequenceId: string,
    annotation: AnnotationDoc,
    expectedVersion: number,
    mode: "strict" | "lenient" = "strict",
  ): Promise<SaveResult> {
    const response = await this.fetchImpl(
      `${this.base}/api/sequences/${encodeURIComponent(sequenceId)}/annotation`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          expected_version: expectedVersion,
          mode,
          annotation,
        }),
      },
    );
    if (response.status === 200) {
      const body = (await response.json()) as { version: number };
      return { ok: true, version: body.version };
    }
    const body = await response.json().catch(() => ({}));
    if (response.status === 409) {
      return {
        ok: false,
        kind: "conflict",
        currentVersion: (body as { current_version: number }).current_version,
      };
    }
    if (response.status === 422) {
      return {
        ok: false,
        kind: "invalid",
        violations: ((body as { violations?: Violation[] }).violations ?? []),
        message: (body as { error?: string }).error ?? "invalid annotation",
      };
    }
    return {
      ok: false,
      kind: "error",
      status: response.status,
      message: (body as { error?: string }).error ?? response.statusText,
    };
  }

  async validate(
    annotation: AnnotationDoc,
    mode: "strict" | "lenient" = "strict",
  ): Promise<Violation[]> {
    const response = await this.fetchImpl(`${this.base}/api/validate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotation, mode }),
    });
    if (!response.ok) {
      throw new Error(`validate failed: ${response.status}`);
    }
    const body = (await response.json()) as { violations: Violation[] };
    return body.violations;
  }

  taxonomy(level: "set" | "element"): Promise<TaxonomyResponse> {
    return this.getJson(`/api/taxonomy?level=${level}`);
  }

  stats(): Promise<Record<string, unknown>> {
    return this.getJson("/api/stats");
  }
}
