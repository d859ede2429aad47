/** Typed fetch client for the workbench HTTP API. */

import type { ResourceListDoc, Violation } from "./resourceList";

export interface PageInfo {
  id: string;
  width: number;
  height: number;
}

export interface RatingTask {
  pair: string | null;
  reference_image?: string;
  generated_image?: string;
  completed: number;
  total: number;
}

export interface RatingRecord {
  rater: string;
  pair: string;
  score: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly violations: Violation[] = [],
  ) {
    super(message);
  }
}

/** The surface the views depend on; WorkbenchApi is the HTTP implementation. */
export interface WorkbenchClient {
  listPages(): Promise<PageInfo[]>;
  pageImageUrl(pageId: string): string;
  getResources(pageId: string): Promise<ResourceListDoc>;
  putResources(pageId: string, doc: ResourceListDoc): Promise<void>;
  nextRatingTask(rater: string, excludePairs?: string[]): Promise<RatingTask>;
  postRating(record: RatingRecord): Promise<void>;
}

async function parseError(response: Response): Promise<ApiError> {
  let detail: unknown = null;
  try {
    detail = (await response.json()).detail;
  } catch {
    // non-JSON error body; status alone will have to do
  }
  if (detail && typeof detail === "object" && "violations" in detail) {
    const violations = (detail as { violations: Violation[] }).violations;
    return new ApiError(`validation failed (${response.status})`, response.status, violations);
  }
  const text = typeof detail === "string" ? detail : response.statusText;
  return new ApiError(`${text} (${response.status})`, response.status);
}

export class WorkbenchApi implements WorkbenchClient {
  constructor(private readonly base: string = "") {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return response;
  }

  async listPages(): Promise<PageInfo[]> {
    const body = await (await this.request("/api/pages")).json();
    return body.pages;
  }

  pageImageUrl(pageId: string): string {
    return `${this.base}/api/pages/${encodeURIComponent(pageId)}/image`;
  }

  async getResources(pageId: string): Promise<ResourceListDoc> {
    const response = await this.request(
      `/api/pages/${encodeURIComponent(pageId)}/resources`,
    );
    return response.json();
  }

  async putResources(pageId: string, doc: ResourceListDoc): Promise<void> {
    await this.request(`/api/pages/${encodeURIComponent(pageId)}/resources`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
  }

  async nextRatingTask(rater: string, excludePairs: string[] = []): Promise<RatingTask> {
    const params = new URLSearchParams({ rater });
    if (excludePairs.length) {
      params.set("exclude", excludePairs.join(","));
    }
    const response = await this.request(`/api/rating-tasks/next?${params}`);
    return response.json();
  }

  async postRating(record: RatingRecord): Promise<void> {
    await this.request("/api/ratings", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
  }

  async startGeneration(pageId: string, strategy: string): Promise<string> {
    const response = await this.request(
      `/api/pages/${encodeURIComponent(pageId)}/generate`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ strategy }),
      },
    );
    return (await response.json()).job;
  }

  async jobStatus(jobId: string): Promise<{ status: string; error: string | null }> {
    const response = await this.request(`/api/jobs/${encodeURIComponent(jobId)}`);
    return response.json();
  }
}
