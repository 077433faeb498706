/** Thin typed client over the versioned HTTP contract. */

import type {
  ListFilter,
  ListResponse,
  TrendResponse,
  TriageActionResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  listChangePoints(
    status: "unprocessed" | "processed",
    filter: ListFilter = {},
  ): Promise<ListResponse> {
    const params = new URLSearchParams({ status, limit: "200" });
    if (filter.test) params.set("test", filter.test);
    if (filter.task) params.set("task", filter.task);
    if (filter.minHazard != null) params.set("min_hazard", String(filter.minHazard));
    if (filter.sort) params.set("sort", filter.sort);
    if (filter.includeTags?.length) params.set("include_tags", filter.includeTags.join(","));
    return this.getJson(`/api/v1/change-points?${params}`);
  }

  triage(
    action: "acknowledge" | "hide",
    ids: string[],
    actor: string,
  ): Promise<TriageActionResponse> {
    return this.postJson(`/api/v1/change-points/${action}`, { ids, actor });
  }

  trend(seriesId: string): Promise<TrendResponse> {
    return this.getJson(`/api/v1/series/${seriesId}/trend`);
  }

  audit(): Promise<Record<string, number>> {
    return this.getJson("/api/v1/audit");
  }

  health(): Promise<{ status: string }> {
    return this.getJson("/api/v1/health");
  }
}
