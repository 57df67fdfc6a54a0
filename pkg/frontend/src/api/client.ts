/**
 * Thin fetch wrapper around the /v1 API.
 *
 * Every non-2xx response becomes an ApiError carrying the HTTP status and
 * the server's detail message, so views can surface failures verbatim
 * instead of swallowing them.
 */

import type {
  AnalysisRecord,
  AnalysisResponse,
  AnalysisSelection,
  DatasetCreated,
  DatasetSummary,
  HyperparametersPayload,
  JobRecord,
  MetaInfo,
  ModelEntry,
  SeriesResponse,
  SyntheticDatasetRequest,
  WindowInfo,
  WindowKind,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

export interface SeriesQuery {
  from?: number;
  to?: number;
  decimate?: number;
}

export interface AnalyzeBody {
  dataset_id: string;
  selection?: AnalysisSelection;
  threshold?: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function readDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return response.statusText || "request failed";
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, await readDetail(response));
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown, headers: Record<string, string> = {}): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json", ...headers },
      body: JSON.stringify(body),
    });
  }

  meta(): Promise<MetaInfo> {
    return this.request("/v1/meta");
  }

  createDataset(request: SyntheticDatasetRequest): Promise<DatasetCreated> {
    return this.post("/v1/datasets", request);
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return this.request("/v1/datasets");
  }

  getDataset(datasetId: string): Promise<DatasetSummary> {
    return this.request(`/v1/datasets/${encodeURIComponent(datasetId)}`);
  }

  windows(datasetId: string, kind: WindowKind = "all"): Promise<WindowInfo[]> {
    const id = encodeURIComponent(datasetId);
    return this.request(`/v1/datasets/${id}/windows?kind=${kind}`);
  }

  series(seriesId: string, query: SeriesQuery = {}): Promise<SeriesResponse> {
    const params = new URLSearchParams();
    if (query.from !== undefined) params.set("from", String(query.from));
    if (query.to !== undefined) params.set("to", String(query.to));
    if (query.decimate !== undefined) params.set("decimate", String(query.decimate));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request(`/v1/series/${encodeURIComponent(seriesId)}${suffix}`);
  }

  submitJob(
    datasetId: string,
    hyperparameters: HyperparametersPayload,
    token?: string,
  ): Promise<JobRecord> {
    const headers: Record<string, string> = token ? { "Idempotency-Token": token } : {};
    return this.post("/v1/jobs", { dataset_id: datasetId, hyperparameters }, headers);
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.request(`/v1/jobs/${encodeURIComponent(jobId)}`);
  }

  listJobs(): Promise<JobRecord[]> {
    return this.request("/v1/jobs");
  }

  listModels(): Promise<ModelEntry[]> {
    return this.request("/v1/models");
  }

  getModel(modelId: string): Promise<ModelEntry> {
    return this.request(`/v1/models/${encodeURIComponent(modelId)}`);
  }

  analyze(modelId: string, body: AnalyzeBody): Promise<AnalysisResponse> {
    return this.post(`/v1/models/${encodeURIComponent(modelId)}/analyze`, body);
  }

  getAnalysis(analysisId: string): Promise<AnalysisRecord> {
    return this.request(`/v1/analyses/${encodeURIComponent(analysisId)}`);
  }
}
