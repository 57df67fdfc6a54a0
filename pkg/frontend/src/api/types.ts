/**
 * Typed mirrors of the /v1 JSON payloads.
 *
 * Field names and shapes follow the service responses exactly; nothing
 * here is invented on the client side.
 */

export interface MetaInfo {
  name: string;
  version: string;
  kernel: "compiled" | "python";
  analyzers: string[];
}

export interface WindowParams {
  pre_s: number;
  post_s: number;
  normal_window_s: number;
  guard_s: number;
  stride_s: number;
}

export interface DatasetSummary {
  dataset_id: string;
  kind: "synthetic" | "manifest";
  tier: string | null;
  seed: number | null;
  series_count: number;
  event_count: number;
  byte_total: number;
  window_params: WindowParams;
  window_counts: { normal: number; quench: number };
  series_ids: string[];
}

export interface DatasetCreated extends DatasetSummary {
  created: boolean;
}

export interface SyntheticDatasetRequest {
  kind: "synthetic";
  tier: "small" | "medium" | "large";
  seed?: number;
  scale?: number;
  series_count?: number | null;
  quench_rate?: number;
  window?: Partial<WindowParams>;
}

export type WindowKind = "all" | "normal" | "quench";

export interface WindowInfo {
  window_id: string;
  magnet_id: string;
  contains_quench: boolean;
  t_event_offset: number | null;
  clamped: boolean;
  sample_count: number;
  t0: number;
  dt: number;
}

/** One [timestamp_ns, value] pair as served by /v1/series. */
export type SeriesPoint = [number, number];

export interface SeriesResponse {
  series_id: string;
  dataset_id: string;
  magnet_id: string;
  dt: number;
  total_rows: number;
  returned: number;
  points: SeriesPoint[];
}

export interface HyperparametersPayload {
  cell_count: number;
  layer_count?: number;
  input_window?: number;
  learning_rate?: number;
  epochs?: number;
  batch_size?: number;
  seed?: number;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface JobRecord {
  job_id: string;
  dataset_id: string;
  hyperparameters: Required<HyperparametersPayload>;
  window_kind: WindowKind;
  status: JobStatus;
  trace: number[];
  created_at: string;
  model_id: string | null;
  default_threshold: number | null;
  error: string | null;
}

export interface ModelEntry {
  model_id: string;
  snapshot_ref: string;
  source_job_id: string;
  training_stats: { mean: number; std: number; degenerate: boolean };
  default_threshold: number;
}

export interface WindowReport {
  window_id: string;
  residual_series: number[];
  peak_residual: number;
  threshold: number;
  flagged: boolean;
}

export interface AnalysisSelection {
  kind?: WindowKind;
  window_ids?: string[];
  limit?: number;
}

export interface AnalysisDone {
  status: "done";
  model_id: string;
  dataset_id: string;
  threshold: number;
  reports: WindowReport[];
}

export interface AnalysisQueued {
  status: "queued";
  analysis_id: string;
  window_count: number;
  poll: string;
}

export type AnalysisResponse = AnalysisDone | AnalysisQueued;

export interface AnalysisRecord {
  status: JobStatus;
  model_id?: string;
  dataset_id?: string;
  threshold?: number;
  reports?: WindowReport[];
  error?: string | null;
}
