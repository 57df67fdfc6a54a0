/**
 * Dashboard wiring: data-source picker, signal explorer, hyperparameter
 * panel, training monitor, and prediction review, all talking to the
 * /v1 API through ApiClient.  Logic lives in the viewmodel modules;
 * this file only binds it to the DOM.
 */

import { ApiClient, ApiError } from "./api/client.js";
import type {
  AnalysisDone,
  DatasetSummary,
  JobRecord,
  ModelEntry,
  SeriesResponse,
  WindowInfo,
} from "./api/types.js";
import {
  emptyStateMessage,
  fetchPlan,
  INITIAL_EXPLORER,
  pan,
  rowsInRange,
  zoom,
  type ExplorerState,
  type TimeRange,
} from "./viewmodel/explorer.js";
import {
  canSubmit,
  formFromPayload,
  FORM_FIELDS,
  persistForm,
  restoreForm,
  validateForm,
  type HyperparameterForm,
} from "./viewmodel/hyperparameters.js";
import { markerPositions, scaleFor, toPolyline } from "./viewmodel/plotting.js";
import { TrainingMonitor } from "./viewmodel/monitor.js";
import { debounce, flaggedCount, reviewRows, windowRange } from "./viewmodel/review.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(target: HTMLElement, err: unknown): void {
  target.textContent = err instanceof ApiError
    ? `API error ${err.status}: ${err.detail}`
    : `error: ${err instanceof Error ? err.message : String(err)}`;
  target.hidden = false;
}

function clearError(target: HTMLElement): void {
  target.hidden = true;
  target.textContent = "";
}

interface AppState {
  datasets: DatasetSummary[];
  selectedDataset: DatasetSummary | null;
  windows: WindowInfo[];
  explorer: ExplorerState;
  seriesBounds: TimeRange | null;
  seriesRows: number;
  lastSeries: SeriesResponse | null;
  lastFetchKey: string | null;
  activeJobId: string | null;
  jobInFlight: boolean;
  models: ModelEntry[];
  selectedModel: ModelEntry | null;
  analysis: AnalysisDone | null;
}

const state: AppState = {
  datasets: [],
  selectedDataset: null,
  windows: [],
  explorer: { ...INITIAL_EXPLORER },
  seriesBounds: null,
  seriesRows: 0,
  lastSeries: null,
  lastFetchKey: null,
  activeJobId: null,
  jobInFlight: false,
  models: [],
  selectedModel: null,
  analysis: null,
};

/* ---------------- data sources ---------------- */

async function refreshDatasets(): Promise<void> {
  const errBox = el<HTMLElement>("dataset-error");
  clearError(errBox);
  try {
    state.datasets = await api.listDatasets();
  } catch (err) {
    showError(errBox, err);
    return;
  }
  const select = el<HTMLSelectElement>("dataset-select");
  select.innerHTML = "";
  for (const ds of state.datasets) {
    const option = document.createElement("option");
    option.value = ds.dataset_id;
    option.textContent = `${ds.dataset_id} (${ds.kind}, ${ds.series_count} series)`;
    select.appendChild(option);
  }
  if (state.datasets.length > 0) {
    await selectDataset(state.datasets[state.datasets.length - 1]!.dataset_id);
    select.value = state.selectedDataset!.dataset_id;
  }
}

async function selectDataset(datasetId: string): Promise<void> {
  const errBox = el<HTMLElement>("dataset-error");
  clearError(errBox);
  try {
    state.selectedDataset = await api.getDataset(datasetId);
    state.windows = await api.windows(datasetId, "all");
  } catch (err) {
    showError(errBox, err);
    return;
  }
  const empty = emptyStateMessage(state.selectedDataset);
  const emptyBox = el<HTMLElement>("explorer-empty");
  emptyBox.hidden = empty === null;
  emptyBox.textContent = empty ?? "";

  const seriesSelect = el<HTMLSelectElement>("series-select");
  seriesSelect.innerHTML = "";
  for (const sid of state.selectedDataset.series_ids) {
    const option = document.createElement("option");
    option.value = sid;
    option.textContent = sid;
    seriesSelect.appendChild(option);
  }
  state.explorer = { ...state.explorer, seriesId: null, range: null };
  if (state.selectedDataset.series_ids.length > 0) {
    await selectSeries(state.selectedDataset.series_ids[0]!);
  }
}

/* ---------------- signal explorer ---------------- */

async function selectSeries(seriesId: string): Promise<void> {
  state.explorer = { ...state.explorer, seriesId, range: null };
  state.lastFetchKey = null;
  // Full fetch at decimate=1 first to learn the bounds and row count.
  const errBox = el<HTMLElement>("explorer-error");
  clearError(errBox);
  try {
    const probe = await api.series(seriesId, { decimate: 1000000 });
    state.seriesRows = probe.total_rows;
    const first = probe.points[0];
    const last = probe.points[probe.points.length - 1];
    state.seriesBounds = first && last ? { from: first[0], to: last[0] } : null;
  } catch (err) {
    showError(errBox, err);
    return;
  }
  await refreshPlot();
}

async function refreshPlot(): Promise<void> {
  const errBox = el<HTMLElement>("explorer-error");
  const canvas = el<HTMLCanvasElement>("explorer-canvas");
  state.explorer = { ...state.explorer, viewportWidth: canvas.width };
  const visibleRows = state.seriesBounds
    ? rowsInRange(
        state.seriesRows,
        state.seriesBounds.from,
        state.lastSeries !== null
          ? Math.round(state.lastSeries.dt * 1e9)
          : Math.round(((state.seriesBounds.to - state.seriesBounds.from) / Math.max(1, state.seriesRows - 1))),
        state.explorer.range,
      )
    : state.seriesRows;
  const plan = fetchPlan(state.explorer, visibleRows);
  if (plan === null) return;
  if (plan.key === state.lastFetchKey) return;
  state.lastFetchKey = plan.key;
  clearError(errBox);
  try {
    state.lastSeries = await api.series(plan.seriesId, plan.query);
  } catch (err) {
    state.lastFetchKey = null;
    if (err instanceof ApiError && err.status === 416) {
      errBox.textContent = "selected range contains no samples";
      errBox.hidden = false;
      return;
    }
    showError(errBox, err);
    return;
  }
  drawSeries(canvas, state.lastSeries);
}

function drawSeries(canvas: HTMLCanvasElement, series: SeriesResponse): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  const box = { width: canvas.width, height: canvas.height };
  ctx.clearRect(0, 0, box.width, box.height);
  const scale = scaleFor(series.points, box);
  ctx.strokeStyle = "#2563eb";
  ctx.lineWidth = 1;
  ctx.beginPath();
  const line = toPolyline(series.points, scale, box);
  line.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();

  const eventTimes = state.windows
    .filter((w) => w.contains_quench && w.t_event_offset !== null)
    .filter((w) => series.series_id.endsWith(`:${w.magnet_id}`))
    .map((w) => w.t0 + Math.round(w.t_event_offset! * 1e9));
  ctx.strokeStyle = "#dc2626";
  for (const x of markerPositions(eventTimes, scale, box)) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, box.height);
    ctx.stroke();
  }
  el<HTMLElement>("explorer-status").textContent =
    `${series.returned} of ${series.total_rows} rows plotted`;
}

function currentRange(): TimeRange | null {
  return state.explorer.range ?? state.seriesBounds;
}

function applyRange(range: TimeRange): void {
  state.explorer = { ...state.explorer, range };
  void refreshPlot();
}

export function jumpToRange(range: TimeRange): void {
  applyRange(range);
}

/* ---------------- hyperparameter panel ---------------- */

function readForm(): HyperparameterForm {
  const form = {} as HyperparameterForm;
  for (const field of FORM_FIELDS) {
    form[field] = el<HTMLInputElement>(`hp-${field}`).value;
  }
  return form;
}

function renderValidation(): void {
  const form = readForm();
  const { errors } = validateForm(form);
  for (const field of FORM_FIELDS) {
    const message = el<HTMLElement>(`hp-${field}-error`);
    message.textContent = errors[field] ?? "";
  }
  el<HTMLButtonElement>("hp-submit").disabled =
    !canSubmit(form) || state.jobInFlight || state.selectedDataset === null;
}

async function submitJob(): Promise<void> {
  const errBox = el<HTMLElement>("job-error");
  clearError(errBox);
  const form = readForm();
  const { payload } = validateForm(form);
  if (payload === null || state.selectedDataset === null) return;
  persistForm(localStorage, form);
  state.jobInFlight = true;
  renderValidation();
  let job: JobRecord;
  try {
    job = await api.submitJob(state.selectedDataset.dataset_id, payload);
  } catch (err) {
    state.jobInFlight = false;
    renderValidation();
    showError(errBox, err);
    return;
  }
  state.activeJobId = job.job_id;
  void watchJob(job.job_id);
}

/* ---------------- training monitor ---------------- */

async function watchJob(jobId: string): Promise<void> {
  const monitor = new TrainingMonitor(() => api.getJob(jobId));
  el<HTMLElement>("monitor-status").textContent = `polling ${jobId}`;
  const canvas = el<HTMLCanvasElement>("monitor-canvas");
  for (;;) {
    const view = await monitor.tick();
    drawLossCurve(canvas, view.losses);
    const badge = view.stale ? " (stale, retrying)" : "";
    let label = `${jobId}: ${view.status}${badge}`;
    if (view.finalLoss !== null) label += `, loss ${view.finalLoss.toExponential(3)}`;
    if (view.divergedEpoch !== null) label += `, diverged at epoch ${view.divergedEpoch}`;
    el<HTMLElement>("monitor-status").textContent = label;
    if (view.stopped) break;
    await new Promise((resolve) => setTimeout(resolve, view.nextPollMs));
  }
  state.jobInFlight = false;
  renderValidation();
  await refreshModels();
}

function drawLossCurve(canvas: HTMLCanvasElement, losses: number[]): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (losses.length === 0) return;
  const maxLoss = Math.max(...losses);
  const minLoss = Math.min(...losses);
  const span = maxLoss - minLoss || 1;
  ctx.strokeStyle = "#16a34a";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  losses.forEach((loss, i) => {
    const x = (i / Math.max(1, losses.length - 1)) * canvas.width;
    const y = canvas.height - ((loss - minLoss) / span) * canvas.height;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

/* ---------------- prediction review ---------------- */

async function refreshModels(): Promise<void> {
  try {
    state.models = await api.listModels();
  } catch {
    return;
  }
  const select = el<HTMLSelectElement>("model-select");
  select.innerHTML = "";
  for (const model of state.models) {
    const option = document.createElement("option");
    option.value = model.model_id;
    option.textContent = `${model.model_id} (threshold ${model.default_threshold.toExponential(2)})`;
    select.appendChild(option);
  }
  if (state.models.length > 0) {
    selectModel(state.models[state.models.length - 1]!.model_id);
    select.value = state.selectedModel!.model_id;
  }
}

function selectModel(modelId: string): void {
  state.selectedModel = state.models.find((m) => m.model_id === modelId) ?? null;
  if (state.selectedModel === null) return;
  const slider = el<HTMLInputElement>("threshold-slider");
  const def = state.selectedModel.default_threshold;
  slider.min = "0";
  slider.max = String(def * 5);
  slider.step = String(def / 20 || 0.001);
  slider.value = String(def);
  el<HTMLElement>("threshold-value").textContent = def.toExponential(3);
  void runAnalysis(def);
}

async function runAnalysis(threshold: number): Promise<void> {
  const errBox = el<HTMLElement>("review-error");
  clearError(errBox);
  if (state.selectedModel === null || state.selectedDataset === null) return;
  let response;
  try {
    response = await api.analyze(state.selectedModel.model_id, {
      dataset_id: state.selectedDataset.dataset_id,
      selection: { kind: "all" },
      threshold,
    });
  } catch (err) {
    showError(errBox, err);
    return;
  }
  if (response.status === "queued") {
    errBox.textContent = `large selection queued as ${response.analysis_id}; poll ${response.poll}`;
    errBox.hidden = false;
    return;
  }
  state.analysis = response;
  renderReview();
}

const debouncedAnalysis = debounce((threshold: number) => void runAnalysis(threshold), 250);

function renderReview(): void {
  if (state.analysis === null) return;
  el<HTMLElement>("review-summary").textContent =
    `${flaggedCount(state.analysis.reports)} of ${state.analysis.reports.length} windows ` +
    `flagged at threshold ${state.analysis.threshold.toExponential(3)}`;
  const tbody = el<HTMLTableSectionElement>("review-rows");
  tbody.innerHTML = "";
  for (const row of reviewRows(state.analysis)) {
    const tr = document.createElement("tr");
    tr.className = row.flagged ? "flagged" : "";
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = row.windowId;
    link.addEventListener("click", (e) => {
      e.preventDefault();
      const report = state.analysis?.reports.find((r) => r.window_id === row.windowId);
      if (report === undefined) return;
      const range = windowRange(report, state.windows);
      if (range !== null) jumpToRange(range);
    });
    const idCell = document.createElement("td");
    idCell.appendChild(link);
    const peakCell = document.createElement("td");
    peakCell.textContent = row.peakResidual.toExponential(3);
    const flagCell = document.createElement("td");
    flagCell.textContent = row.flagged ? "flagged" : "";
    tr.append(idCell, peakCell, flagCell);
    tbody.appendChild(tr);
  }
}

/* ---------------- bootstrap ---------------- */

function bind(): void {
  el<HTMLSelectElement>("dataset-select").addEventListener("change", (e) => {
    void selectDataset((e.target as HTMLSelectElement).value);
  });
  el<HTMLButtonElement>("dataset-refresh").addEventListener("click", () => {
    void refreshDatasets();
  });
  el<HTMLButtonElement>("dataset-demo").addEventListener("click", async () => {
    const errBox = el<HTMLElement>("dataset-error");
    clearError(errBox);
    try {
      await api.createDataset({
        kind: "synthetic", tier: "small", seed: 0,
        scale: 1e-3, series_count: 2, quench_rate: 1.0,
      });
    } catch (err) {
      showError(errBox, err);
      return;
    }
    await refreshDatasets();
  });
  el<HTMLSelectElement>("series-select").addEventListener("change", (e) => {
    void selectSeries((e.target as HTMLSelectElement).value);
  });
  el<HTMLButtonElement>("zoom-in").addEventListener("click", () => {
    const range = currentRange();
    if (range && state.seriesBounds) applyRange(zoom(range, state.seriesBounds, 2));
  });
  el<HTMLButtonElement>("zoom-out").addEventListener("click", () => {
    const range = currentRange();
    if (range && state.seriesBounds) applyRange(zoom(range, state.seriesBounds, 0.5));
  });
  el<HTMLButtonElement>("pan-left").addEventListener("click", () => {
    const range = currentRange();
    if (range && state.seriesBounds) applyRange(pan(range, state.seriesBounds, -0.25));
  });
  el<HTMLButtonElement>("pan-right").addEventListener("click", () => {
    const range = currentRange();
    if (range && state.seriesBounds) applyRange(pan(range, state.seriesBounds, 0.25));
  });
  el<HTMLButtonElement>("zoom-reset").addEventListener("click", () => {
    state.explorer = { ...state.explorer, range: null };
    void refreshPlot();
  });

  const restored = restoreForm(localStorage);
  for (const field of FORM_FIELDS) {
    const input = el<HTMLInputElement>(`hp-${field}`);
    input.value = restored[field];
    input.addEventListener("input", renderValidation);
  }
  el<HTMLButtonElement>("hp-submit").addEventListener("click", () => void submitJob());

  el<HTMLSelectElement>("model-select").addEventListener("change", (e) => {
    selectModel((e.target as HTMLSelectElement).value);
  });
  el<HTMLInputElement>("threshold-slider").addEventListener("input", (e) => {
    const threshold = Number((e.target as HTMLInputElement).value);
    el<HTMLElement>("threshold-value").textContent = threshold.toExponential(3);
    debouncedAnalysis(threshold);
  });

  renderValidation();
  void refreshDatasets().then(refreshModels);
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  bind();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bind);
}

export { formFromPayload };
