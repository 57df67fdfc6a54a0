/**
 * Hyperparameter form model.
 *
 * Validation mirrors the server-side rules so the submit button can only
 * fire requests the service would accept: positive integers for the
 * counts, non-negative epochs, a positive learning rate, any integer
 * seed.  Parsing is exact — a field either converts to the precise
 * number the user typed or fails validation; nothing is silently
 * rounded or clamped.
 */

import type { HyperparametersPayload } from "../api/types.js";

export const FORM_FIELDS = [
  "cell_count",
  "layer_count",
  "input_window",
  "learning_rate",
  "epochs",
  "batch_size",
  "seed",
] as const;

export type FormField = (typeof FORM_FIELDS)[number];

export type HyperparameterForm = Record<FormField, string>;

export const DEFAULT_FORM: HyperparameterForm = {
  cell_count: "8",
  layer_count: "1",
  input_window: "8",
  learning_rate: "0.1",
  epochs: "50",
  batch_size: "4",
  seed: "0",
};

export interface ValidationResult {
  errors: Partial<Record<FormField, string>>;
  payload: HyperparametersPayload | null;
}

const INTEGER_RE = /^[+-]?\d+$/;

function parseExactNumber(raw: string): number | null {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

function parseExactInteger(raw: string): number | null {
  const trimmed = raw.trim();
  if (!INTEGER_RE.test(trimmed)) return null;
  const value = Number(trimmed);
  return Number.isSafeInteger(value) ? value : null;
}

export function validateForm(form: HyperparameterForm): ValidationResult {
  const errors: Partial<Record<FormField, string>> = {};
  const values: Partial<Record<FormField, number>> = {};

  for (const field of ["cell_count", "layer_count", "input_window", "batch_size"] as const) {
    const value = parseExactInteger(form[field]);
    if (value === null || value <= 0) {
      errors[field] = "must be a positive integer";
    } else {
      values[field] = value;
    }
  }

  const epochs = parseExactInteger(form.epochs);
  if (epochs === null || epochs < 0) {
    errors.epochs = "must be a non-negative integer";
  } else {
    values.epochs = epochs;
  }

  const learningRate = parseExactNumber(form.learning_rate);
  if (learningRate === null || !(learningRate > 0)) {
    errors.learning_rate = "must be a number greater than 0";
  } else {
    values.learning_rate = learningRate;
  }

  const seed = parseExactInteger(form.seed);
  if (seed === null) {
    errors.seed = "must be an integer";
  } else {
    values.seed = seed;
  }

  if (Object.keys(errors).length > 0) {
    return { errors, payload: null };
  }
  return {
    errors: {},
    payload: {
      cell_count: values.cell_count!,
      layer_count: values.layer_count!,
      input_window: values.input_window!,
      learning_rate: values.learning_rate!,
      epochs: values.epochs!,
      batch_size: values.batch_size!,
      seed: values.seed!,
    },
  };
}

export function canSubmit(form: HyperparameterForm): boolean {
  return validateForm(form).payload !== null;
}

/** Rebuild form text from a payload, e.g. to restore the last-used values. */
export function formFromPayload(payload: HyperparametersPayload): HyperparameterForm {
  const form = { ...DEFAULT_FORM };
  for (const field of FORM_FIELDS) {
    const value = payload[field];
    if (value !== undefined) form[field] = String(value);
  }
  return form;
}

export interface FormStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORAGE_KEY = "quenchwatch.hyperparameters";

export function persistForm(storage: FormStorage, form: HyperparameterForm): void {
  storage.setItem(STORAGE_KEY, JSON.stringify(form));
}

export function restoreForm(storage: FormStorage): HyperparameterForm {
  const raw = storage.getItem(STORAGE_KEY);
  if (raw === null) return { ...DEFAULT_FORM };
  try {
    const parsed = JSON.parse(raw) as Partial<HyperparameterForm>;
    const form = { ...DEFAULT_FORM };
    for (const field of FORM_FIELDS) {
      const value = parsed[field];
      if (typeof value === "string") form[field] = value;
    }
    return form;
  } catch {
    return { ...DEFAULT_FORM };
  }
}
