/** Presentation rules for diagnosis results and service errors. */

import { ApiError, DiagnosisResult } from "./api.js";

export interface DiagnosisView {
  /** e.g. "Parasitized — 97.0%" (confidence to one decimal place) */
  headline: string;
  /** parasitized results render in the alert style */
  alert: boolean;
  modelVersion: string;
}

export function formatDiagnosis(result: DiagnosisResult): DiagnosisView {
  const label = result.label.charAt(0).toUpperCase() + result.label.slice(1);
  const pct = (result.confidence * 100).toFixed(1);
  return {
    headline: `${label} — ${pct}%`,
    alert: result.label === "parasitized",
    modelVersion: result.model_version,
  };
}

const ERROR_TEXT: Record<string, string> = {
  bad_image: "that file is not a readable image",
  too_large: "image too large",
  model_not_loaded: "the service has no model loaded yet",
  bad_format: "the service rejected the requested format",
  reconstruction_failed: "3D reconstruction failed for this image",
};

/** Human text for an error banner; always includes the service's code. */
export function formatError(err: unknown): string {
  if (err instanceof ApiError) {
    const text = ERROR_TEXT[err.code] ?? err.message;
    return `${text} (${err.code})`;
  }
  if (err instanceof Error && err.name === "AbortError") {
    return "request cancelled";
  }
  return `could not reach the service (network_error)`;
}
