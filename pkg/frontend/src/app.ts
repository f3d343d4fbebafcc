/** DOM wiring: file selection, the two service calls, result panels.
 *
 * Repeated clicks cancel the in-flight request and start a fresh one, so at
 * most one request per action is ever outstanding.
 */

import { ApiClient } from "./api.js";
import { apiBase } from "./config.js";
import { formatDiagnosis, formatError } from "./format.js";
import { parseObj } from "./objParser.js";
import { PointCloudViewer } from "./viewer.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const client = new ApiClient(apiBase());
const fileInput = byId<HTMLInputElement>("file-input");
const diagnoseButton = byId<HTMLButtonElement>("diagnose-button");
const reconstructButton = byId<HTMLButtonElement>("reconstruct-button");
const resultPanel = byId<HTMLDivElement>("result-panel");
const errorBanner = byId<HTMLDivElement>("error-banner");
const pointCount = byId<HTMLSpanElement>("point-count");
const preview = byId<HTMLImageElement>("preview");
const viewer = new PointCloudViewer(byId<HTMLCanvasElement>("viewer-canvas"));

let diagnoseAbort: AbortController | null = null;
let reconstructAbort: AbortController | null = null;

function selectedFile(): File | null {
  return fileInput.files && fileInput.files[0] ? fileInput.files[0] : null;
}

function showError(err: unknown): void {
  errorBanner.textContent = formatError(err);
  errorBanner.hidden = false;
}

function clearError(): void {
  errorBanner.hidden = true;
  errorBanner.textContent = "";
}

fileInput.addEventListener("change", () => {
  clearError();
  const file = selectedFile();
  if (file) {
    preview.src = URL.createObjectURL(file);
    preview.hidden = false;
  }
});

diagnoseButton.addEventListener("click", async () => {
  const file = selectedFile();
  if (!file) {
    showError(new Error("choose an image first"));
    return;
  }
  clearError();
  diagnoseAbort?.abort();
  diagnoseAbort = new AbortController();
  resultPanel.textContent = "diagnosing…";
  resultPanel.className = "panel pending";
  try {
    const result = await client.diagnose(file, diagnoseAbort.signal);
    const view = formatDiagnosis(result);
    resultPanel.textContent = "";
    const headline = document.createElement("div");
    headline.className = "headline";
    headline.textContent = view.headline;
    const version = document.createElement("div");
    version.className = "version";
    version.textContent = `model ${view.modelVersion}`;
    resultPanel.append(headline, version);
    resultPanel.className = view.alert ? "panel alert" : "panel clear";
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    resultPanel.textContent = "";
    resultPanel.className = "panel";
    showError(err);
  }
});

reconstructButton.addEventListener("click", async () => {
  const file = selectedFile();
  if (!file) {
    showError(new Error("choose an image first"));
    return;
  }
  clearError();
  reconstructAbort?.abort();
  reconstructAbort = new AbortController();
  pointCount.textContent = "reconstructing…";
  try {
    const objText = await client.reconstruct(file, reconstructAbort.signal);
    const cloud = parseObj(objText);
    viewer.setCloud(cloud);
    pointCount.textContent = `${cloud.count} points`;
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    pointCount.textContent = "";
    showError(err);
  }
});
