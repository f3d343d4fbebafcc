/** Base URL of the diagnosis service. Same-origin by default; override at
 * build time by editing this constant or injecting `window.CELLDX_API_BASE`
 * before the app module loads. */
export function apiBase(): string {
  const injected = (globalThis as { CELLDX_API_BASE?: string }).CELLDX_API_BASE;
  return injected ?? "";
}
