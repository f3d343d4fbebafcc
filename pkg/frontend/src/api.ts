/** Typed client for the two service endpoints the UI is allowed to call.
 *
 * All diagnostic content comes verbatim from the service; this module never
 * recomputes or reinterprets values, it only transports them.
 */

export interface DiagnosisResult {
  label: string;
  confidence: number;
  model_version: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Service-reported failure, carrying the machine-readable error code. */
export class ApiError extends Error {
  constructor(
    public readonly code: string,
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "unknown_error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; error?: string };
    if (body.code) code = body.code;
    if (body.error) message = body.error;
  } catch {
    // non-JSON error body: keep the generic code
  }
  return new ApiError(code, response.status, message);
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  async diagnose(file: Blob, signal?: AbortSignal): Promise<DiagnosisResult> {
    const response = await this.fetchImpl(`${this.base}/api/diagnose`, {
      method: "POST",
      body: file,
      signal,
    });
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as DiagnosisResult;
  }

  async reconstruct(file: Blob, signal?: AbortSignal): Promise<string> {
    const response = await this.fetchImpl(`${this.base}/api/reconstruct?format=obj`, {
      method: "POST",
      body: file,
      signal,
    });
    if (!response.ok) throw await errorFrom(response);
    return response.text();
  }
}
