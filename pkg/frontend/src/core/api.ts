export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`HTTP ${status}`);
  }
}

/** Thin JSON client; the base URL is empty for same-origin deployments. */
export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchImpl: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  async getJson(path: string): Promise<unknown> {
    const response = await this.fetchImpl(this.baseUrl + path);
    const body = await response.json();
    if (!response.ok) throw new ApiError(response.status, body);
    return body;
  }

  async georef(text: string): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}/georef`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
    const body = await response.json();
    if (!response.ok) throw new ApiError(response.status, body);
    return body;
  }
}
