/** Service client with a single in-flight stylize request.
 *
 * Rapid sends while one request is in flight coalesce: only the latest
 * queued body is sent afterwards, and every superseded caller resolves with
 * that newest result.
 */

import type { ApiError, PaletteResponse, StyleInfo, StylizeRequest, StylizeResponse } from "./types.js";

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiHttpError extends Error {
  constructor(readonly status: number, readonly body: ApiError) {
    super(`${status}: ${body.code} ${body.message}`);
  }
}

export class ApiClient {
  private inFlight = false;
  private queued: {
    body: StylizeRequest;
    resolvers: { resolve: (r: StylizeResponse) => void; reject: (e: unknown) => void }[];
  } | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init)
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiHttpError(resp.status, payload as ApiError);
    }
    return payload as T;
  }

  async styles(): Promise<StyleInfo[]> {
    const resp = await this.fetchImpl(this.baseUrl + "/api/styles");
    if (!resp.ok) {
      throw new ApiHttpError(resp.status, (await resp.json()) as ApiError);
    }
    return (await resp.json()) as StyleInfo[];
  }

  async palette(imageB64: string, k = 8, maskB64: string | null = null): Promise<PaletteResponse> {
    const body: Record<string, unknown> = { image: imageB64, k };
    if (maskB64) body.mask = maskB64;
    return this.post<PaletteResponse>("/api/palette", body);
  }

  /** Coalescing stylize; see module docstring. */
  stylize(body: StylizeRequest): Promise<StylizeResponse> {
    return new Promise((resolve, reject) => {
      if (this.inFlight) {
        if (this.queued) {
          this.queued.body = body;
          this.queued.resolvers.push({ resolve, reject });
        } else {
          this.queued = { body, resolvers: [{ resolve, reject }] };
        }
        return;
      }
      void this.send(body, [{ resolve, reject }]);
    });
  }

  private async send(
    body: StylizeRequest,
    resolvers: { resolve: (r: StylizeResponse) => void; reject: (e: unknown) => void }[]
  ): Promise<void> {
    this.inFlight = true;
    try {
      const result = await this.post<StylizeResponse>("/api/stylize", body);
      for (const r of resolvers) r.resolve(result);
    } catch (err) {
      for (const r of resolvers) r.reject(err);
    } finally {
      this.inFlight = false;
      if (this.queued) {
        const next = this.queued;
        this.queued = null;
        void this.send(next.body, next.resolvers);
      }
    }
  }
}
