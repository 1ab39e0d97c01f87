// Thin typed client for the session service; all numerics stay server-side.

import type {
  ComponentSeriesPayload,
  ComponentsPayload,
  Label,
  LabelResponse,
  ReconstructionPayload,
  SessionSummary,
} from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = '',
    private fetcher: FetchLike = (input, init) => fetch(input, init),
  ) {}

  url(path: string, stride?: number): string {
    const suffix = stride && stride > 1 ? `?stride=${stride}` : '';
    return `${this.base}${path}${suffix}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetcher(this.url(path));
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  session(): Promise<SessionSummary> {
    return this.getJson('/api/session');
  }

  components(): Promise<ComponentsPayload> {
    return this.getJson('/api/components');
  }

  async componentSeries(index: number, stride?: number): Promise<ComponentSeriesPayload> {
    const resp = await this.fetcher(this.url(`/api/components/${index}/series`, stride));
    if (!resp.ok) {
      throw new ApiError(resp.status, `component ${index} -> ${resp.status}`);
    }
    return (await resp.json()) as ComponentSeriesPayload;
  }

  reconstruction(): Promise<ReconstructionPayload> {
    return this.getJson('/api/reconstruction');
  }

  async setLabel(index: number, label: Label, version?: number): Promise<LabelResponse> {
    const body: Record<string, unknown> = { label };
    if (version !== undefined) {
      body.version = version;
    }
    const resp = await this.fetcher(this.url(`/api/components/${index}/label`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `label ${index} -> ${resp.status}`);
    }
    return (await resp.json()) as LabelResponse;
  }
}
