/**
 * Service client
 *
 * Thin typed wrapper over fetch. The transport is injectable so tests can
 * point it at a mocked service. `explain` keeps at most one request in
 * flight: starting a new one aborts the previous, so a slow response can
 * never overwrite a newer one.
 */

import type {
  BoundaryJobStatus,
  BoundaryPoints,
  BoundaryRequest,
  ConstraintPayload,
  DatasetPoints,
  DatasetSummary,
  ExplainRecord,
  ExplainRequest,
  GeneratorSpec,
  ModelInfo,
} from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Largest boundary sample the scatter ever asks the service for. */
export const BOUNDARY_SAMPLE_CAP = 5000;

export class ServiceHttpError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === 'string' ? detail : JSON.stringify(detail));
    this.name = 'ServiceHttpError';
    this.status = status;
    this.detail = detail;
  }
}

export function isAbortError(err: unknown): boolean {
  return err instanceof Error && err.name === 'AbortError';
}

export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;
  private inflightExplain: AbortController | null = null;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, '');
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const init: RequestInit = { method, signal };
    if (body !== undefined) {
      init.headers = { 'Content-Type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    if (response.status === 204) {
      return undefined as T;
    }
    const payload = await response.json();
    if (!response.ok) {
      throw new ServiceHttpError(response.status, payload?.detail ?? payload);
    }
    return payload as T;
  }

  createGeneratedDataset(generator: GeneratorSpec): Promise<DatasetSummary> {
    return this.request('POST', '/datasets', { generator });
  }

  createCsvDataset(csv: string, labelColumn = 'label'): Promise<DatasetSummary> {
    return this.request('POST', '/datasets', { csv, label_column: labelColumn });
  }

  datasetPoints(datasetId: string): Promise<DatasetPoints> {
    return this.request('GET', `/datasets/${datasetId}/points`);
  }

  trainModel(datasetId: string, family: string, hyperparameters?: Record<string, unknown>): Promise<ModelInfo> {
    return this.request('POST', '/models', {
      dataset_id: datasetId,
      family,
      ...(hyperparameters ? { hyperparameters } : {}),
    });
  }

  startBoundary(body: BoundaryRequest): Promise<{ id: string; status: string }> {
    return this.request('POST', '/boundary', body);
  }

  boundaryStatus(boundaryId: string): Promise<BoundaryJobStatus> {
    return this.request('GET', `/boundary/${boundaryId}/status`);
  }

  boundaryPoints(boundaryId: string, cap: number = BOUNDARY_SAMPLE_CAP): Promise<BoundaryPoints> {
    const clamped = Math.max(1, Math.min(cap, BOUNDARY_SAMPLE_CAP));
    return this.request('GET', `/boundary/${boundaryId}/points?cap=${clamped}`);
  }

  createConstraintPreset(constraints: ConstraintPayload): Promise<{ id: string; constraints: ConstraintPayload }> {
    return this.request('POST', '/constraints', constraints);
  }

  /**
   * Request an explanation, cancelling any explanation still in flight.
   * The superseded call rejects with an AbortError.
   */
  async explain(body: ExplainRequest): Promise<ExplainRecord> {
    this.inflightExplain?.abort();
    const controller = new AbortController();
    this.inflightExplain = controller;
    try {
      return await this.request<ExplainRecord>('POST', '/explain', body, controller.signal);
    } finally {
      if (this.inflightExplain === controller) {
        this.inflightExplain = null;
      }
    }
  }
}
