/**
 * Typed client for the backend HTTP API.
 *
 * Every request is appended to a transcript log so tests (and the
 * blindness contract) can audit exactly which endpoints were touched
 * and in what order.
 */

import {
  ApiError,
  type BriefPayload,
  type BriefResponse,
  type BudgetForm,
  type ClustersPayload,
  type CueForm,
  type GapRegion,
  type LayoutPoint,
  type PackPayload,
  type ReviewPacketOpen,
  type ReviewSubmission,
  type SealedSection,
  type SnapshotPayload,
  type SnapshotSummary,
  type StoredReview,
  type TargetSpec,
} from './types.js';

export interface RequestLogEntry {
  method: string;
  path: string;
  status: number;
}

export class ApiClient {
  readonly log: RequestLogEntry[] = [];

  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    this.log.push({ method, path, status: response.status });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async listSnapshots(): Promise<SnapshotSummary[]> {
    const payload = await this.request<{ snapshots: SnapshotSummary[] }>('GET', '/snapshots');
    return payload.snapshots;
  }

  getSnapshot(id: string): Promise<SnapshotPayload> {
    return this.request('GET', `/snapshots/${id}`);
  }

  async topGaps(id: string, limit = 10): Promise<GapRegion[]> {
    const payload = await this.request<{ gaps: GapRegion[] }>(
      'GET',
      `/snapshots/${id}/gaps/top?limit=${limit}`,
    );
    return payload.gaps;
  }

  getClusters(id: string): Promise<ClustersPayload> {
    return this.request('GET', `/snapshots/${id}/clusters`);
  }

  async getLayout(id: string): Promise<LayoutPoint[]> {
    const payload = await this.request<{ points: LayoutPoint[] }>(
      'GET',
      `/snapshots/${id}/layout`,
    );
    return payload.points;
  }

  buildPack(
    id: string,
    target: TargetSpec,
    budget: BudgetForm,
    cue: CueForm | null = null,
    queries: string[] = [],
  ): Promise<PackPayload> {
    return this.request('POST', `/snapshots/${id}/packs`, { target, budget, cue, queries });
  }

  createBrief(
    id: string,
    target: TargetSpec,
    budget: BudgetForm,
    cue: CueForm | null = null,
    queries: string[] = [],
  ): Promise<BriefResponse> {
    return this.request('POST', `/snapshots/${id}/briefs`, { target, budget, cue, queries });
  }

  getBrief(briefId: string): Promise<BriefPayload & { snapshot_id: string }> {
    return this.request('GET', `/briefs/${briefId}`);
  }

  async listPackets(briefId: string): Promise<ReviewPacketOpen[]> {
    const payload = await this.request<{ packets: ReviewPacketOpen[] }>(
      'GET',
      `/briefs/${briefId}/packets`,
    );
    return payload.packets;
  }

  async submitReview(briefId: string, review: ReviewSubmission): Promise<string> {
    const payload = await this.request<{ review_id: string }>(
      'POST',
      `/briefs/${briefId}/reviews`,
      review,
    );
    return payload.review_id;
  }

  async listReviews(briefId: string): Promise<StoredReview[]> {
    const payload = await this.request<{ reviews: StoredReview[] }>(
      'GET',
      `/briefs/${briefId}/reviews`,
    );
    return payload.reviews;
  }

  fetchSealed(briefId: string, index: number, reviewId: string): Promise<SealedSection> {
    return this.request(
      'GET',
      `/briefs/${briefId}/packets/${index}/sealed?review_id=${encodeURIComponent(reviewId)}`,
    );
  }

  getRunMetrics(runId: string): Promise<Record<string, unknown>> {
    return this.request('GET', `/runs/${runId}/metrics`);
  }
}
