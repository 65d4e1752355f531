/**
 * Blind-first review session.
 *
 * The sealed section (agent scores and other provenance) is fetchable
 * only after the reviewer submits scores; the session object refuses to
 * request it earlier, making blindness a transport property that the
 * request log can audit.
 */

import { type ApiClient } from './api.js';
import { type ReviewPacketOpen, type SealedSection } from './types.js';

export const REVIEW_CRITERIA = [
  'novelty',
  'plausibility',
  'evaluability',
  'feasibility',
  'importance',
  'clarity',
] as const;

export type Criterion = (typeof REVIEW_CRITERIA)[number];

export interface ReviewFormState {
  packetId: string;
  hypothesisIndex: number;
  scores: Partial<Record<Criterion, number>>;
  notes: Partial<Record<Criterion, string>>;
  rationale: string;
  confidence: number | null;
  flags: { insufficientContext: boolean; needsExpertFollowUp: boolean };
  submitted: boolean;
  reviewId: string | null;
  error: string | null;
}

export function emptyReviewForm(packet: ReviewPacketOpen): ReviewFormState {
  return {
    packetId: packet.packet_id,
    hypothesisIndex: packet.hypothesis_index,
    scores: {},
    notes: {},
    rationale: '',
    confidence: null,
    flags: { insufficientContext: false, needsExpertFollowUp: false },
    submitted: false,
    reviewId: null,
    error: null,
  };
}

export function setScore(form: ReviewFormState, criterion: Criterion, value: number): void {
  if (!Number.isInteger(value) || value < 1 || value > 5) {
    throw new Error(`${criterion} must be an integer in [1, 5]`);
  }
  form.scores[criterion] = value;
}

export function formComplete(form: ReviewFormState): boolean {
  return REVIEW_CRITERIA.every((criterion) => form.scores[criterion] !== undefined);
}

export class BlindReviewSession {
  private packets: ReviewPacketOpen[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly briefId: string,
    private readonly reviewer: string,
  ) {}

  /** Loads open sections only; sealed data stays on the server. */
  async loadPackets(): Promise<ReviewPacketOpen[]> {
    this.packets = await this.api.listPackets(this.briefId);
    return this.packets;
  }

  startReview(index: number): ReviewFormState {
    const packet = this.packets.find((p) => p.hypothesis_index === index);
    if (!packet) {
      throw new Error(`no packet for hypothesis ${index}`);
    }
    return emptyReviewForm(packet);
  }

  async submit(form: ReviewFormState): Promise<string> {
    if (form.submitted) {
      throw new Error('review already submitted');
    }
    if (!formComplete(form)) {
      throw new Error('all six criteria must be scored before submission');
    }
    try {
      const reviewId = await this.api.submitReview(this.briefId, {
        reviewer: this.reviewer,
        hypothesis_index: form.hypothesisIndex,
        scores: { ...form.scores } as Record<string, number>,
        comments: form.rationale,
      });
      form.submitted = true;
      form.reviewId = reviewId;
      form.error = null;
      return reviewId;
    } catch (err) {
      // rejection preserves the form for correction
      form.error = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }

  /** Only legal after submission; the reveal request carries the review id. */
  async reveal(form: ReviewFormState): Promise<SealedSection> {
    if (!form.submitted || form.reviewId === null) {
      throw new Error('sealed section is unavailable before submission');
    }
    return this.api.fetchSealed(this.briefId, form.hypothesisIndex, form.reviewId);
  }
}

/**
 * Side-by-side comparison after reveal. Both columns are served values;
 * nothing is aggregated client-side.
 */
export function comparisonRows(
  form: ReviewFormState,
  sealed: SealedSection,
): { criterion: Criterion; reviewer: number | null; agent: number }[] {
  return REVIEW_CRITERIA.map((criterion) => ({
    criterion,
    reviewer: form.scores[criterion] ?? null,
    agent: sealed.sealed_section.idea_scores[criterion],
  }));
}
