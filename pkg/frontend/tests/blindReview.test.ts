import { beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import {
  BlindReviewSession,
  comparisonRows,
  formComplete,
  REVIEW_CRITERIA,
  setScore,
} from '../src/blindReview.js';
import { readBackendInfo } from './setup/info.js';

const { baseUrl, snapshotId } = readBackendInfo();

let briefId: string;

beforeAll(async () => {
  const api = new ApiClient(baseUrl);
  const gaps = await api.topGaps(snapshotId, 1);
  const response = await api.createBrief(
    snapshotId,
    { kind: 'gap', region_id: gaps[0]!.region_id },
    { exemplars: 8, boundary: 8, diverse: 0, query: 0 },
  );
  briefId = response.brief_id;
});

describe('blind-first review', () => {
  it('full session transcript: no sealed bytes before submission, correct reveal after', async () => {
    const api = new ApiClient(baseUrl);
    const session = new BlindReviewSession(api, briefId, 'reviewer-transcript');

    const packets = await session.loadPackets();
    expect(packets.length).toBeGreaterThan(0);

    const form = session.startReview(0);
    for (const criterion of REVIEW_CRITERIA) {
      setScore(form, criterion, 3);
    }
    expect(formComplete(form)).toBe(true);

    // reveal attempts before submission never reach the network
    const requestsBefore = api.log.length;
    await expect(session.reveal(form)).rejects.toThrow(/before submission/);
    expect(api.log.length).toBe(requestsBefore);

    // transcript so far contains no sealed-section request at all
    expect(api.log.some((e) => e.path.includes('/sealed'))).toBe(false);

    const reviewId = await session.submit(form);
    expect(form.submitted).toBe(true);

    const sealed = await session.reveal(form);
    // the only sealed request in the whole transcript comes after the review POST
    const sealedIndexes = api.log
      .map((e, i) => (e.path.includes('/sealed') ? i : -1))
      .filter((i) => i >= 0);
    const submitIndex = api.log.findIndex(
      (e) => e.method === 'POST' && e.path === `/briefs/${briefId}/reviews`,
    );
    expect(sealedIndexes).toHaveLength(1);
    expect(sealedIndexes[0]!).toBeGreaterThan(submitIndex);

    // reveal matches the stored agent scores served by the backend
    const direct = new ApiClient(baseUrl);
    const brief = await direct.getBrief(briefId);
    expect(sealed.sealed_section.idea_scores).toEqual(brief.idea_scores[0]);
    const rows = comparisonRows(form, sealed);
    expect(rows).toHaveLength(REVIEW_CRITERIA.length);
    for (const row of rows) {
      expect(row.reviewer).toBe(3);
      expect(row.agent).toBe(brief.idea_scores[0]![row.criterion]);
    }

    // the all-threes submission round-tripped through the reviews endpoint
    const reviews = await direct.listReviews(briefId);
    const stored = reviews.find((r) => r.review_id === reviewId)!;
    expect(stored.scores).toEqual(Object.fromEntries(REVIEW_CRITERIA.map((c) => [c, 3])));
  });

  it('open packets carry no provenance fields', async () => {
    const api = new ApiClient(baseUrl);
    const session = new BlindReviewSession(api, briefId, 'reviewer-open');
    const packets = await session.loadPackets();
    for (const packet of packets) {
      const blob = JSON.stringify(packet.open_section).toLowerCase();
      expect(blob).not.toContain('scorer');
      expect(blob).not.toContain('idea_scores');
      expect(packet.open_section.criteria.length).toBeGreaterThan(0);
      expect(packet.open_section.evidence.length).toBeGreaterThan(0);
    }
  });

  it('refuses submission until every criterion is scored', async () => {
    const api = new ApiClient(baseUrl);
    const session = new BlindReviewSession(api, briefId, 'reviewer-partial');
    await session.loadPackets();
    const form = session.startReview(0);
    setScore(form, 'novelty', 4);
    await expect(session.submit(form)).rejects.toThrow(/six criteria/);
    expect(form.submitted).toBe(false);
    // nothing was posted
    expect(api.log.some((e) => e.method === 'POST')).toBe(false);
  });

  it('preserves the form when the backend rejects a submission', async () => {
    const api = new ApiClient(baseUrl);
    const session = new BlindReviewSession(api, 'missing-brief', 'reviewer-reject');
    const form = {
      packetId: 'missing-brief:0',
      hypothesisIndex: 0,
      scores: Object.fromEntries(REVIEW_CRITERIA.map((c) => [c, 2])),
      notes: {},
      rationale: 'kept on rejection',
      confidence: 4,
      flags: { insufficientContext: false, needsExpertFollowUp: false },
      submitted: false,
      reviewId: null,
      error: null,
    };
    await expect(session.submit(form)).rejects.toMatchObject({ status: 404 });
    expect(form.submitted).toBe(false);
    expect(form.rationale).toBe('kept on rejection');
    expect(form.error).toMatch(/404/);
  });

  it('rejects out-of-range criterion scores locally', async () => {
    const api = new ApiClient(baseUrl);
    const session = new BlindReviewSession(api, briefId, 'reviewer-range');
    await session.loadPackets();
    const form = session.startReview(0);
    expect(() => setScore(form, 'clarity', 0)).toThrow(/\[1, 5\]/);
    expect(() => setScore(form, 'clarity', 6)).toThrow(/\[1, 5\]/);
    expect(() => setScore(form, 'clarity', 2.5)).toThrow(/\[1, 5\]/);
  });

  it('binds the sealed token to the reviewed hypothesis', async () => {
    const api = new ApiClient(baseUrl);
    const session = new BlindReviewSession(api, briefId, 'reviewer-binding');
    const packets = await session.loadPackets();
    expect(packets.length).toBeGreaterThan(1);
    const form = session.startReview(1);
    for (const criterion of REVIEW_CRITERIA) {
      setScore(form, criterion, 4);
    }
    const reviewId = await session.submit(form);
    // direct probe: the token unlocks only the reviewed index
    await expect(api.fetchSealed(briefId, 0, reviewId)).rejects.toMatchObject({ status: 403 });
    const sealed = await api.fetchSealed(briefId, 1, reviewId);
    expect(sealed.packet_id).toBe(`${briefId}:1`);
  });
});
