import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import {
  derivePairList,
  loadSnapshotView,
  pointColor,
  selectTarget,
} from '../src/mapView.js';
import { readBackendInfo } from './setup/info.js';

const { baseUrl, snapshotId } = readBackendInfo();

describe('snapshot exploration', () => {
  it('loads one layout point per paper, all served by the backend', async () => {
    const api = new ApiClient(baseUrl);
    const state = await loadSnapshotView(api, snapshotId);
    const payload = await api.getSnapshot(snapshotId);
    expect(state.error).toBeNull();
    expect(state.points).toHaveLength(payload.papers.length);
    const ids = new Set(state.points.map((p) => p.paper_id));
    for (const paper of payload.papers) {
      expect(ids.has(paper.paper_id)).toBe(true);
    }
  });

  it('selecting the top gap shows stats matching the gaps endpoint', async () => {
    const api = new ApiClient(baseUrl);
    const state = await loadSnapshotView(api, snapshotId);
    const served = await api.topGaps(snapshotId, 1);
    const top = served[0]!;
    const detail = selectTarget(state, { kind: 'gap', region_id: top.region_id });
    expect(detail.memberCount).toBe(top.member_ids.length);
    expect(detail.meanGapScore).toBe(top.mean_gap_score);
    expect(detail.touchedClusters).toEqual(top.touched_clusters);
  });

  it('gap targets arrive ranked best-first from the backend', async () => {
    const api = new ApiClient(baseUrl);
    const state = await loadSnapshotView(api, snapshotId);
    const means = state.gapTargets.map((g) => g.mean_gap_score);
    expect(means).toEqual([...means].sort((a, b) => b - a));
  });

  it('derives cluster pairs from touched clusters without duplicates', () => {
    const pairs = derivePairList([
      { region_id: 0, member_ids: ['a'], mean_gap_score: 1, touched_clusters: [2, 0, 1] },
      { region_id: 1, member_ids: ['b'], mean_gap_score: 0.5, touched_clusters: [0, 1] },
    ]);
    expect(pairs).toEqual([
      [0, 1],
      [0, 2],
      [1, 2],
    ]);
  });

  it('surfaces backend failures as an error state, never stale data', async () => {
    const api = new ApiClient(baseUrl);
    const state = await loadSnapshotView(api, 'no-such-snapshot');
    expect(state.error).toMatch(/404/);
    expect(state.points).toHaveLength(0);
    expect(state.gapTargets).toHaveLength(0);
  });

  it('colors points by served values only', async () => {
    const api = new ApiClient(baseUrl);
    const state = await loadSnapshotView(api, snapshotId);
    const byCluster = pointColor(state.points[0]!, state);
    expect(byCluster).toMatch(/^#/);
    state.colorMode = 'gap_score';
    const extreme = state.points.reduce((a, b) => (a.gap_score > b.gap_score ? a : b));
    const calm = state.points.reduce((a, b) => (a.gap_score < b.gap_score ? a : b));
    expect(pointColor(extreme, state)).not.toBe(pointColor(calm, state));
  });
});
