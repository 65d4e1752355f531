/**
 * Snapshot exploration view model.
 *
 * The 2-D layout is the first two analysis components served by the
 * backend; the client only arranges data for display and never
 * recomputes scores or cluster labels.
 */

import { type ApiClient } from './api.js';
import { type GapRegion, type LayoutPoint, type TargetSpec } from './types.js';

export type ColorMode = 'cluster' | 'gap_score';

const CLUSTER_PALETTE: ReadonlyArray<string> = [
  '#3178c6', '#4ade80', '#f1e05a', '#f87171', '#a97bff',
  '#00add8', '#fb923c', '#f472b6', '#22d3ee', '#dea584',
];

export interface MapViewState {
  snapshotId: string;
  points: LayoutPoint[];
  gapTargets: GapRegion[];
  pairTargets: [number, number][];
  colorMode: ColorMode;
  selected: TargetSpec | null;
  loading: boolean;
  error: string | null;
}

export interface TargetDetail {
  target: TargetSpec;
  memberCount: number;
  meanGapScore: number | null;
  touchedClusters: number[];
}

export function emptyMapViewState(): MapViewState {
  return {
    snapshotId: '',
    points: [],
    gapTargets: [],
    pairTargets: [],
    colorMode: 'cluster',
    selected: null,
    loading: false,
    error: null,
  };
}

export async function loadSnapshotView(
  api: ApiClient,
  snapshotId: string,
  gapLimit = 20,
): Promise<MapViewState> {
  const state = emptyMapViewState();
  state.snapshotId = snapshotId;
  state.loading = true;
  try {
    const [points, gaps] = await Promise.all([
      api.getLayout(snapshotId),
      api.topGaps(snapshotId, gapLimit),
    ]);
    state.points = points;
    state.gapTargets = gaps;
    state.pairTargets = derivePairList(gaps);
    state.loading = false;
  } catch (err) {
    state.loading = false;
    state.error = err instanceof Error ? err.message : String(err);
  }
  return state;
}

/** Cluster pairs co-touched by gap regions, ordered as served (best first). */
export function derivePairList(gaps: GapRegion[]): [number, number][] {
  const seen = new Set<string>();
  const pairs: [number, number][] = [];
  for (const gap of gaps) {
    const touched = [...gap.touched_clusters].sort((a, b) => a - b);
    for (let i = 0; i < touched.length; i += 1) {
      for (let j = i + 1; j < touched.length; j += 1) {
        const a = touched[i]!;
        const b = touched[j]!;
        const key = `${a}:${b}`;
        if (!seen.has(key)) {
          seen.add(key);
          pairs.push([a, b]);
        }
      }
    }
  }
  return pairs;
}

export function selectTarget(state: MapViewState, target: TargetSpec): TargetDetail {
  state.selected = target;
  if (target.kind === 'gap') {
    const region = state.gapTargets.find((g) => g.region_id === target.region_id);
    if (!region) {
      throw new Error(`unknown gap region ${target.region_id}`);
    }
    return {
      target,
      memberCount: region.member_ids.length,
      meanGapScore: region.mean_gap_score,
      touchedClusters: region.touched_clusters,
    };
  }
  const pair = target.pair ?? [0, 0];
  const members = state.points.filter(
    (p) => p.cluster === pair[0] || p.cluster === pair[1],
  );
  return {
    target,
    memberCount: members.length,
    meanGapScore: null,
    touchedClusters: [...pair],
  };
}

export function pointColor(point: LayoutPoint, state: MapViewState): string {
  if (state.colorMode === 'cluster') {
    return CLUSTER_PALETTE[point.cluster % CLUSTER_PALETTE.length]!;
  }
  return gapScoreColor(point.gap_score, state.points);
}

/** Linear grey-to-red ramp over the served score range; no score math. */
function gapScoreColor(score: number, points: LayoutPoint[]): string {
  let lo = Infinity;
  let hi = -Infinity;
  for (const p of points) {
    if (p.gap_score < lo) lo = p.gap_score;
    if (p.gap_score > hi) hi = p.gap_score;
  }
  const t = hi > lo ? (score - lo) / (hi - lo) : 0;
  const channel = Math.round(0x6b + t * (0xf8 - 0x6b));
  return `rgb(${channel}, ${Math.round(0x70 * (1 - t) + 0x47 * t)}, ${Math.round(
    0x84 * (1 - t) + 0x47 * t,
  )})`;
}
