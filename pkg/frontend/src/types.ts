/**
 * Payload shapes served by the backend HTTP API.
 *
 * Every number rendered by the UI comes from one of these payloads; the
 * client never recomputes scores, labels, or metrics locally.
 */

export interface SnapshotSummary {
  snapshot_id: string;
  created_at?: string;
}

export interface PaperRecord {
  paper_id: string;
  title: string;
  abstract?: string;
  year?: number;
  subject_labels?: string[];
}

export interface SnapshotPayload {
  config: Record<string, unknown>;
  papers: PaperRecord[];
  clusters: {
    method: string;
    fallback_used: boolean;
    params: Record<string, unknown>;
    labels: Record<string, number>;
  };
  gap_scores: Record<string, number>;
  gap_regions: GapRegion[];
}

export interface GapRegion {
  region_id: number;
  member_ids: string[];
  mean_gap_score: number;
  touched_clusters: number[];
}

export interface LayoutPoint {
  paper_id: string;
  x: number;
  y: number;
  cluster: number;
  gap_score: number;
}

export interface ClusterSummary {
  label: number;
  size: number;
}

export interface ClustersPayload {
  method: string;
  fallback_used: boolean;
  params: Record<string, unknown>;
  clusters: ClusterSummary[];
}

export interface TargetSpec {
  kind: 'gap' | 'cluster_pair';
  region_id?: number | null;
  pair?: [number, number] | null;
}

export interface BudgetForm {
  exemplars: number;
  boundary: number;
  diverse: number;
  query: number;
}

export interface CueForm {
  question: string;
  keywords: string[];
}

export interface PackItem {
  paper_id: string;
  selection_source: string;
  selection_meta: Record<string, unknown>;
}

export interface PackPayload {
  snapshot_id: string;
  target: TargetSpec;
  items: PackItem[];
  budget: BudgetForm;
  cue: CueForm | null;
  queries: string[];
}

export interface Hypothesis {
  title: string;
  body: string;
  citations: string[];
  assumptions: string[];
}

export interface IdeaScores {
  novelty: number;
  plausibility: number;
  evaluability: number;
  feasibility: number;
  importance: number;
  clarity: number;
  scorer: string;
}

export interface BriefPayload {
  target: TargetSpec;
  pack: PackPayload;
  explanation: {
    side_summaries: string[];
    axes_of_separation: string[];
    bridge_seeds: string[];
    insufficient_evidence: boolean;
  };
  audit: {
    unsupported_claims: string[];
    missing_facets: string[];
    cue_violations: string[];
    patch_queries: string[];
    needs_patch: boolean;
    support_fraction: number;
  };
  hypotheses: Hypothesis[];
  idea_scores: IdeaScores[];
  blueprint: Record<string, string>;
  blueprint_index: number;
  iterations: number;
}

export interface BriefResponse {
  brief_id: string;
  brief: BriefPayload;
}

export interface ReviewPacketOpen {
  packet_id: string;
  hypothesis_index: number;
  open_section: {
    title: string;
    body: string;
    citations: string[];
    assumptions: string[];
    evidence: { paper_id: string; title: string }[];
    criteria: string[];
  };
}

export interface SealedSection {
  packet_id: string;
  sealed_section: {
    idea_scores: IdeaScores;
    iterations: number;
    blueprint_index: number;
  };
}

export interface ReviewSubmission {
  reviewer: string;
  hypothesis_index: number;
  scores: Record<string, number>;
  comments?: string;
}

export interface StoredReview {
  review_id: string;
  reviewer: string;
  hypothesis_index: number;
  scores: Record<string, number>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}
