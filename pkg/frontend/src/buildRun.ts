/**
 * Build-and-run flow: budget and cue forms, pack preview with
 * provenance badges, and the brief view model.
 *
 * All counts shown in the preview are read off the backend pack
 * payload; the form only validates its own inputs.
 */

import { type ApiClient } from './api.js';
import {
  type BriefResponse,
  type BudgetForm,
  type CueForm,
  type PackPayload,
  type TargetSpec,
} from './types.js';

export interface PackFormState {
  target: TargetSpec | null;
  budget: BudgetForm;
  cueQuestion: string;
  cueKeywords: string;
  queries: string;
  errors: string[];
}

export interface ProvenanceBadge {
  source: string;
  count: number;
}

export interface PackPreview {
  pack: PackPayload;
  totalItems: number;
  badges: ProvenanceBadge[];
  cueBadge: string | null;
  citableIds: string[];
}

export function defaultPackForm(): PackFormState {
  return {
    target: null,
    budget: { exemplars: 8, boundary: 8, diverse: 0, query: 0 },
    cueQuestion: '',
    cueKeywords: '',
    queries: '',
    errors: [],
  };
}

export function validatePackForm(form: PackFormState): boolean {
  form.errors = [];
  if (!form.target) {
    form.errors.push('select a target first');
  }
  const { exemplars, boundary, diverse, query } = form.budget;
  if ([exemplars, boundary, diverse, query].some((n) => n < 0 || !Number.isInteger(n))) {
    form.errors.push('budget counts must be non-negative integers');
  }
  if (exemplars + boundary + diverse + query <= 0) {
    form.errors.push('total budget must be positive');
  }
  return form.errors.length === 0;
}

export function cueFromForm(form: PackFormState): CueForm | null {
  const question = form.cueQuestion.trim();
  if (!question) return null;
  const keywords = form.cueKeywords
    .split(',')
    .map((k) => k.trim())
    .filter((k) => k.length > 0);
  return { question, keywords };
}

export function queriesFromForm(form: PackFormState): string[] {
  return form.queries
    .split('\n')
    .map((q) => q.trim())
    .filter((q) => q.length > 0);
}

export async function requestPackPreview(
  api: ApiClient,
  snapshotId: string,
  form: PackFormState,
): Promise<PackPreview> {
  if (!validatePackForm(form) || !form.target) {
    throw new Error(form.errors.join('; '));
  }
  const pack = await api.buildPack(
    snapshotId,
    form.target,
    form.budget,
    cueFromForm(form),
    queriesFromForm(form),
  );
  return packPreview(pack);
}

/** Per-channel badge counts straight off the pack payload. */
export function packPreview(pack: PackPayload): PackPreview {
  const counts = new Map<string, number>();
  for (const item of pack.items) {
    counts.set(item.selection_source, (counts.get(item.selection_source) ?? 0) + 1);
  }
  const badges = [...counts.entries()]
    .map(([source, count]) => ({ source, count }))
    .sort((a, b) => a.source.localeCompare(b.source));
  return {
    pack,
    totalItems: pack.items.length,
    badges,
    // the cue steers retrieval but is never itself citable evidence
    cueBadge: pack.cue ? pack.cue.question : null,
    citableIds: pack.items.map((item) => item.paper_id),
  };
}

export interface BriefView {
  briefId: string;
  explanation: string[];
  auditStatus: 'clean' | 'patched';
  supportFraction: number;
  hypotheses: {
    title: string;
    body: string;
    citationLinks: { paperId: string; inPack: boolean }[];
  }[];
  scores: Record<string, number>[];
  blueprintSections: [string, string][];
  iterations: number;
}

export async function launchWorkflow(
  api: ApiClient,
  snapshotId: string,
  form: PackFormState,
): Promise<BriefView> {
  if (!validatePackForm(form) || !form.target) {
    throw new Error(form.errors.join('; '));
  }
  const response = await api.createBrief(
    snapshotId,
    form.target,
    form.budget,
    cueFromForm(form),
    queriesFromForm(form),
  );
  return briefView(response);
}

export function briefView(response: BriefResponse): BriefView {
  const { brief } = response;
  const packIds = new Set(brief.pack.items.map((item) => item.paper_id));
  return {
    briefId: response.brief_id,
    explanation: brief.explanation.side_summaries,
    auditStatus: brief.audit.needs_patch ? 'patched' : 'clean',
    supportFraction: brief.audit.support_fraction,
    hypotheses: brief.hypotheses.map((h) => ({
      title: h.title,
      body: h.body,
      citationLinks: h.citations.map((paperId) => ({
        paperId,
        inPack: packIds.has(paperId),
      })),
    })),
    scores: brief.idea_scores.map((s) => ({
      novelty: s.novelty,
      plausibility: s.plausibility,
      evaluability: s.evaluability,
      feasibility: s.feasibility,
      importance: s.importance,
      clarity: s.clarity,
    })),
    blueprintSections: Object.entries(brief.blueprint),
    iterations: brief.iterations,
  };
}
