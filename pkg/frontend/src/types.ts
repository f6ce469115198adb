/** Wire types mirroring the pipeline service schemas. */

export interface PairOut {
  id: string;
  hs: string;
  cn: string;
  source: string;
  state: string;
  cn_type?: string | null;
  created_at?: string | null;
  replaces_id?: string | null;
}

export interface ScorePayload {
  pair_id: string;
  annotator_id: string;
  score: 0 | 1 | 2 | 3;
  bad_hs: boolean;
  elapsed: number;
  idempotency_key: string;
}

export interface ScoreResponse {
  pair_id: string;
  duplicate: boolean;
  tier: string | null;
}

export interface ExpertItem {
  experiment_id: string;
  condition: string;
  pair: PairOut;
}

export type DecisionAction = "validate" | "edit" | "discard";

export interface DecisionPayload {
  experiment_id: string;
  pair_id: string;
  operator_id: string;
  action: DecisionAction;
  edited_cn?: string;
  elapsed: number;
  idempotency_key: string;
}

export interface DecisionResponse {
  pair_id: string;
  action: string;
  duplicate: boolean;
  edit_rate?: number | null;
  new_pair_id?: string | null;
}

export interface ApiError {
  error: { code: string; message: string; detail?: unknown };
}
