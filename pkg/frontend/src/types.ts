export interface PhenomenonSpans {
  correct: [number, number][];
  contrastive: [number, number][];
}

export interface QueueItem {
  id: string;
  error_type: string;
  source: string;
  human_correct: string;
  human_contrastive: string;
  machine_reference: string;
  phenomenon_spans: PhenomenonSpans | null;
  machine_highlight: number[];
  version: number;
}

export interface QueuePage {
  items: QueueItem[];
  next_cursor: string | null;
}

export interface Stats {
  by_error_type: Record<string, Record<string, number>>;
  by_status: Record<string, number>;
  pending: number;
  total: number;
}

export type Decision = "accept" | "mark_contrastive" | "drop";

export interface DecisionRequest {
  id: string;
  decision: Decision;
  expected_version: number;
  reviewer: string;
  manually_derived_correct?: string;
  reviewer_note?: string;
}

export interface DecisionAck {
  id: string;
  status: string;
  version: number;
}
