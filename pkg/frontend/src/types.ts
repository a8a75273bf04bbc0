/** Wire types for the annotation API. Field names match the server exactly. */

export type TaskKind = 'PREFERENCE' | 'PAIRWISE' | 'CONSISTENCY';

/** Task identifier accepted by the server: 1|2|3 or a task name. */
export type TaskId = '1' | '2' | '3';

export interface EvalItem {
  item_id: string;
  task: TaskKind;
  entry_id: string;
  payload: {
    summaries?: Record<string, string>;
    reference?: string;
    candidate?: string;
  };
}

export interface PreferenceSelection {
  most: string[];
  least: string[];
}

export type PairwiseChoice = 'A' | 'B' | 'TIE';
export type ConsistencyChoice = 'YES' | 'NO';

export type Selection = PreferenceSelection | PairwiseChoice | ConsistencyChoice;

export interface AnnotationRecord {
  assessor_id: string;
  item_id: string;
  selection: Selection;
  justification?: string | null;
}

export interface ProgressView {
  assessor_id: string;
  tasks: Record<string, { total: number; completed: number; remaining: string[] }>;
}

export const PREFERENCE_LABELS = ['1', '2', '3'] as const;
export const PAIRWISE_LABELS = ['A', 'B'] as const;
