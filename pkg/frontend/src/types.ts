/** Payload shapes of the inspection API. */

export type MarkStateValue = 'unmarked' | 'high_quality' | 'low_quality';
export type MetricName = 'fluency' | 'grammaticality' | 'alignment';
export type SortKey = 'id' | MetricName;
export type GroupKind = 'transform' | 'feature';

export interface Scores {
  fluency: number;
  grammaticality: number;
  alignment: number;
}

export interface Verdict {
  predicted_label: string;
  explanation: string;
  consistent: boolean;
  provider: string;
}

export interface Row {
  id: string;
  text: string;
  label: string;
  origin: 'original' | 'generated';
  parent_id: string | null;
  mark: MarkStateValue;
  mark_source: string | null;
  scores: Scores | null;
  verdict: Verdict | null;
  transforms: string[];
  highlights: [number, number][];
}

export interface TablePage {
  rows: Row[];
  total: number;
  page: number;
  page_size: number;
}

export interface GroupSummary {
  key: string;
  kind: GroupKind;
  value: string;
  display: string;
  member_count: number;
  inspected: number;
  high_quality: number;
  examples: { id: string; text: string; highlights: [number, number][] }[];
}

export interface Stats {
  total: number;
  originals: number;
  generated: number;
  inspected: number;
  high_quality: number;
  low_quality: number;
}

export interface Meta {
  dataset: string;
  label_set: string[];
  transforms: Record<string, string>;
  features: Record<string, string>;
  counts: Stats;
}

export interface GuidanceEntry {
  id: string;
  predicted_label?: string;
  explanation?: string;
  consistent?: boolean;
  provider?: string;
  error?: { code: string; message: string };
}

export interface ApiErrorBody {
  error: { code: string; message: string; detail: unknown };
}
