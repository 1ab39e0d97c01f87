// Payload shapes of the inspector session API.

export type Pair = [number, number];

export type Label = 'Exponential' | 'Spiral' | 'Noise';

export const LABELS: Label[] = ['Exponential', 'Spiral', 'Noise'];

export interface SeriesPayload {
  start_index: number;
  samples: Pair[];
  stride?: number;
}

export interface ModulusSummary {
  mean: number;
  std: number;
  logslope: number;
}

export interface ComponentInfo {
  index: number;
  eigval: Pair;
  abs_eigval: number;
  modulus: ModulusSummary;
  wraps: number;
  slope_cycles: number;
  r2: number;
  label: Label;
  label_source: 'Auto' | 'Human';
  kept: boolean;
  cycles: number | null;
  freq_source: string;
}

export interface SessionSummary {
  version: number;
  id: string;
  schema: string;
  retained_rank: number;
  length: number;
  embedding: { d: number; mbar: number; num_vectors: number };
  series: SeriesPayload;
  labels: Record<string, Label>;
}

export interface ComponentsPayload {
  version: number;
  components: ComponentInfo[];
}

export interface ComponentSeriesPayload {
  version: number;
  index: number;
  z: Pair[];
  phase: number[];
  wrap_positions: number[];
  series: SeriesPayload;
  modulus_mean: number;
  modulus_std: number;
}

export interface FrequencyEntry {
  cycles: number;
  rows: number[];
  paired: boolean;
}

export interface ReconstructionPayload {
  version: number;
  frequencies: FrequencyEntry[];
  selection: { signal: number[]; noise: number[]; provenance: string };
  shat: SeriesPayload;
  what: SeriesPayload;
  source: SeriesPayload;
}

export interface LabelResponse {
  version: number;
  component: ComponentInfo;
  frequencies: FrequencyEntry[];
}
