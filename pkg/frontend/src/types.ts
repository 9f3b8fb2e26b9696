/**
 * Service payload types
 *
 * Shapes mirror the HTTP API exactly. Every number the explorer displays
 * originates from one of these payloads; the client never recomputes
 * distances, feasibility, or boundary geometry.
 */

export interface DatasetSummary {
  id: string;
  n_samples: number;
  n_features: number;
  feature_names: string[];
  categorical_indices: number[];
  bounds: [number, number][];
  class_counts: [number, number];
}

export interface DatasetPoints {
  points: number[][];
  labels: number[];
  feature_names: string[];
  bounds: [number, number][];
}

export interface ModelInfo {
  id: string;
  family: string;
  dataset_id: string;
  report: {
    train_accuracy: number;
    epochs_or_trees: number;
    final_loss: number | null;
  };
}

export type JobState = 'pending' | 'running' | 'done' | 'error';

export interface BoundaryJobStatus {
  id: string;
  status: JobState;
  pairs_done: number;
  pairs_total: number;
  count: number | null;
  file?: string | null;
  file_sha256?: string | null;
  error: string | null;
  params: {
    model_id: string;
    dataset_id: string;
    threshold_t: number;
    epsilon: number;
    seed: number;
  };
}

export interface BoundaryPoints {
  points: number[][];
  count_total: number;
  capped: boolean;
}

/** Wire form of a constraint set; keys of the record maps are feature indices. */
export interface ConstraintPayload {
  immutable?: number[];
  equalities?: Record<string, number>;
  lower_bounds?: Record<string, number>;
  upper_bounds?: Record<string, number>;
  delta_fractions?: Record<string, number>;
}

export interface FeatureDelta {
  feature: string;
  before: number;
  after: number;
}

export interface ExplainRecord {
  query: number[];
  boundary_point: number[];
  crossed: number[] | null;
  mode: 'feasible' | 'bounded_fallback';
  distance: number;
  crossing_failed: boolean;
  deltas: FeatureDelta[];
  satisfied_constraints: string[];
  violated_constraints: string[];
}

export interface ExplainRequest {
  boundary_id: string;
  query: number[];
  constraints?: ConstraintPayload;
  constraints_preset?: string;
  eps0?: number;
  samples_per_dim?: number;
  seed?: number;
}

export interface GeneratorSpec {
  n_samples?: number;
  n_features?: number;
  class_sep?: number;
  seed?: number;
}

export interface BoundaryRequest {
  model_id: string;
  dataset_id?: string;
  threshold_t?: number;
  epsilon?: number;
  seed?: number;
  batch_size?: number;
}
