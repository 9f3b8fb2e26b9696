/**
 * Constraint panel model
 *
 * Per-feature widget state derived from the dataset schema: continuous
 * features get a delta slider (starting at 20%) plus optional bound inputs,
 * categorical features start as immutable toggles. Only widgets the analyst
 * actually engaged are serialized, so an untouched panel sends the service
 * nothing beyond the categorical pins.
 */

import type { ConstraintPayload, DatasetSummary } from './types';

export const DEFAULT_DELTA_FRACTION = 0.2;

export interface FeatureWidget {
  name: string;
  index: number;
  kind: 'continuous' | 'categorical';
  immutable: boolean;
  /** Slider value as a fraction of |query value|. */
  deltaFraction: number;
  /** True once the slider has been moved; only then is the fraction sent. */
  deltaActive: boolean;
  lowerBound: number | null;
  upperBound: number | null;
}

export function widgetsFromSummary(summary: DatasetSummary): FeatureWidget[] {
  const categorical = new Set(summary.categorical_indices);
  return summary.feature_names.map((name, index) => ({
    name,
    index,
    kind: categorical.has(index) ? 'categorical' : 'continuous',
    immutable: categorical.has(index),
    deltaFraction: DEFAULT_DELTA_FRACTION,
    deltaActive: false,
    lowerBound: null,
    upperBound: null,
  }));
}

/** Set the delta fraction on every mutable continuous widget at once. */
export function applyGlobalDelta(widgets: FeatureWidget[], fraction: number): void {
  for (const w of widgets) {
    if (w.kind === 'continuous' && !w.immutable) {
      w.deltaFraction = fraction;
      w.deltaActive = true;
    }
  }
}

export function toPayload(widgets: FeatureWidget[]): ConstraintPayload {
  const immutable: number[] = [];
  const lower: Record<string, number> = {};
  const upper: Record<string, number> = {};
  const deltas: Record<string, number> = {};
  for (const w of widgets) {
    if (w.immutable) {
      immutable.push(w.index);
      continue;
    }
    if (w.lowerBound !== null) {
      lower[String(w.index)] = w.lowerBound;
    }
    if (w.upperBound !== null) {
      upper[String(w.index)] = w.upperBound;
    }
    if (w.deltaActive) {
      deltas[String(w.index)] = w.deltaFraction;
    }
  }
  const payload: ConstraintPayload = {};
  if (immutable.length > 0) payload.immutable = immutable;
  if (Object.keys(lower).length > 0) payload.lower_bounds = lower;
  if (Object.keys(upper).length > 0) payload.upper_bounds = upper;
  if (Object.keys(deltas).length > 0) payload.delta_fractions = deltas;
  return payload;
}

export interface DeltaBox {
  lo: number[];
  hi: number[];
}

/**
 * The query +/- delta box implied by the sliders, for the scatter overlay.
 * Null until at least one slider is active; pinned features get zero width.
 */
export function deltaBox(widgets: FeatureWidget[], query: number[]): DeltaBox | null {
  if (!widgets.some((w) => w.deltaActive)) {
    return null;
  }
  const lo: number[] = [];
  const hi: number[] = [];
  for (const w of widgets) {
    const q = query[w.index];
    if (w.immutable || w.kind === 'categorical') {
      lo.push(q);
      hi.push(q);
      continue;
    }
    const fraction = w.deltaActive ? w.deltaFraction : DEFAULT_DELTA_FRACTION;
    const half = fraction * Math.abs(q);
    lo.push(q - half);
    hi.push(q + half);
  }
  return { lo, hi };
}
