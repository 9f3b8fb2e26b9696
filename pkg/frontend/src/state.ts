/**
 * Explorer session state
 *
 * Tracks the selected artifacts, the editable query instance, the
 * constraint widgets, the latest explanation, and an append-only history
 * of (constraints, result) pairs. History entries are deep-frozen when
 * recorded and can never change afterwards.
 */

import type { ConstraintPayload, DatasetSummary, ExplainRecord } from './types';
import { widgetsFromSummary, type FeatureWidget } from './constraints';

export interface HistoryEntry {
  readonly index: number;
  readonly constraints: ConstraintPayload;
  readonly result: ExplainRecord;
}

function deepFreeze<T>(value: T): T {
  if (value !== null && typeof value === 'object') {
    for (const key of Object.keys(value as object)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
    Object.freeze(value);
  }
  return value;
}

export class ExplorerState {
  summary: DatasetSummary | null = null;
  boundaryId: string | null = null;
  widgets: FeatureWidget[] = [];

  private originalQuery: number[] | null = null;
  query: number[] | null = null;
  dirty = false;

  lastResult: ExplainRecord | null = null;
  private readonly entries: HistoryEntry[] = [];

  attachDataset(summary: DatasetSummary, boundaryId: string): void {
    this.summary = summary;
    this.boundaryId = boundaryId;
    this.widgets = widgetsFromSummary(summary);
    this.originalQuery = null;
    this.query = null;
    this.dirty = false;
    this.lastResult = null;
  }

  pickRow(row: number[]): void {
    this.originalQuery = [...row];
    this.query = [...row];
    this.dirty = false;
  }

  editFeature(index: number, value: number): void {
    if (this.query === null) {
      throw new Error('no instance selected');
    }
    this.query[index] = value;
    this.dirty = true;
  }

  resetQuery(): void {
    if (this.originalQuery === null) {
      throw new Error('no instance selected');
    }
    this.query = [...this.originalQuery];
    this.dirty = false;
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  recordResult(constraints: ConstraintPayload, result: ExplainRecord): HistoryEntry {
    const entry: HistoryEntry = deepFreeze({
      index: this.entries.length,
      constraints: structuredClone(constraints),
      result: structuredClone(result),
    });
    this.entries.push(entry);
    this.lastResult = entry.result;
    return entry;
  }
}
