/**
 * Per-feature diff table
 *
 * Renders the before -> after rows of an explanation payload. A row counts
 * as changed when the service-reported before and after differ; changed
 * rows carry the `changed` class for highlighting.
 */

import type { ExplainRecord } from './types';

const CHANGE_EPSILON = 1e-9;

export interface DiffRow {
  feature: string;
  before: number;
  after: number;
  changed: boolean;
}

export function diffRows(record: ExplainRecord): DiffRow[] {
  return record.deltas.map((d) => ({
    feature: d.feature,
    before: d.before,
    after: d.after,
    changed: Math.abs(d.after - d.before) > CHANGE_EPSILON,
  }));
}

/** Round to 4 decimals for display, dropping trailing zeros. */
export function formatNumber(value: number): string {
  return String(Number(value.toFixed(4)));
}

export function renderDiffTable(container: HTMLElement, record: ExplainRecord | null): void {
  container.replaceChildren();
  if (record === null) {
    return;
  }
  const table = document.createElement('table');
  table.className = 'diff-table';
  const head = table.createTHead().insertRow();
  for (const title of ['feature', 'before', 'after']) {
    const cell = document.createElement('th');
    cell.textContent = title;
    head.append(cell);
  }
  const body = table.createTBody();
  for (const row of diffRows(record)) {
    const tr = body.insertRow();
    tr.className = row.changed ? 'changed' : 'unchanged';
    tr.insertCell().textContent = row.feature;
    tr.insertCell().textContent = formatNumber(row.before);
    tr.insertCell().textContent = formatNumber(row.after);
  }
  container.append(table);
}
