/**
 * Explorer page controller
 *
 * Builds the page skeleton, loads artifacts through the service client, and
 * keeps the editor, constraint panel, diff table, history, and scatter in
 * sync with the session state. Changing the delta slider re-requests an
 * explanation immediately; an older in-flight request is cancelled rather
 * than allowed to overwrite a newer result.
 */

import { isAbortError, ServiceClient, ServiceHttpError } from './api';
import { applyGlobalDelta, deltaBox, toPayload, type FeatureWidget } from './constraints';
import { formatNumber, renderDiffTable } from './difftable';
import { buildScene, renderScatter } from './scatter';
import { ExplorerState } from './state';
import type { DatasetPoints, DatasetSummary, ExplainRecord } from './types';

const SKELETON = `
  <div class="explorer">
    <section class="pane">
      <h2>Instance</h2>
      <select id="instance-picker"></select>
      <span id="dirty-flag" hidden>edited</span>
      <button id="reset-button" type="button">reset</button>
      <div id="feature-editor"></div>
    </section>
    <section class="pane">
      <h2>Constraints</h2>
      <label>max change
        <input id="delta-slider" type="range" min="0" max="100" step="1" value="20">
        <span id="delta-label">20%</span>
      </label>
      <div id="constraint-panel"></div>
      <button id="explain-button" type="button">explain</button>
      <div id="error-box" class="error" hidden></div>
    </section>
    <section class="pane">
      <h2>Result</h2>
      <span id="mode-badge"></span>
      <span id="distance-value"></span>
      <div id="crossing-note" hidden></div>
      <div id="diff-table"></div>
      <h2>History</h2>
      <ol id="history-list"></ol>
    </section>
    <section class="pane" id="scatter-panel">
      <h2>Boundary</h2>
      <svg id="scatter-svg"></svg>
      <p id="scatter-note" hidden></p>
    </section>
  </div>
`;

function byId<T extends HTMLElement>(root: ParentNode, id: string): T {
  const el = root.querySelector(`#${id}`);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

export class ExplorerApp {
  readonly state = new ExplorerState();

  private readonly client: ServiceClient;
  private readonly root: HTMLElement;
  private datasetPoints: DatasetPoints | null = null;
  private boundarySample: number[][] = [];
  private pendingExplain: Promise<ExplainRecord | null> | null = null;

  private readonly picker: HTMLSelectElement;
  private readonly editor: HTMLElement;
  private readonly dirtyFlag: HTMLElement;
  private readonly panel: HTMLElement;
  private readonly deltaSlider: HTMLInputElement;
  private readonly deltaLabel: HTMLElement;
  private readonly modeBadge: HTMLElement;
  private readonly distanceValue: HTMLElement;
  private readonly crossingNote: HTMLElement;
  private readonly errorBox: HTMLElement;
  private readonly diffTable: HTMLElement;
  private readonly historyList: HTMLElement;
  private readonly scatterPanel: HTMLElement;
  private readonly scatterSvg: SVGElement;
  private readonly scatterNote: HTMLElement;

  constructor(root: HTMLElement, client: ServiceClient) {
    this.root = root;
    this.client = client;
    root.innerHTML = SKELETON;
    this.picker = byId(root, 'instance-picker');
    this.editor = byId(root, 'feature-editor');
    this.dirtyFlag = byId(root, 'dirty-flag');
    this.panel = byId(root, 'constraint-panel');
    this.deltaSlider = byId(root, 'delta-slider');
    this.deltaLabel = byId(root, 'delta-label');
    this.modeBadge = byId(root, 'mode-badge');
    this.distanceValue = byId(root, 'distance-value');
    this.crossingNote = byId(root, 'crossing-note');
    this.errorBox = byId(root, 'error-box');
    this.diffTable = byId(root, 'diff-table');
    this.historyList = byId(root, 'history-list');
    this.scatterPanel = byId(root, 'scatter-panel');
    this.scatterSvg = root.querySelector('#scatter-svg') as unknown as SVGElement;
    this.scatterNote = byId(root, 'scatter-note');

    this.picker.addEventListener('change', () => {
      const idx = Number(this.picker.value);
      if (Number.isInteger(idx) && this.datasetPoints !== null) {
        this.pickInstance(idx);
      }
    });
    byId<HTMLButtonElement>(root, 'reset-button').addEventListener('click', () => {
      if (this.state.query !== null) {
        this.state.resetQuery();
        this.syncEditor();
        this.refreshScatter();
      }
    });
    this.deltaSlider.addEventListener('input', () => {
      this.deltaLabel.textContent = `${this.deltaSlider.value}%`;
    });
    this.deltaSlider.addEventListener('change', () => {
      const fraction = Number(this.deltaSlider.value) / 100;
      applyGlobalDelta(this.state.widgets, fraction);
      this.deltaLabel.textContent = `${this.deltaSlider.value}%`;
      this.syncPanel();
      this.refreshScatter();
      this.triggerExplain();
    });
    byId<HTMLButtonElement>(root, 'explain-button').addEventListener('click', () => {
      this.triggerExplain();
    });
  }

  /** Attach a registered dataset and a finished boundary job, then render. */
  async load(summary: DatasetSummary, boundaryId: string): Promise<void> {
    this.state.attachDataset(summary, boundaryId);
    this.datasetPoints = await this.client.datasetPoints(summary.id);
    if (summary.n_features === 2) {
      const sample = await this.client.boundaryPoints(boundaryId);
      this.boundarySample = sample.points;
    } else {
      this.boundarySample = [];
    }
    this.buildPicker();
    this.buildPanel();
    this.renderResultCleared();
    this.renderHistory();
    this.refreshScatter();
  }

  pickInstance(rowIndex: number): void {
    if (this.datasetPoints === null) {
      return;
    }
    this.picker.value = String(rowIndex);
    this.state.pickRow(this.datasetPoints.points[rowIndex]);
    this.syncEditor();
    this.refreshScatter();
  }

  /** Fire an explain request; resolves with the record or null if superseded. */
  triggerExplain(): Promise<ExplainRecord | null> {
    const promise = this.explainNow();
    this.pendingExplain = promise;
    return promise;
  }

  /** Wait until no explain request is in flight. */
  async idle(): Promise<void> {
    while (this.pendingExplain !== null) {
      const current = this.pendingExplain;
      await current.catch(() => undefined);
      if (this.pendingExplain === current) {
        this.pendingExplain = null;
      }
    }
  }

  private async explainNow(): Promise<ExplainRecord | null> {
    const { query, boundaryId } = this.state;
    if (query === null || boundaryId === null) {
      this.showError('select an instance first');
      return null;
    }
    const constraints = toPayload(this.state.widgets);
    try {
      const record = await this.client.explain({
        boundary_id: boundaryId,
        query: [...query],
        constraints,
        seed: 0,
      });
      this.state.recordResult(constraints, record);
      this.showError(null);
      this.renderResult(record);
      this.renderHistory();
      this.refreshScatter();
      return record;
    } catch (err) {
      if (isAbortError(err)) {
        return null;
      }
      this.showError(err instanceof ServiceHttpError ? err.message : String(err));
      return null;
    }
  }

  private buildPicker(): void {
    this.picker.replaceChildren();
    const points = this.datasetPoints;
    if (points === null) {
      return;
    }
    const placeholder = document.createElement('option');
    placeholder.value = '';
    placeholder.textContent = 'pick an instance';
    this.picker.append(placeholder);
    points.points.forEach((_, i) => {
      const option = document.createElement('option');
      option.value = String(i);
      option.textContent = `row ${i} (class ${points.labels[i]})`;
      this.picker.append(option);
    });
  }

  private buildPanel(): void {
    this.panel.replaceChildren();
    for (const widget of this.state.widgets) {
      this.panel.append(this.buildWidgetRow(widget));
    }
    this.syncPanel();
  }

  private buildWidgetRow(widget: FeatureWidget): HTMLElement {
    const row = document.createElement('div');
    row.className = `constraint-row ${widget.kind}`;
    row.dataset.index = String(widget.index);

    const toggle = document.createElement('input');
    toggle.type = 'checkbox';
    toggle.className = 'immutable-toggle';
    toggle.checked = widget.immutable;
    toggle.addEventListener('change', () => {
      widget.immutable = toggle.checked;
      this.syncPanel();
      this.refreshScatter();
      this.triggerExplain();
    });
    const name = document.createElement('span');
    name.className = 'feature-name';
    name.textContent = widget.name;
    row.append(toggle, name);

    if (widget.kind === 'categorical') {
      const tag = document.createElement('span');
      tag.className = 'kind-tag';
      tag.textContent = 'categorical';
      row.append(tag);
      return row;
    }

    const slider = document.createElement('input');
    slider.type = 'range';
    slider.className = 'feature-delta';
    slider.min = '0';
    slider.max = '100';
    slider.step = '1';
    slider.value = String(Math.round(widget.deltaFraction * 100));
    slider.addEventListener('change', () => {
      widget.deltaFraction = Number(slider.value) / 100;
      widget.deltaActive = true;
      this.refreshScatter();
      this.triggerExplain();
    });
    row.append(slider);

    for (const side of ['lower', 'upper'] as const) {
      const input = document.createElement('input');
      input.type = 'number';
      input.className = `${side}-bound`;
      input.placeholder = side;
      input.addEventListener('change', () => {
        const parsed = input.value.trim() === '' ? null : Number(input.value);
        if (side === 'lower') {
          widget.lowerBound = parsed;
        } else {
          widget.upperBound = parsed;
        }
        this.triggerExplain();
      });
      row.append(input);
    }
    return row;
  }

  /** Push widget state back into the panel controls (toggles, sliders). */
  private syncPanel(): void {
    for (const row of this.panel.querySelectorAll<HTMLElement>('.constraint-row')) {
      const widget = this.state.widgets[Number(row.dataset.index)];
      const toggle = row.querySelector<HTMLInputElement>('.immutable-toggle');
      if (toggle !== null) {
        toggle.checked = widget.immutable;
      }
      const slider = row.querySelector<HTMLInputElement>('.feature-delta');
      if (slider !== null) {
        slider.value = String(Math.round(widget.deltaFraction * 100));
        slider.disabled = widget.immutable;
      }
    }
  }

  private syncEditor(): void {
    this.editor.replaceChildren();
    const { query, summary } = this.state;
    if (query === null || summary === null) {
      return;
    }
    summary.feature_names.forEach((name, i) => {
      const label = document.createElement('label');
      label.textContent = name;
      const input = document.createElement('input');
      input.type = 'number';
      input.className = 'feature-input';
      input.dataset.index = String(i);
      input.value = String(query[i]);
      input.addEventListener('change', () => {
        this.state.editFeature(i, Number(input.value));
        this.dirtyFlag.hidden = !this.state.dirty;
        this.refreshScatter();
      });
      label.append(input);
      this.editor.append(label);
    });
    this.dirtyFlag.hidden = !this.state.dirty;
  }

  private renderResultCleared(): void {
    this.modeBadge.textContent = '';
    this.distanceValue.textContent = '';
    this.crossingNote.hidden = true;
    renderDiffTable(this.diffTable, null);
  }

  private renderResult(record: ExplainRecord): void {
    this.modeBadge.textContent = record.mode;
    this.modeBadge.className = `mode-badge ${record.mode}`;
    this.distanceValue.textContent = `d=${formatNumber(record.distance)}`;
    const notes: string[] = [];
    if (record.crossing_failed) {
      notes.push('crossing search failed; showing the nearest feasible point');
    }
    if (record.violated_constraints.length > 0) {
      notes.push(`violated: ${record.violated_constraints.join(', ')}`);
    }
    this.crossingNote.textContent = notes.join(' | ');
    this.crossingNote.hidden = notes.length === 0;
    renderDiffTable(this.diffTable, record);
  }

  private renderHistory(): void {
    this.historyList.replaceChildren();
    for (const entry of this.state.history) {
      const item = document.createElement('li');
      item.className = 'history-entry';
      item.dataset.distance = String(entry.result.distance);
      item.textContent =
        `#${entry.index + 1} ${entry.result.mode} d=${formatNumber(entry.result.distance)}`;
      this.historyList.append(item);
    }
  }

  private showError(message: string | null): void {
    this.errorBox.textContent = message ?? '';
    this.errorBox.hidden = message === null;
  }

  private refreshScatter(): void {
    const { summary, query, lastResult } = this.state;
    const points = this.datasetPoints;
    if (summary === null || points === null) {
      return;
    }
    if (summary.n_features !== 2) {
      this.scatterSvg.replaceChildren();
      this.scatterSvg.setAttribute('hidden', '');
      this.scatterNote.textContent = 'scatter is shown for 2-feature datasets only';
      this.scatterNote.hidden = false;
      return;
    }
    this.scatterSvg.removeAttribute('hidden');
    this.scatterNote.hidden = true;
    const counterfactual =
      lastResult === null ? null : lastResult.crossed ?? lastResult.boundary_point;
    const scene = buildScene({
      bounds: points.bounds,
      points: points.points,
      labels: points.labels,
      boundaryPoints: this.boundarySample,
      query,
      counterfactual,
      box: query === null ? null : deltaBox(this.state.widgets, query),
    });
    renderScatter(this.scatterSvg, scene);
  }
}
