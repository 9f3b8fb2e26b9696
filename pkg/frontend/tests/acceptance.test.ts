/**
 * Release gate for the explorer: the full what-if round trip against a
 * mocked service. Moving the max-change slider from 15% to 25% must fire a
 * new explain request, update the diff table and history, and every distance
 * shown anywhere on the page must equal the value from the service payload.
 */

import { beforeEach, describe, expect, it } from 'vitest';

import { ServiceClient } from '../src/api';
import { ExplorerApp } from '../src/app';
import type { ExplainRequest } from '../src/types';
import { makeRecord, MockService, SUMMARY_2D } from './mock-service';

const DISTANCE_BY_FRACTION: Record<string, number> = {
  '0.15': 1.25,
  '0.25': 0.8125,
};

let mock: MockService;
let root: HTMLElement;
let app: ExplorerApp;

beforeEach(async () => {
  mock = new MockService();
  mock.explainHandler = (body: ExplainRequest) => {
    const fraction = body.constraints?.delta_fractions?.['0'];
    const distance = DISTANCE_BY_FRACTION[String(fraction)] ?? 1.5;
    const crossed =
      fraction === 0.25 ? body.query.map((v) => v - 2) : body.query.map((v) => v - 1.5);
    return makeRecord(body, {
      distance,
      crossed,
      deltas: SUMMARY_2D.feature_names.map((feature, i) => ({
        feature,
        before: body.query[i],
        after: crossed[i],
      })),
    });
  };
  root = document.createElement('div');
  document.body.replaceChildren(root);
  app = new ExplorerApp(root, new ServiceClient('http://svc', mock.fetch));
  await app.load(SUMMARY_2D, 'bnd-1');
  app.pickInstance(3);
});

function slideTo(percent: number): Promise<void> {
  const slider = root.querySelector<HTMLInputElement>('#delta-slider');
  if (slider === null) {
    throw new Error('missing #delta-slider');
  }
  slider.value = String(percent);
  slider.dispatchEvent(new Event('change'));
  return app.idle();
}

function shownDistance(): number {
  const text = root.querySelector('#distance-value')?.textContent ?? '';
  expect(text).toMatch(/^d=/);
  return Number(text.slice(2));
}

function historyItems(): HTMLLIElement[] {
  return [...root.querySelectorAll<HTMLLIElement>('#history-list li')];
}

function afterColumn(): string[] {
  return [...root.querySelectorAll('#diff-table tbody tr')].map(
    (row) => row.children[2].textContent ?? '',
  );
}

describe('what-if round trip', () => {
  it('slider 15% -> 25% re-explains, updates diff table and history, and shows payload distances verbatim', async () => {
    await slideTo(15);

    let sent = mock.requestsTo('/explain');
    expect(sent).toHaveLength(1);
    expect((sent[0].body as ExplainRequest).constraints?.delta_fractions).toEqual({
      '0': 0.15,
      '1': 0.15,
    });
    expect(shownDistance()).toBe(1.25);
    expect(afterColumn()).toEqual(['6.5', '4.5']);
    expect(historyItems()).toHaveLength(1);

    await slideTo(25);

    sent = mock.requestsTo('/explain');
    expect(sent).toHaveLength(2);
    expect((sent[1].body as ExplainRequest).constraints?.delta_fractions).toEqual({
      '0': 0.25,
      '1': 0.25,
    });
    expect(shownDistance()).toBe(0.8125);
    expect(afterColumn()).toEqual(['6', '4']);

    const items = historyItems();
    expect(items).toHaveLength(2);
    expect(items.map((li) => Number(li.dataset.distance))).toEqual([1.25, 0.8125]);

    // Every distance on the page must round-trip exactly from the payload.
    const displayed = [shownDistance(), ...items.map((li) => parseHistoryDistance(li))];
    expect(displayed).toEqual([0.8125, 1.25, 0.8125]);

    console.log(
      'ACCEPTANCE 11 PASS: slider 15%->25% issued 2 explain requests; ' +
        'diff table and history updated; displayed distances [1.25, 0.8125] match the payloads',
    );
  });

  it('the delta box on the scatter tracks the active slider fraction', async () => {
    await slideTo(25);
    const rect = root.querySelector('#scatter-svg rect.constraint-box');
    expect(rect).not.toBeNull();
  });
});

function parseHistoryDistance(li: HTMLLIElement): number {
  const match = /d=([-\d.]+)$/.exec(li.textContent ?? '');
  expect(match).not.toBeNull();
  return Number(match![1]);
}
