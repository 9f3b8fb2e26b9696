/**
 * 2D boundary scatter
 *
 * Pure geometry plus a small SVG renderer: dataset points colored by class,
 * the sampled boundary points, the query, the counterfactual with its
 * connecting segment, and the delta box when sliders are active. Only
 * defined for 2-feature datasets; the page hides the panel otherwise.
 */

import type { DeltaBox } from './constraints';

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export const DEFAULT_VIEWPORT: Viewport = { width: 420, height: 320, margin: 24 };

export interface PixelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface ScatterScene {
  viewport: Viewport;
  class0: [number, number][];
  class1: [number, number][];
  boundary: [number, number][];
  query: [number, number] | null;
  counterfactual: [number, number] | null;
  box: PixelRect | null;
}

export interface SceneInput {
  bounds: [number, number][];
  points: number[][];
  labels: number[];
  boundaryPoints: number[][];
  query: number[] | null;
  counterfactual: number[] | null;
  box: DeltaBox | null;
  viewport?: Viewport;
}

/** Data -> pixel mapping over the dataset bounds; screen y grows downward. */
export function makeProjection(
  bounds: [number, number][],
  viewport: Viewport,
): (p: number[]) => [number, number] {
  const [xLo, xHi] = bounds[0];
  const [yLo, yHi] = bounds[1];
  const xSpan = xHi - xLo || 1;
  const ySpan = yHi - yLo || 1;
  const innerW = viewport.width - 2 * viewport.margin;
  const innerH = viewport.height - 2 * viewport.margin;
  return (p) => [
    viewport.margin + ((p[0] - xLo) / xSpan) * innerW,
    viewport.height - viewport.margin - ((p[1] - yLo) / ySpan) * innerH,
  ];
}

export function buildScene(input: SceneInput): ScatterScene {
  if (input.bounds.length !== 2) {
    throw new Error('scatter is only defined for 2-feature datasets');
  }
  const viewport = input.viewport ?? DEFAULT_VIEWPORT;
  const project = makeProjection(input.bounds, viewport);
  const class0: [number, number][] = [];
  const class1: [number, number][] = [];
  input.points.forEach((p, i) => {
    (input.labels[i] === 0 ? class0 : class1).push(project(p));
  });
  let box: PixelRect | null = null;
  if (input.box !== null) {
    const [x0, y0] = project([input.box.lo[0], input.box.hi[1]]);
    const [x1, y1] = project([input.box.hi[0], input.box.lo[1]]);
    box = { x: x0, y: y0, width: x1 - x0, height: y1 - y0 };
  }
  return {
    viewport,
    class0,
    class1,
    boundary: input.boundaryPoints.map(project),
    query: input.query ? project(input.query) : null,
    counterfactual: input.counterfactual ? project(input.counterfactual) : null,
    box,
  };
}

const SVG_NS = 'http://www.w3.org/2000/svg';

function circle(cx: number, cy: number, r: number, className: string): SVGElement {
  const el = document.createElementNS(SVG_NS, 'circle');
  el.setAttribute('cx', String(cx));
  el.setAttribute('cy', String(cy));
  el.setAttribute('r', String(r));
  el.setAttribute('class', className);
  return el;
}

export function renderScatter(svg: SVGElement, scene: ScatterScene): void {
  svg.setAttribute('viewBox', `0 0 ${scene.viewport.width} ${scene.viewport.height}`);
  svg.replaceChildren();
  if (scene.box !== null) {
    const rect = document.createElementNS(SVG_NS, 'rect');
    rect.setAttribute('x', String(scene.box.x));
    rect.setAttribute('y', String(scene.box.y));
    rect.setAttribute('width', String(scene.box.width));
    rect.setAttribute('height', String(scene.box.height));
    rect.setAttribute('class', 'constraint-box');
    svg.append(rect);
  }
  for (const [x, y] of scene.class0) {
    svg.append(circle(x, y, 3, 'class0'));
  }
  for (const [x, y] of scene.class1) {
    svg.append(circle(x, y, 3, 'class1'));
  }
  for (const [x, y] of scene.boundary) {
    svg.append(circle(x, y, 1.5, 'boundary'));
  }
  if (scene.query !== null && scene.counterfactual !== null) {
    const line = document.createElementNS(SVG_NS, 'line');
    line.setAttribute('x1', String(scene.query[0]));
    line.setAttribute('y1', String(scene.query[1]));
    line.setAttribute('x2', String(scene.counterfactual[0]));
    line.setAttribute('y2', String(scene.counterfactual[1]));
    line.setAttribute('class', 'cfe-segment');
    svg.append(line);
  }
  if (scene.query !== null) {
    svg.append(circle(scene.query[0], scene.query[1], 5, 'query'));
  }
  if (scene.counterfactual !== null) {
    svg.append(circle(scene.counterfactual[0], scene.counterfactual[1], 5, 'cfe'));
  }
}
