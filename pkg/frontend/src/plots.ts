// Pure SVG builders for the inspector panels.  No DOM access here: every
// function maps data to an SVG string, which keeps the geometry testable.

import type { Pair } from './types.js';

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  return fn;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function attrs(pairs: Record<string, string | number>): string {
  return Object.entries(pairs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(' ');
}

export function polylinePoints(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${xs[i].toFixed(2)},${ys[i].toFixed(2)}`);
  }
  return parts.join(' ');
}

const PANEL = { width: 320, height: 240, pad: 28 };

function frame(title: string, body: string): string {
  const { width, height } = PANEL;
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `class="panel-svg" role="img">` +
    `<text x="${width / 2}" y="14" class="panel-title" text-anchor="middle">${title}</text>` +
    body +
    `</svg>`
  );
}

/** Fig-4a style: scatter of (Re Z, Im Z) with the mean-modulus circle and
 * one/two standard-deviation bands (dashed/dotted). */
export function phasePortraitSvg(z: Pair[], modMean: number, modStd: number): string {
  const { width, height, pad } = PANEL;
  const r2max = modMean + 2 * modStd;
  const reach = Math.max(r2max, ...z.map(([re, im]) => Math.hypot(re, im))) || 1;
  const cx = width / 2;
  const cy = (height + 14) / 2;
  const unit = (Math.min(width, height - 14) / 2 - pad / 2) / reach;
  const circle = (radius: number, cls: string) =>
    radius > 0
      ? `<circle ${attrs({ cx, cy, r: (radius * unit).toFixed(2), class: cls })}/>`
      : '';
  const dots = z
    .map(
      ([re, im]) =>
        `<circle ${attrs({
          cx: (cx + re * unit).toFixed(2),
          cy: (cy - im * unit).toFixed(2),
          r: 1.8,
          class: 'portrait-dot',
        })}/>`,
    )
    .join('');
  const bands =
    circle(modMean, 'band-mean') +
    circle(modMean - modStd, 'band-sigma1') +
    circle(modMean + modStd, 'band-sigma1') +
    circle(modMean - 2 * modStd, 'band-sigma2') +
    circle(modMean + 2 * modStd, 'band-sigma2');
  return frame('Phase portrait', bands + dots);
}

interface SeriesOptions {
  title: string;
  markers?: number[];
  cssClass?: string;
}

/** Line chart of a sampled quantity vs index, with optional event markers. */
export function seriesChartSvg(values: number[], options: SeriesOptions): string {
  const { width, height, pad } = PANEL;
  const x = linearScale([0, Math.max(values.length - 1, 1)], [pad, width - 8]);
  const y = linearScale(extent(values), [height - pad, 22]);
  const xs = values.map((_, i) => x(i));
  const ys = values.map((v) => y(v));
  const markers = (options.markers ?? [])
    .filter((k) => k >= 0 && k < values.length)
    .map(
      (k) =>
        `<line ${attrs({
          x1: x(k).toFixed(2),
          x2: x(k).toFixed(2),
          y1: 22,
          y2: height - pad,
          class: 'wrap-marker',
        })}/>`,
    )
    .join('');
  const axis =
    `<line ${attrs({ x1: pad, y1: height - pad, x2: width - 8, y2: height - pad, class: 'axis' })}/>` +
    `<line ${attrs({ x1: pad, y1: 22, x2: pad, y2: height - pad, class: 'axis' })}/>`;
  const line = `<polyline ${attrs({
    points: polylinePoints(xs, ys),
    class: options.cssClass ?? 'series-line',
    fill: 'none',
  })}/>`;
  return frame(options.title, axis + markers + line);
}

/** Bar chart of eigenvalue moduli with the threshold line. */
export function eigenvalueBarsSvg(moduli: number[], lambdaC: number): string {
  const { width, height, pad } = PANEL;
  const x = linearScale([0, Math.max(moduli.length, 1)], [pad, width - 8]);
  const top = Math.max(1.05, ...moduli);
  const y = linearScale([0, top], [height - pad, 22]);
  const barWidth = Math.max(2, (width - pad - 8) / Math.max(moduli.length, 1) - 3);
  const bars = moduli
    .map(
      (v, i) =>
        `<rect ${attrs({
          x: x(i).toFixed(2),
          y: y(v).toFixed(2),
          width: barWidth.toFixed(2),
          height: (y(0) - y(v)).toFixed(2),
          class: v >= lambdaC ? 'bar-kept' : 'bar-dropped',
        })}/>`,
    )
    .join('');
  const cut = `<line ${attrs({
    x1: pad,
    x2: width - 8,
    y1: y(lambdaC).toFixed(2),
    y2: y(lambdaC).toFixed(2),
    class: 'threshold-line',
  })}/>`;
  return frame('Eigenvalue moduli', bars + cut);
}

/** Two aligned real series (e.g. source vs recovered signal). */
export function overlaySvg(a: number[], b: number[], title: string): string {
  const { width, height, pad } = PANEL;
  const n = Math.max(a.length, b.length);
  const x = linearScale([0, Math.max(n - 1, 1)], [pad, width - 8]);
  const y = linearScale(extent([...a, ...b]), [height - pad, 22]);
  const line = (vals: number[], cls: string) =>
    `<polyline ${attrs({
      points: polylinePoints(
        vals.map((_, i) => x(i)),
        vals.map((v) => y(v)),
      ),
      class: cls,
      fill: 'none',
    })}/>`;
  return frame(title, line(a, 'overlay-a') + line(b, 'overlay-b'));
}

export function realPart(pairs: Pair[]): number[] {
  return pairs.map(([re]) => re);
}

export function modulus(pairs: Pair[]): number[] {
  return pairs.map(([re, im]) => Math.hypot(re, im));
}

/** Stride so that at most maxPoints samples are fetched for a viewport. */
export function strideForViewport(totalPoints: number, maxPoints: number): number {
  if (maxPoints <= 0) return 1;
  return Math.max(1, Math.ceil(totalPoints / maxPoints));
}
