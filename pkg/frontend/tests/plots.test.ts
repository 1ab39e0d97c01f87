// Geometry of the four diagnostic panels, driven by a clean-exponential
// fixture like the one the service produces for a genuine component.

import { describe, expect, it } from 'vitest';
import {
  eigenvalueBarsSvg,
  extent,
  linearScale,
  modulus,
  overlaySvg,
  phasePortraitSvg,
  polylinePoints,
  realPart,
  seriesChartSvg,
  strideForViewport,
} from '../src/plots.js';
import type { Pair } from '../src/types.js';

function exponentialRow(cycles: number, n: number, amp = 1): Pair[] {
  const z: Pair[] = [];
  for (let k = 0; k < n; k++) {
    const angle = 2 * Math.PI * cycles * k;
    z.push([amp * Math.cos(angle), amp * Math.sin(angle)]);
  }
  return z;
}

function circleRadii(svg: string, cls: string): number[] {
  const out: number[] = [];
  const re = new RegExp(`<circle [^>]*r="([0-9.]+)" class="${cls}"`, 'g');
  for (const match of svg.matchAll(re)) {
    out.push(Number(match[1]));
  }
  return out;
}

describe('scales', () => {
  it('maps a domain linearly onto a range', () => {
    const s = linearScale([0, 10], [100, 200]);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
    expect(s(5)).toBe(150);
  });

  it('extent handles flat and empty input', () => {
    expect(extent([])).toEqual([0, 1]);
    expect(extent([2, 2])).toEqual([1, 3]);
    expect(extent([3, -1, 5])).toEqual([-1, 5]);
  });

  it('polyline points are pair-formatted', () => {
    expect(polylinePoints([1, 2], [3, 4])).toBe('1.00,3.00 2.00,4.00');
  });
});

describe('phase portrait panel', () => {
  const z = exponentialRow(0.04, 120);
  const svg = phasePortraitSvg(z, 1.0, 0.05);

  it('draws mean and one/two sigma band circles', () => {
    expect(circleRadii(svg, 'band-mean')).toHaveLength(1);
    expect(circleRadii(svg, 'band-sigma1')).toHaveLength(2);
    expect(circleRadii(svg, 'band-sigma2')).toHaveLength(2);
  });

  it('keeps every clean-exponential point inside the outer 2-sigma band', () => {
    const outer = Math.max(...circleRadii(svg, 'band-sigma2'));
    const dotRe = /<circle cx="([0-9.-]+)" cy="([0-9.-]+)" r="1.8" class="portrait-dot"/g;
    const matches = [...svg.matchAll(dotRe)];
    expect(matches).toHaveLength(120);
    for (const match of matches) {
      const dx = Number(match[1]) - 160; // panel centre x
      const dy = Number(match[2]) - 127; // panel centre y
      expect(Math.hypot(dx, dy)).toBeLessThanOrEqual(outer + 0.5);
    }
  });

  it('orders the band radii as mean-2s < mean-s < mean < mean+s < mean+2s', () => {
    const mean = circleRadii(svg, 'band-mean')[0];
    const s1 = circleRadii(svg, 'band-sigma1').sort((a, b) => a - b);
    const s2 = circleRadii(svg, 'band-sigma2').sort((a, b) => a - b);
    expect(s2[0]).toBeLessThan(s1[0]);
    expect(s1[0]).toBeLessThan(mean);
    expect(mean).toBeLessThan(s1[1]);
    expect(s1[1]).toBeLessThan(s2[1]);
  });
});

describe('series panels', () => {
  const z = exponentialRow(0.04, 100);

  it('renders modulus, phase, and back-map panels with a polyline each', () => {
    const mods = modulus(z);
    const phase = z.map((_, k) => 2 * Math.PI * 0.04 * k);
    const backmap = realPart(z);
    for (const svg of [
      seriesChartSvg(mods, { title: 'Modulus |Z_k|' }),
      seriesChartSvg(phase, { title: 'Unwrapped phase' }),
      seriesChartSvg(backmap, { title: 'Back-mapped Re f(k)' }),
    ]) {
      expect(svg).toContain('<polyline');
      expect(svg.match(/<polyline/g)).toHaveLength(1);
    }
  });

  it('marks wrap events as vertical lines', () => {
    const svg = seriesChartSvg([0, 1, 2, 3, 9, 10, 11], {
      title: 'phase',
      markers: [4],
    });
    expect(svg.match(/wrap-marker/g)).toHaveLength(1);
  });

  it('drops out-of-range markers', () => {
    const svg = seriesChartSvg([1, 2, 3], { title: 'x', markers: [-1, 99] });
    expect(svg).not.toContain('wrap-marker');
  });
});

describe('summary panels', () => {
  it('splits bars at the threshold', () => {
    const svg = eigenvalueBarsSvg([0.95, 0.85, 0.3], 0.8);
    expect(svg.match(/bar-kept/g)).toHaveLength(2);
    expect(svg.match(/bar-dropped/g)).toHaveLength(1);
    expect(svg).toContain('threshold-line');
  });

  it('overlays two series', () => {
    const svg = overlaySvg([1, 2, 3], [1.1, 1.9, 3.2], 'Source vs recovered');
    expect(svg.match(/<polyline/g)).toHaveLength(2);
  });
});

describe('viewport stride', () => {
  it('keeps small series unsampled and thins large ones', () => {
    expect(strideForViewport(100, 640)).toBe(1);
    expect(strideForViewport(6400, 640)).toBe(10);
    expect(strideForViewport(6401, 640)).toBe(11);
  });
});
