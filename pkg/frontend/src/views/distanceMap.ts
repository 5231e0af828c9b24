/**
 * Inter-topic distance map: one circle per topic, position from the
 * server's 2-d embedding of pairwise topic distances, area scaled by
 * topic weight. Larger gaps between circles indicate better-separated
 * topics.
 */
import type { MapPoint } from '../api/types.js';
import { clear, el, svgEl } from './dom.js';

export interface PlacedCircle {
  topic: number;
  weight: number;
  cx: number;
  cy: number;
  r: number;
}

export interface MapLayoutOptions {
  width?: number;
  height?: number;
  rMin?: number;
  rMax?: number;
}

/**
 * Scale map coordinates into a viewport and weights into radii.
 *
 * Radius grows with the square root of the weight (equal-area scaling),
 * which keeps the radius ordering identical to the weight ordering.
 */
export function layoutMap(points: MapPoint[], options: MapLayoutOptions = {}): PlacedCircle[] {
  const width = options.width ?? 360;
  const height = options.height ?? 300;
  const rMin = options.rMin ?? 6;
  const rMax = options.rMax ?? 40;
  if (points.length === 0) return [];

  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const spanX = Math.max(...xs) - Math.min(...xs) || 1;
  const spanY = Math.max(...ys) - Math.min(...ys) || 1;
  const maxWeight = Math.max(...points.map((p) => p.weight)) || 1;
  const pad = rMax + 4;

  return points.map((p) => ({
    topic: p.topic,
    weight: p.weight,
    cx: pad + ((p.x - Math.min(...xs)) / spanX) * (width - 2 * pad),
    cy: pad + ((p.y - Math.min(...ys)) / spanY) * (height - 2 * pad),
    r: rMin + (rMax - rMin) * Math.sqrt(p.weight / maxWeight),
  }));
}

export class DistanceMapView {
  private readonly width = 360;
  private readonly height = 300;

  constructor(
    private readonly root: HTMLElement,
    private readonly onSelect: (topic: number) => void,
  ) {
    this.root.classList.add('distance-map');
  }

  render(points: MapPoint[], selected: number | null): void {
    clear(this.root);
    this.root.append(el('h3', { text: 'Inter-topic distance map' }));
    if (points.length === 0) {
      this.root.append(el('p', { className: 'placeholder', text: 'no topics to map' }));
      return;
    }

    const svg = svgEl('svg', {
      class: 'map-canvas',
      viewBox: `0 0 ${this.width} ${this.height}`,
      width: String(this.width),
      height: String(this.height),
    });
    for (const circle of layoutMap(points, { width: this.width, height: this.height })) {
      const group = svgEl('g', { class: 'map-topic', 'data-topic': String(circle.topic) });
      const dot = svgEl('circle', {
        cx: circle.cx.toFixed(1),
        cy: circle.cy.toFixed(1),
        r: circle.r.toFixed(1),
        class: circle.topic === selected ? 'map-circle selected' : 'map-circle',
      });
      const tip = svgEl('title');
      tip.textContent = `topic ${circle.topic}: weight ${circle.weight.toFixed(3)}`;
      dot.append(tip);
      const label = svgEl('text', {
        x: circle.cx.toFixed(1),
        y: (circle.cy + 4).toFixed(1),
        class: 'map-label',
        'text-anchor': 'middle',
      });
      label.textContent = String(circle.topic);
      group.append(dot, label);
      group.addEventListener('click', () => this.onSelect(circle.topic));
      svg.append(group);
    }
    this.root.append(svg);

    const total = points.reduce((acc, p) => acc + p.weight, 0);
    this.root.append(
      el('p', {
        className: 'map-total',
        text: `${points.length} topics, weights sum ${total.toFixed(2)}`,
      }),
    );
  }
}
