// Particle cloud: one marker per particle, area proportional to weight,
// colored by the sense assigned to the focused label.  The marker model
// is pure so it can be tested without a canvas.

import type { Particle2D, SnapshotParticle } from "./api.js";

const PALETTE = [
  "#4a90d9", "#d9534a", "#5cb85c", "#d4a017", "#9b59b6",
  "#1abc9c", "#e67e22", "#7f8c8d",
];

export interface Marker {
  x: number;
  y: number;
  radius: number;
  senseId: string | null;
  color: string;
}

export function colorFor(senseId: string | null, order: string[]): string {
  if (senseId === null) return "#cccccc";
  const idx = order.indexOf(senseId);
  return PALETTE[(idx >= 0 ? idx : order.length) % PALETTE.length]!;
}

export function markerModel(
  points: Particle2D[],
  particles: SnapshotParticle[],
  focusLabel: string,
  maxRadius = 12,
): Marker[] {
  const peak = Math.max(...points.map((p) => p.weight), 0);
  const order = [
    ...new Set(
      particles
        .map((p) => p.assignments[focusLabel])
        .filter((s): s is string => s !== undefined),
    ),
  ].sort();
  return points.map((pt, i) => {
    const senseId = particles[i]?.assignments[focusLabel] ?? null;
    // area tracks weight, so radius goes with the square root
    const radius = peak > 0 ? maxRadius * Math.sqrt(pt.weight / peak) : maxRadius;
    return { x: pt.x, y: pt.y, radius, senseId, color: colorFor(senseId, order) };
  });
}

export function renderScatter(canvas: HTMLCanvasElement, markers: Marker[]) {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (markers.length === 0) return;

  const xs = markers.map((m) => m.x);
  const ys = markers.map((m) => m.y);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const pad = 20;
  const sx = (x: number) =>
    pad + ((x - x0) / (x1 - x0 || 1)) * (canvas.width - 2 * pad);
  const sy = (y: number) =>
    pad + ((y - y0) / (y1 - y0 || 1)) * (canvas.height - 2 * pad);

  for (const m of markers) {
    ctx.beginPath();
    ctx.arc(sx(m.x), sy(m.y), Math.max(m.radius, 1.5), 0, 2 * Math.PI);
    ctx.fillStyle = m.color;
    ctx.globalAlpha = 0.75;
    ctx.fill();
  }
  ctx.globalAlpha = 1.0;
}
