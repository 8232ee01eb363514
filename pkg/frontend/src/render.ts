/**
 * Electrode grid shading.  The display is a stand-in for skin
 * stimulation: byte 0 is off (dark), byte 255 full brightness, and the
 * map in between is strictly order-preserving so stronger stimulus
 * always looks stronger.
 */

import { ELECTRODE_COLS, ELECTRODE_ROWS } from './protocol.js';

/** Intensity byte -> CSS color; monotone in the byte value. */
export function intensityColor(byte: number): string {
  const v = Math.min(255, Math.max(0, Math.round(byte)));
  if (v === 0) return 'rgb(24,26,32)';
  // off-state floor then a linear amber ramp: distinguishable at 1,
  // saturated at 255
  const level = 64 + Math.round((v / 255) * 191);
  return `rgb(${level},${Math.round(level * 0.72)},40)`;
}

/** Render a 5x4 grid of intensity bytes into a container's cells. */
export function paintGrid(container: HTMLElement, bytes: number[]): void {
  const cells = container.children;
  for (let i = 0; i < ELECTRODE_ROWS * ELECTRODE_COLS && i < cells.length; i++) {
    (cells[i] as HTMLElement).style.background = intensityColor(bytes[i] ?? 0);
  }
}

export function makeGrid(container: HTMLElement): void {
  container.innerHTML = '';
  for (let i = 0; i < ELECTRODE_ROWS * ELECTRODE_COLS; i++) {
    const cell = document.createElement('div');
    cell.className = 'cell';
    container.appendChild(cell);
  }
}

/** Tiny inline sparkline of latency samples as an SVG polyline. */
export function sparklinePoints(samples: number[], width = 120, height = 24,
                                ceilMs = 16.67): string {
  if (samples.length === 0) return '';
  const n = samples.length;
  return samples.map((v, i) => {
    const x = n === 1 ? 0 : (i / (n - 1)) * width;
    const y = height - Math.min(1, v / ceilMs) * height;
    return `${x.toFixed(1)},${y.toFixed(1)}`;
  }).join(' ');
}
