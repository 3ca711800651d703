// Color reproduction per the protocol contract: linear interpolation between
// the advertised stops, clamped at the ends, channels rounded with
// floor(x + 0.5) so server-rendered and client-rendered pixels match bytes.

import type { ColorStop, Colormaps } from "./protocol";

export type RGB = [number, number, number];

export function mapColor(stops: ColorStop[], value: number): RGB {
  if (value <= stops[0][0]) return [...stops[0][1]];
  const last = stops[stops.length - 1];
  if (value >= last[0]) return [...last[1]];
  for (let i = 0; i + 1 < stops.length; i++) {
    const [p0, c0] = stops[i];
    const [p1, c1] = stops[i + 1];
    if (value <= p1) {
      const t = (value - p0) / (p1 - p0);
      return [
        Math.floor(c0[0] + (c1[0] - c0[0]) * t + 0.5),
        Math.floor(c0[1] + (c1[1] - c0[1]) * t + 0.5),
        Math.floor(c0[2] + (c1[2] - c0[2]) * t + 0.5),
      ];
    }
  }
  return [...last[1]];
}

export function highlightStops(kind: string, maps: Colormaps): ColorStop[] {
  return kind === "meditation" ? maps.sequential : maps.diverging;
}

/** Color of one electrode decal: its own value through the policy. */
export function decalColor(
  value: number,
  highlighted: boolean,
  gain: number,
  kind: string,
  maps: Colormaps,
): RGB {
  const stops = highlighted ? highlightStops(kind, maps) : maps.gray;
  return mapColor(stops, gain * value);
}

/**
 * RGBA pixels for the scalp texture. `values` is the streamed field grid (or
 * a nearest-electrode fallback built from electrodeValues when no grid came);
 * `nearest` is the per-pixel electrode index from hello (255 = outside).
 */
export function colorizeGrid(
  values: Float32Array,
  nearest: Uint8Array,
  highlightedElectrodes: boolean[],
  gain: number,
  kind: string,
  maps: Colormaps,
): Uint8ClampedArray {
  const n = nearest.length;
  const out = new Uint8ClampedArray(n * 4);
  const hi = highlightStops(kind, maps);
  for (let i = 0; i < n; i++) {
    const e = nearest[i];
    if (e === 255) continue; // outside the head: transparent
    const stops = highlightedElectrodes[e] ? hi : maps.gray;
    const [r, g, b] = mapColor(stops, gain * values[i]);
    out[i * 4] = r;
    out[i * 4 + 1] = g;
    out[i * 4 + 2] = b;
    out[i * 4 + 3] = 255;
  }
  return out;
}

/** Nearest-electrode fill used when a frame arrives without a grid. */
export function nearestFallbackField(
  electrodeValues: number[],
  nearest: Uint8Array,
): Float32Array {
  const out = new Float32Array(nearest.length);
  for (let i = 0; i < nearest.length; i++) {
    const e = nearest[i];
    if (e !== 255) out[i] = electrodeValues[e];
  }
  return out;
}
