/** Soft mask layers and the selection tools that edit them.
 *
 * Masks hold weights in [0, 1] at photo resolution.  The exported PNG uses
 * the service convention: 8-bit grayscale, value/255 = weight.
 */

import { deltaE, rgbToLab } from "./color.js";
import { bytesToB64, encodeGrayPng } from "./png.js";

export const QUICK_SELECT_DELTA_E = 12;

export interface MaskLayer {
  name: string;
  width: number;
  height: number;
  data: Float32Array;
}

export function createMask(name: string, width: number, height: number): MaskLayer {
  return { name, width, height, data: new Float32Array(width * height) };
}

/** Soft circular brush stamp; hardness 1 = hard edge, 0 = fully feathered. */
export function brushStamp(
  mask: MaskLayer,
  cx: number,
  cy: number,
  radius: number,
  hardness = 0.8,
  strength = 1.0,
  erase = false
): void {
  const r2 = radius * radius;
  const core = Math.max(0, Math.min(1, hardness)) * radius;
  const y0 = Math.max(0, Math.floor(cy - radius));
  const y1 = Math.min(mask.height - 1, Math.ceil(cy + radius));
  const x0 = Math.max(0, Math.floor(cx - radius));
  const x1 = Math.min(mask.width - 1, Math.ceil(cx + radius));
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      if (d2 > r2) continue;
      const d = Math.sqrt(d2);
      const falloff = d <= core ? 1 : 1 - (d - core) / Math.max(radius - core, 1e-6);
      const amount = strength * Math.max(0, Math.min(1, falloff));
      const i = y * mask.width + x;
      mask.data[i] = erase
        ? Math.max(0, mask.data[i] - amount)
        : Math.min(1, mask.data[i] + amount);
    }
  }
}

export function eraserStamp(mask: MaskLayer, cx: number, cy: number, radius: number, hardness = 0.8): void {
  brushStamp(mask, cx, cy, radius, hardness, 1.0, true);
}

/** Flood-fill quick selection: grow from the seed over pixels whose Lab
 * distance to the seed color stays under the threshold. */
export function quickSelect(
  mask: MaskLayer,
  rgba: Uint8ClampedArray,
  seedX: number,
  seedY: number,
  threshold = QUICK_SELECT_DELTA_E
): void {
  const { width, height } = mask;
  if (rgba.length !== width * height * 4) {
    throw new Error("pixel buffer does not match mask dimensions");
  }
  const seedIdx = (seedY * width + seedX) * 4;
  const seedLab = rgbToLab(rgba[seedIdx], rgba[seedIdx + 1], rgba[seedIdx + 2]);
  const visited = new Uint8Array(width * height);
  const queue: number[] = [seedY * width + seedX];
  visited[queue[0]] = 1;
  while (queue.length) {
    const i = queue.pop()!;
    const px = i % width;
    const py = (i / width) | 0;
    const lab = rgbToLab(rgba[i * 4], rgba[i * 4 + 1], rgba[i * 4 + 2]);
    if (deltaE(lab, seedLab) > threshold) continue;
    mask.data[i] = 1;
    if (px > 0 && !visited[i - 1]) {
      visited[i - 1] = 1;
      queue.push(i - 1);
    }
    if (px < width - 1 && !visited[i + 1]) {
      visited[i + 1] = 1;
      queue.push(i + 1);
    }
    if (py > 0 && !visited[i - width]) {
      visited[i - width] = 1;
      queue.push(i - width);
    }
    if (py < height - 1 && !visited[i + width]) {
      visited[i + width] = 1;
      queue.push(i + width);
    }
  }
}

export function maskToPngB64(mask: MaskLayer): string {
  return bytesToB64(encodeGrayPng(mask.data, mask.width, mask.height));
}

export function isEmpty(mask: MaskLayer): boolean {
  return mask.data.every((v) => v === 0);
}
