/** Editor state and its serialization into a stylize request.
 *
 * serializeRequest is the single place requests are built: every
 * request-relevant field comes from visible state, and equal states produce
 * byte-identical JSON (fixed key order, deterministic mask encoding).
 */

import { MaskLayer, isEmpty, maskToPngB64 } from "./mask.js";
import type { StylizeRequest, WireColorEdit, WireRegion } from "./types.js";

export interface TextureLevels {
  alphaS: number;
  alphaA: number;
}

export interface RegionSetting {
  maskName: string;
  levels: TextureLevels;
}

export interface ColorEditSetting {
  /** null = no active mask; the edit applies to the full image */
  maskName: string | null;
  targetRgb?: string;
  hsv?: { h: number; s: number; v: number };
}

export interface EditorState {
  photoPngB64: string | null;
  photoWidth: number;
  photoHeight: number;
  style: string;
  mode: "preserve" | "target";
  globalLevels: TextureLevels;
  alphaRange: [number, number];
  maskLayers: MaskLayer[];
  regionSettings: RegionSetting[];
  colorEdits: ColorEditSetting[];
}

export function initialState(): EditorState {
  return {
    photoPngB64: null,
    photoWidth: 0,
    photoHeight: 0,
    style: "",
    mode: "preserve",
    globalLevels: { alphaS: 1.0, alphaA: 1.0 },
    alphaRange: [1, 5],
    maskLayers: [],
    regionSettings: [],
    colorEdits: [],
  };
}

export function clampLevels(levels: TextureLevels, range: [number, number]): {
  levels: TextureLevels;
  clamped: boolean;
} {
  const clamp = (v: number) => Math.min(range[1], Math.max(range[0], v));
  const out = { alphaS: clamp(levels.alphaS), alphaA: clamp(levels.alphaA) };
  return { levels: out, clamped: out.alphaS !== levels.alphaS || out.alphaA !== levels.alphaA };
}

export function findMask(state: EditorState, name: string): MaskLayer {
  const mask = state.maskLayers.find((m) => m.name === name);
  if (!mask) throw new Error(`no mask layer named ${name}`);
  return mask;
}

/** Build the outgoing request from visible editor state. */
export function serializeRequest(state: EditorState): StylizeRequest {
  if (!state.photoPngB64) throw new Error("no photo loaded");
  if (!state.style) throw new Error("no style selected");

  const regions: WireRegion[] = [];
  for (const setting of state.regionSettings) {
    const mask = findMask(state, setting.maskName);
    if (isEmpty(mask)) continue;
    regions.push({
      mask: maskToPngB64(mask),
      alpha_s: setting.levels.alphaS,
      alpha_a: setting.levels.alphaA,
    });
  }

  const colorEdits: WireColorEdit[] = state.colorEdits.map((edit) => {
    const wire: WireColorEdit = {
      mask: edit.maskName === null ? null : maskToPngB64(findMask(state, edit.maskName)),
    };
    if (edit.targetRgb !== undefined) wire.target_rgb = edit.targetRgb;
    if (edit.hsv !== undefined) wire.hsv = { h: edit.hsv.h, s: edit.hsv.s, v: edit.hsv.v };
    return wire;
  });

  return {
    image: state.photoPngB64,
    alpha_s: state.globalLevels.alphaS,
    alpha_a: state.globalLevels.alphaA,
    regions: regions.length ? regions : null,
    color_edits: colorEdits,
    mode: state.mode,
    style: state.style,
  };
}

export function serializeRequestJson(state: EditorState): string {
  return JSON.stringify(serializeRequest(state));
}

/** Ring of the last N results for the before/after history strip. */
export class ResultHistory {
  private items: { image: string; label: string }[] = [];

  constructor(readonly capacity = 8) {}

  push(image: string, label: string): void {
    this.items.push({ image, label });
    if (this.items.length > this.capacity) {
      this.items.shift();
    }
  }

  get length(): number {
    return this.items.length;
  }

  at(index: number): { image: string; label: string } {
    if (index < 0 || index >= this.items.length) throw new Error("history index out of range");
    return this.items[index];
  }

  latest(): { image: string; label: string } | null {
    return this.items.length ? this.items[this.items.length - 1] : null;
  }
}
