/** Deterministic scripted editor state shared by the golden-fixture tests. */

import { createMask, MaskLayer } from "../src/mask.js";
import { bytesToB64, encodeGrayPng } from "../src/png.js";
import { EditorState, initialState } from "../src/state.js";

export function gradientPhotoB64(size = 64): string {
  const values = new Float32Array(size * size);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      values[y * size + x] = (x + y) / (2 * (size - 1));
    }
  }
  return bytesToB64(encodeGrayPng(values, size, size));
}

export function rightHalfMask(name: string, size = 64): MaskLayer {
  const mask = createMask(name, size, size);
  for (let y = 0; y < size; y++) {
    for (let x = size / 2; x < size; x++) {
      mask.data[y * size + x] = 1;
    }
  }
  return mask;
}

export function scriptedState(): EditorState {
  const state = initialState();
  state.photoPngB64 = gradientPhotoB64(64);
  state.photoWidth = 64;
  state.photoHeight = 64;
  state.style = "inku";
  state.mode = "preserve";
  state.globalLevels = { alphaS: 2.5, alphaA: 3.0 };
  state.maskLayers = [rightHalfMask("mask-1", 64)];
  state.regionSettings = [{ maskName: "mask-1", levels: { alphaS: 4.0, alphaA: 2.0 } }];
  state.colorEdits = [
    { maskName: "mask-1", targetRgb: "#cc6633" },
    { maskName: null, hsv: { h: 0.1, s: 1.1, v: 1.0 } },
  ];
  return state;
}
