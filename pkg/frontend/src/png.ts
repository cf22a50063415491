/** Minimal 8-bit grayscale PNG codec (stored deflate blocks, filter 0).
 *
 * Mask payloads must byte-match across environments, so the encoder avoids
 * canvas.toDataURL (whose compression varies by browser).  The decoder only
 * accepts this encoder's subset; server-produced images are decoded by the
 * browser itself.
 */

const SIGNATURE = [137, 80, 78, 71, 13, 10, 26, 10];

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(bytes: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (let i = 0; i < bytes.length; i++) {
    a = (a + bytes[i]) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

function u32be(v: number): Uint8Array {
  return new Uint8Array([(v >>> 24) & 0xff, (v >>> 16) & 0xff, (v >>> 8) & 0xff, v & 0xff]);
}

function chunk(type: string, data: Uint8Array): Uint8Array {
  const typeBytes = new TextEncoder().encode(type);
  const body = new Uint8Array(typeBytes.length + data.length);
  body.set(typeBytes);
  body.set(data, typeBytes.length);
  const out = new Uint8Array(4 + body.length + 4);
  out.set(u32be(data.length));
  out.set(body, 4);
  out.set(u32be(crc32(body)), 4 + body.length);
  return out;
}

function zlibStored(raw: Uint8Array): Uint8Array {
  const blocks: Uint8Array[] = [new Uint8Array([0x78, 0x01])];
  const max = 65535;
  for (let off = 0; off < raw.length || off === 0; off += max) {
    const part = raw.subarray(off, Math.min(off + max, raw.length));
    const final = off + max >= raw.length ? 1 : 0;
    const header = new Uint8Array(5);
    header[0] = final;
    header[1] = part.length & 0xff;
    header[2] = (part.length >>> 8) & 0xff;
    header[3] = ~part.length & 0xff;
    header[4] = (~part.length >>> 8) & 0xff;
    blocks.push(header, part);
    if (final) break;
  }
  blocks.push(u32be(adler32(raw)));
  const total = blocks.reduce((n, b) => n + b.length, 0);
  const out = new Uint8Array(total);
  let pos = 0;
  for (const b of blocks) {
    out.set(b, pos);
    pos += b.length;
  }
  return out;
}

/** Gray values in [0, 1], row-major -> PNG bytes. */
export function encodeGrayPng(values: Float32Array | number[], width: number, height: number): Uint8Array {
  if (values.length !== width * height) {
    throw new Error(`expected ${width * height} values, got ${values.length}`);
  }
  const raw = new Uint8Array(height * (width + 1));
  for (let y = 0; y < height; y++) {
    const row = y * (width + 1);
    raw[row] = 0; // filter: none
    for (let x = 0; x < width; x++) {
      const v = Math.max(0, Math.min(1, Number(values[y * width + x])));
      raw[row + 1 + x] = Math.round(v * 255);
    }
  }
  const ihdr = new Uint8Array(13);
  ihdr.set(u32be(width));
  ihdr.set(u32be(height), 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 0; // grayscale
  const pieces = [
    new Uint8Array(SIGNATURE),
    chunk("IHDR", ihdr),
    chunk("IDAT", zlibStored(raw)),
    chunk("IEND", new Uint8Array(0)),
  ];
  const out = new Uint8Array(pieces.reduce((n, p) => n + p.length, 0));
  let pos = 0;
  for (const p of pieces) {
    out.set(p, pos);
    pos += p.length;
  }
  return out;
}

export interface GrayImage {
  width: number;
  height: number;
  /** weights in [0, 1] = byte value / 255, the service convention */
  values: Float32Array;
}

/** Strict-subset decoder for encodeGrayPng output. */
export function decodeGrayPng(bytes: Uint8Array): GrayImage {
  for (let i = 0; i < SIGNATURE.length; i++) {
    if (bytes[i] !== SIGNATURE[i]) throw new Error("not a PNG");
  }
  let pos = 8;
  let width = 0;
  let height = 0;
  const idat: Uint8Array[] = [];
  while (pos < bytes.length) {
    const len = (bytes[pos] << 24) | (bytes[pos + 1] << 16) | (bytes[pos + 2] << 8) | bytes[pos + 3];
    const type = new TextDecoder().decode(bytes.subarray(pos + 4, pos + 8));
    const data = bytes.subarray(pos + 8, pos + 8 + len);
    if (type === "IHDR") {
      width = (data[0] << 24) | (data[1] << 16) | (data[2] << 8) | data[3];
      height = (data[4] << 24) | (data[5] << 16) | (data[6] << 8) | data[7];
      if (data[8] !== 8 || data[9] !== 0) {
        throw new Error("decoder supports 8-bit grayscale only");
      }
    } else if (type === "IDAT") {
      idat.push(data);
    } else if (type === "IEND") {
      break;
    }
    pos += 8 + len + 4;
  }
  const z = new Uint8Array(idat.reduce((n, d) => n + d.length, 0));
  let zp = 0;
  for (const d of idat) {
    z.set(d, zp);
    zp += d.length;
  }
  // zlib with stored blocks only
  if ((z[0] & 0x0f) !== 8) throw new Error("unsupported compression method");
  let p = 2;
  const raw = new Uint8Array(height * (width + 1));
  let rp = 0;
  for (;;) {
    const final = z[p] & 1;
    const btype = (z[p] >> 1) & 3;
    if (btype !== 0) throw new Error("decoder supports stored deflate blocks only");
    const len = z[p + 1] | (z[p + 2] << 8);
    raw.set(z.subarray(p + 5, p + 5 + len), rp);
    rp += len;
    p += 5 + len;
    if (final) break;
  }
  const values = new Float32Array(width * height);
  for (let y = 0; y < height; y++) {
    const row = y * (width + 1);
    if (raw[row] !== 0) throw new Error("decoder supports filter 0 only");
    for (let x = 0; x < width; x++) {
      values[y * width + x] = raw[row + 1 + x] / 255;
    }
  }
  return { width, height, values };
}

const B64_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

export function bytesToB64(bytes: Uint8Array): string {
  let out = "";
  for (let i = 0; i < bytes.length; i += 3) {
    const a = bytes[i];
    const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out += B64_ALPHABET[a >> 2];
    out += B64_ALPHABET[((a & 3) << 4) | (b >> 4)];
    out += i + 1 < bytes.length ? B64_ALPHABET[((b & 15) << 2) | (c >> 6)] : "=";
    out += i + 2 < bytes.length ? B64_ALPHABET[c & 63] : "=";
  }
  return out;
}

export function b64ToBytes(text: string): Uint8Array {
  const clean = text.replace(/=+$/, "");
  const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
  let buffer = 0;
  let bits = 0;
  let pos = 0;
  for (const ch of clean) {
    const v = B64_ALPHABET.indexOf(ch);
    if (v < 0) throw new Error(`invalid base64 character ${ch}`);
    buffer = (buffer << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out[pos++] = (buffer >> bits) & 0xff;
    }
  }
  return out;
}
