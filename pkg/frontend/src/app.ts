/** Browser shell: canvas mask painting, control panel, result loop. */

import { ApiClient, ApiHttpError } from "./api.js";
import { formatHex } from "./color.js";
import { MaskLayer, brushStamp, createMask, eraserStamp, isEmpty, quickSelect } from "./mask.js";
import {
  EditorState,
  ResultHistory,
  clampLevels,
  initialState,
  serializeRequest,
} from "./state.js";
import { bytesToB64 } from "./png.js";
import type { StyleInfo } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

type Tool = "brush" | "quick" | "eraser";

class Editor {
  state: EditorState = initialState();
  history = new ResultHistory(8);
  client = new ApiClient(localStorage.getItem("duotoon.server") ?? "http://127.0.0.1:8421");
  tool: Tool = "brush";
  brushRadius = 12;
  brushHardness = 0.8;
  activeMask: MaskLayer | null = null;
  photoPixels: Uint8ClampedArray | null = null;
  styles: StyleInfo[] = [];

  photoCanvas = $("photo-canvas") as HTMLCanvasElement;
  maskCanvas = $("mask-canvas") as HTMLCanvasElement;
  resultImg = $("result-img") as HTMLImageElement;
  statusEl = $("status");
  rangeHint = $("range-hint");

  async init(): Promise<void> {
    try {
      this.styles = await this.client.styles();
    } catch (err) {
      this.setStatus(`cannot reach server: ${err}`);
      this.styles = [];
    }
    const dropdown = $("style-select") as HTMLSelectElement;
    dropdown.innerHTML = "";
    for (const style of this.styles) {
      const opt = document.createElement("option");
      opt.value = style.id;
      opt.textContent = `${style.name} (${style.modes.join("/")})`;
      dropdown.appendChild(opt);
    }
    if (this.styles.length) {
      await this.selectStyle(this.styles[0].id);
    }
    this.wireEvents();
  }

  async selectStyle(id: string): Promise<void> {
    try {
      this.styles = await this.client.styles(); // re-read advertised ranges
    } catch {
      /* keep the cached list when the server is briefly unreachable */
    }
    const style = this.styles.find((s) => s.id === id);
    if (!style) return;
    this.state.style = id;
    this.state.alphaRange = style.alpha_range;
    const sliderS = $("alpha-s") as HTMLInputElement;
    const sliderA = $("alpha-a") as HTMLInputElement;
    for (const slider of [sliderS, sliderA]) {
      slider.min = String(style.alpha_range[0]);
      slider.max = String(style.alpha_range[1]);
    }
    this.rangeHint.textContent = "";
  }

  setStatus(text: string): void {
    this.statusEl.textContent = text;
  }

  loadPhoto(file: File): void {
    const url = URL.createObjectURL(file);
    const img = new Image();
    img.onload = () => {
      const ctx = this.photoCanvas.getContext("2d")!;
      this.photoCanvas.width = img.width;
      this.photoCanvas.height = img.height;
      this.maskCanvas.width = img.width;
      this.maskCanvas.height = img.height;
      ctx.drawImage(img, 0, 0);
      const rgba = ctx.getImageData(0, 0, img.width, img.height);
      this.photoPixels = rgba.data;
      this.photoCanvas.toBlob(async (blob) => {
        const bytes = new Uint8Array(await blob!.arrayBuffer());
        this.state.photoPngB64 = bytesToB64(bytes);
        this.state.photoWidth = img.width;
        this.state.photoHeight = img.height;
        this.setStatus(`loaded ${img.width}x${img.height}`);
      }, "image/png");
      this.state.maskLayers = [];
      this.state.regionSettings = [];
      this.state.colorEdits = [];
      this.activeMask = null;
      URL.revokeObjectURL(url);
    };
    img.src = url;
  }

  ensureActiveMask(): MaskLayer {
    if (!this.activeMask) {
      const mask = createMask(`mask-${this.state.maskLayers.length + 1}`, this.state.photoWidth, this.state.photoHeight);
      this.state.maskLayers.push(mask);
      this.activeMask = mask;
      this.refreshMaskList();
    }
    return this.activeMask;
  }

  paintAt(x: number, y: number): void {
    if (!this.state.photoWidth) return;
    const mask = this.ensureActiveMask();
    if (this.tool === "brush") {
      brushStamp(mask, x, y, this.brushRadius, this.brushHardness);
    } else if (this.tool === "eraser") {
      eraserStamp(mask, x, y, this.brushRadius, this.brushHardness);
    } else if (this.tool === "quick" && this.photoPixels) {
      quickSelect(mask, this.photoPixels, Math.round(x), Math.round(y));
    }
    this.drawMaskOverlay();
  }

  drawMaskOverlay(): void {
    if (!this.activeMask) return;
    const { width, height, data } = this.activeMask;
    const ctx = this.maskCanvas.getContext("2d")!;
    const overlay = ctx.createImageData(width, height);
    for (let i = 0; i < data.length; i++) {
      overlay.data[i * 4] = 64;
      overlay.data[i * 4 + 1] = 160;
      overlay.data[i * 4 + 2] = 255;
      overlay.data[i * 4 + 3] = Math.round(data[i] * 160);
    }
    ctx.putImageData(overlay, 0, 0);
  }

  refreshMaskList(): void {
    const list = $("mask-list");
    list.innerHTML = "";
    for (const mask of this.state.maskLayers) {
      const item = document.createElement("li");
      item.textContent = `${mask.name}${mask === this.activeMask ? " (active)" : ""}`;
      item.onclick = () => {
        this.activeMask = mask;
        this.refreshMaskList();
        this.drawMaskOverlay();
      };
      list.appendChild(item);
    }
  }

  readLevels(): void {
    const raw = {
      alphaS: Number(($("alpha-s") as HTMLInputElement).value),
      alphaA: Number(($("alpha-a") as HTMLInputElement).value),
    };
    const { levels, clamped } = clampLevels(raw, this.state.alphaRange);
    this.rangeHint.textContent = clamped
      ? `levels clamped to [${this.state.alphaRange[0]}, ${this.state.alphaRange[1]}]`
      : "";
    if (this.activeMask && !isEmpty(this.activeMask)) {
      const name = this.activeMask.name;
      const existing = this.state.regionSettings.find((r) => r.maskName === name);
      if (existing) {
        existing.levels = levels;
      } else {
        this.state.regionSettings.push({ maskName: name, levels });
      }
    } else {
      this.state.globalLevels = levels;
    }
  }

  pickColor(hex: string): void {
    const maskName = this.activeMask && !isEmpty(this.activeMask) ? this.activeMask.name : null;
    this.state.colorEdits.push({ maskName, targetRgb: hex });
    this.setStatus(`queued color edit ${hex} (${maskName ?? "full image"})`);
  }

  applyHsvSliders(): void {
    const h = Number(($("hsv-h") as HTMLInputElement).value);
    const s = Number(($("hsv-s") as HTMLInputElement).value);
    const v = Number(($("hsv-v") as HTMLInputElement).value);
    const maskName = this.activeMask && !isEmpty(this.activeMask) ? this.activeMask.name : null;
    this.state.colorEdits.push({ maskName, hsv: { h, s, v } });
    this.setStatus(`queued HSV edit (${maskName ?? "full image"})`);
  }

  async loadReferencePalette(file: File): Promise<void> {
    const bytes = new Uint8Array(await file.arrayBuffer());
    try {
      const palette = await this.client.palette(bytesToB64(bytes));
      const strip = $("palette-strip");
      strip.innerHTML = "";
      palette.colors.forEach((hex) => {
        const swatch = document.createElement("button");
        swatch.className = "swatch";
        swatch.style.background = hex;
        swatch.title = hex;
        swatch.onclick = () => this.pickColor(hex);
        strip.appendChild(swatch);
      });
    } catch (err) {
      this.setStatus(`palette failed: ${err}`);
    }
  }

  async send(): Promise<void> {
    let request;
    try {
      this.state.mode = ($("mode-select") as HTMLSelectElement).value as "preserve" | "target";
      request = serializeRequest(this.state);
    } catch (err) {
      this.setStatus(String(err));
      return;
    }
    $("request-preview").textContent = JSON.stringify(
      { ...request, image: `<png ${this.state.photoWidth}x${this.state.photoHeight}>` },
      null,
      1
    );
    this.setStatus("rendering...");
    try {
      const resp = await this.client.stylize(request);
      this.resultImg.src = `data:image/png;base64,${resp.image}`;
      this.history.push(resp.image, `${request.alpha_s.toFixed(2)}/${request.alpha_a.toFixed(2)}`);
      this.refreshHistory();
      this.setStatus(`done in ${resp.timing_ms.toFixed(0)} ms (model ${resp.model_version})`);
    } catch (err) {
      if (err instanceof ApiHttpError && err.status === 422) {
        this.rangeHint.textContent = err.body.message;
      }
      this.setStatus(err instanceof ApiHttpError ? `HTTP ${err.status}: ${err.body.message}` : String(err));
    }
  }

  refreshHistory(): void {
    const strip = $("history-strip");
    strip.innerHTML = "";
    for (let i = 0; i < this.history.length; i++) {
      const item = this.history.at(i);
      const thumb = document.createElement("img");
      thumb.src = `data:image/png;base64,${item.image}`;
      thumb.title = item.label;
      thumb.onclick = () => {
        this.resultImg.src = thumb.src;
      };
      strip.appendChild(thumb);
    }
  }

  wireEvents(): void {
    ($("photo-input") as HTMLInputElement).onchange = (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (file) this.loadPhoto(file);
    };
    ($("reference-input") as HTMLInputElement).onchange = (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (file) void this.loadReferencePalette(file);
    };
    ($("style-select") as HTMLSelectElement).onchange = (e) =>
      void this.selectStyle((e.target as HTMLSelectElement).value);
    for (const id of ["alpha-s", "alpha-a"]) {
      ($(id) as HTMLInputElement).onchange = () => this.readLevels();
    }
    $("hsv-apply").onclick = () => this.applyHsvSliders();
    ($("color-picker") as HTMLInputElement).onchange = (e) =>
      this.pickColor((e.target as HTMLInputElement).value);
    $("clear-edits").onclick = () => {
      this.state.colorEdits = [];
      this.setStatus("cleared pending color edits");
    };
    $("new-mask").onclick = () => {
      this.activeMask = null;
      this.ensureActiveMask();
    };
    for (const tool of ["brush", "quick", "eraser"] as Tool[]) {
      $(`tool-${tool}`).onclick = () => {
        this.tool = tool;
        this.setStatus(`tool: ${tool}`);
      };
    }
    let painting = false;
    this.maskCanvas.onmousedown = (e) => {
      painting = true;
      const rect = this.maskCanvas.getBoundingClientRect();
      this.paintAt(e.clientX - rect.left, e.clientY - rect.top);
    };
    this.maskCanvas.onmousemove = (e) => {
      if (!painting || this.tool === "quick") return;
      const rect = this.maskCanvas.getBoundingClientRect();
      this.paintAt(e.clientX - rect.left, e.clientY - rect.top);
    };
    window.onmouseup = () => {
      painting = false;
    };
    $("send-btn").onclick = () => void this.send();
  }
}

export function start(): void {
  const editor = new Editor();
  void editor.init();
  (window as unknown as { duotoonEditor: Editor }).duotoonEditor = editor;
}

if (typeof document !== "undefined" && document.getElementById("photo-canvas")) {
  start();
}
