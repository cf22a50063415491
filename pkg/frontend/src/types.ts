/** Wire types matching the stylize service. */

export interface WireRegion {
  mask: string;
  alpha_s: number;
  alpha_a: number;
}

export interface WireHsv {
  h: number;
  s: number;
  v: number;
}

export interface WireColorEdit {
  mask: string | null;
  target_rgb?: string;
  hsv?: WireHsv;
}

export interface StylizeRequest {
  image: string;
  alpha_s: number;
  alpha_a: number;
  regions: WireRegion[] | null;
  color_edits: WireColorEdit[];
  mode: "preserve" | "target";
  style: string;
}

export interface StylizeResponse {
  image: string;
  timing_ms: number;
  model_version: string;
}

export interface StyleInfo {
  id: string;
  name: string;
  modes: string[];
  N: number;
  alpha_range: [number, number];
}

export interface PaletteResponse {
  colors: string[];
  weights: number[];
}

export interface ApiError {
  code: string;
  message: string;
}
