"""Pydantic wire models for the stylize service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class HsvParams(BaseModel):
    h: float = Field(0.0, ge=-0.5, lt=0.5, description="circular hue shift")
    s: float = Field(1.0, gt=0.0, description="saturation scale")
    v: float = Field(1.0, gt=0.0, description="value scale")


class WireRegion(BaseModel):
    mask: str = Field(..., description="base64 PNG, 8-bit grayscale, value/255 = weight")
    alpha_s: float
    alpha_a: float


class WireColorEdit(BaseModel):
    mask: Optional[str] = Field(None, description="base64 PNG mask; null = full image")
    target_rgb: Optional[str] = Field(None, description="hex color #RRGGBB")
    hsv: Optional[HsvParams] = None

    @model_validator(mode="after")
    def _exactly_one_edit_kind(self):
        if (self.target_rgb is None) == (self.hsv is None):
            raise ValueError("provide exactly one of target_rgb or hsv")
        return self


class StylizeRequest(BaseModel):
    image: str = Field(..., description="base64 PNG")
    alpha_s: float = 1.0
    alpha_a: float = 1.0
    regions: Optional[list[WireRegion]] = None
    color_edits: list[WireColorEdit] = Field(default_factory=list)
    mode: Literal["preserve", "target"] = "preserve"
    style: str


class StylizeResponse(BaseModel):
    image: str
    timing_ms: float
    model_version: str


class StyleInfo(BaseModel):
    id: str
    name: str
    modes: list[str]
    N: int
    alpha_range: tuple[float, float]


class PaletteRequest(BaseModel):
    image: str
    mask: Optional[str] = None
    k: int = Field(8, ge=1)


class PaletteResponse(BaseModel):
    colors: list[str]
    weights: list[float]


class ErrorBody(BaseModel):
    code: str
    message: str
