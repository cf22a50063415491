"""Command-line entry points.

The CLI is a thin layer: subcommands parse arguments and delegate to the
core package; `stylize` and `palette` can alternatively talk to a running
service over HTTP via --server.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import colorcue, dataio, metrics
from .colorcue import HsvAugParams
from .colorspace import ColorSpace, Image
from .inference import ColorEdit, ControlRequest, InferenceModel, cartoonize
from .network import TextureLevels
from .service import codec

ENV_PREFIX = "DUOTOON"


def _make_client(server: str):
    import httpx

    return httpx.Client(base_url=server, timeout=120.0)


def _load_mask(path: str) -> np.ndarray:
    img = dataio.load_image(path)
    return img.data[..., 0]


def _parse_edit(spec: str) -> ColorEdit:
    """mask.png#RRGGBB; an empty mask part means the full image."""
    if "#" not in spec:
        raise click.BadParameter(f"expected mask.png#RRGGBB, got {spec!r}")
    mask_part, hex_part = spec.rsplit("#", 1)
    mask = _load_mask(mask_part) if mask_part else None
    return ColorEdit(mask=mask, target_rgb=codec.parse_hex_color("#" + hex_part))


@click.group()
def main():
    """Interactive cartoonization toolkit."""


@main.command()
@click.argument("photo", type=click.Path(exists=True))
@click.option("-o", "--out", required=True, type=click.Path())
@click.option("--segments", default=colorcue.DEFAULT_SEGMENTS, show_default=True)
@click.option("--seed", default=0, show_default=True)
def colormap(photo, out, segments, seed):
    """Write the superpixel color map of PHOTO."""
    img = dataio.load_image(photo)
    cue = colorcue.superpixel_colormap(img, segments, seed=seed)
    dataio.save_image(cue, out)
    click.echo(f"wrote {out}")


@main.command()
@click.argument("image", type=click.Path(exists=True))
@click.option("-k", default=colorcue.DEFAULT_PALETTE_SIZE, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--mask", type=click.Path(exists=True), default=None)
@click.option("--server", default=None, help="delegate to a running service")
def palette(image, k, seed, mask, server):
    """Print the k-means palette of IMAGE as JSON."""
    if server:
        body = {"image": codec.encode_image_b64(dataio.load_image(image)), "k": k}
        if mask:
            body["mask"] = codec.encode_mask_b64(_load_mask(mask))
        with _make_client(server) as client:
            resp = client.post("/api/palette", json=body)
        if resp.status_code != 200:
            raise click.ClickException(f"server error {resp.status_code}: {resp.text}")
        click.echo(json.dumps(resp.json(), indent=1))
        return

    img = dataio.load_image(image)
    if mask:
        keep = _load_mask(mask).reshape(-1) > 0.5
        pixels = img.data.reshape(-1, 3)[keep]
        pal = colorcue.palette_from_pixels(pixels, k=k, seed=seed)
    else:
        pal = colorcue.extract_palette(img, k=k, seed=seed)
    click.echo(
        json.dumps(
            {
                "colors": [codec.format_hex_color(c) for c in pal.colors],
                "weights": [round(float(w), 6) for w in pal.weights],
                "padded": pal.padded,
            },
            indent=1,
        )
    )


@main.command()
@click.option("--stage", type=click.Choice(["joint", "abstraction", "color-target"]), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--resume", type=click.Path(exists=True), default=None)
def train(stage, config_path, resume):
    """Run one training stage from a flat key=value config file."""
    from dataclasses import replace

    from .trainer import Trainer, parse_train_config

    cfg = parse_train_config(config_path)
    cfg = replace(cfg, stage=stage.replace("-", "_"))
    if resume:
        cfg = replace(cfg, resume=resume)
    result = Trainer(cfg).run()
    click.echo(f"finished {cfg.stage} at step {len(result.history)}; checkpoint: {result.checkpoint_path}")


@main.command()
@click.option("--photo", type=click.Path(exists=True), required=True)
@click.option("--alpha-s", default=1.0, show_default=True)
@click.option("--alpha-a", default=1.0, show_default=True)
@click.option("--mode", type=click.Choice(["preserve", "target"]), default="preserve", show_default=True)
@click.option("--edit", "edits", multiple=True, help="mask.png#RRGGBB (repeatable; empty mask part = full image)")
@click.option("--out", required=True, type=click.Path())
@click.option("--checkpoint", type=click.Path(exists=True), default=None, help="single checkpoint file")
@click.option("--model-dir", type=click.Path(exists=True), default=None, help="directory of <style>.<mode>.npz")
@click.option("--style", default=None, help="style id inside --model-dir or on the server")
@click.option("--server", default=None, help="delegate to a running service")
@click.option("--allow-extrapolation", is_flag=True, default=False)
def stylize(photo, alpha_s, alpha_a, mode, edits, out, checkpoint, model_dir, style, server, allow_extrapolation):
    """Cartoonize PHOTO with the given texture levels and color edits."""
    img = dataio.load_image(photo)

    if server:
        if not style:
            raise click.UsageError("--style is required with --server")
        body = {
            "image": codec.encode_image_b64(img),
            "alpha_s": alpha_s,
            "alpha_a": alpha_a,
            "mode": mode,
            "style": style,
            "color_edits": [],
        }
        for spec in edits:
            mask_part, hex_part = spec.rsplit("#", 1)
            body["color_edits"].append(
                {
                    "mask": codec.encode_mask_b64(_load_mask(mask_part)) if mask_part else None,
                    "target_rgb": "#" + hex_part,
                }
            )
        with _make_client(server) as client:
            resp = client.post("/api/stylize", json=body)
        if resp.status_code != 200:
            raise click.ClickException(f"server error {resp.status_code}: {resp.text}")
        dataio.save_image(codec.decode_image_b64(resp.json()["image"]), out)
        click.echo(f"wrote {out} (model {resp.json()['model_version']})")
        return

    if checkpoint:
        model = InferenceModel.from_checkpoint(checkpoint)
    elif model_dir and style:
        path = Path(model_dir) / f"{style}.{mode}.npz"
        if not path.exists():
            raise click.ClickException(f"no checkpoint {path}")
        model = InferenceModel.from_checkpoint(path)
    else:
        raise click.UsageError("provide --checkpoint, or --model-dir with --style, or --server")

    req = ControlRequest(
        photo=img,
        levels=TextureLevels(alpha_s, alpha_a),
        color_edits=[_parse_edit(e) for e in edits],
        mode=mode,
    )
    result = cartoonize(req, {mode: model}, allow_extrapolation=allow_extrapolation)
    dataio.save_image(result, out)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--set-a", type=click.Path(exists=True), required=True)
@click.option("--set-b", type=click.Path(exists=True), required=True)
@click.option("--extractor", type=click.Path(exists=True), default=None)
def fid(set_a, set_b, extractor):
    """Fréchet feature distance between two image directories."""
    ex = metrics.load_feature_extractor(extractor)
    if extractor is None:
        click.echo("note: no extractor checkpoint given; using the seeded default", err=True)
    stats = []
    for directory in (set_a, set_b):
        paths = dataio.list_dataset(directory)
        if not paths:
            raise click.ClickException(f"no images under {directory}")
        stats.append(metrics.accumulate((dataio.load_image(p) for p in paths), ex))
    click.echo(f"{metrics.frechet_distance(stats[0], stats[1]):.6f}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True, envvar=f"{ENV_PREFIX}_HOST")
@click.option("--port", default=8421, show_default=True, envvar=f"{ENV_PREFIX}_PORT", type=int)
@click.option("--model-dir", required=True, envvar=f"{ENV_PREFIX}_MODEL_DIR", type=click.Path(exists=True))
@click.option(
    "--allow-extrapolation",
    is_flag=True,
    default=False,
    envvar=f"{ENV_PREFIX}_ALLOW_EXTRAPOLATION",
)
def serve(host, port, model_dir, allow_extrapolation):
    """Run the HTTP inference service."""
    import uvicorn

    from .service import create_app

    app = create_app(model_dir, allow_extrapolation=allow_extrapolation)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
