"""Stagewise training.

Stage "joint" trains everything except the abstraction unit with
L = texture losses + color reconstruction (no warm-up phase: the first step
already carries the adversarial term).  Stage "abstraction" trains only the
abstraction unit via the texture losses against targets resized by the
abstraction level, with every other component (discriminators included)
frozen.  Stage "color_target" fine-tunes the color decoder adversarially
toward the cartoon's color distribution, consuming the un-augmented cue.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import torch

from . import losses
from .dataio import DatasetConfig, TrainDataPipeline, stack_batch
from .losses import LossWeights, load_perceptual_extractor
from .network import CartoonModel, build_model, get_preset, save_checkpoint
from .network.model import load_checkpoint

log = logging.getLogger(__name__)

STAGES = ("joint", "abstraction", "color_target")
_ALPHA_STREAM = 0xA1FA

# default stage lengths; the paper-scale schedule keeps the long first stage
DESK_STAGE_STEPS = {"joint": 2000, "abstraction": 500, "color_target": 500}
PAPER_STAGE_STEPS = {"joint": 100_000, "abstraction": 500, "color_target": 500}

FREEZE_AUDIT_EVERY = 100


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, dump_path):
        super().__init__(f"non-finite loss at step {step}; offending batch dumped to {dump_path}")
        self.step = step
        self.dump_path = dump_path


class FrozenLeafMoved(RuntimeError):
    """A frozen parameter (or the extractor) changed during training."""


@dataclass
class TrainConfig:
    stage: str = "joint"
    steps: int | None = None
    lr: float = 2e-4
    batch_size: int = 8
    betas: tuple[float, float] = (0.5, 0.999)
    weights: LossWeights = field(default_factory=LossWeights)
    checkpoint_every: int = 500
    seed: int = 0
    preset: str = "desk"
    photo_dir: str = ""
    cartoon_dir: str = ""
    out_dir: str = "runs/default"
    resume: str | None = None
    extractor_weights: str | None = None

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}")
        if self.steps is None:
            table = PAPER_STAGE_STEPS if self.preset == "paper" else DESK_STAGE_STEPS
            self.steps = table[self.stage]
        if self.steps <= 0 or self.lr <= 0 or self.batch_size <= 0:
            raise ValueError("steps, lr and batch_size must be positive")


_CONFIG_COERCERS = {
    "stage": str,
    "steps": int,
    "lr": float,
    "batch_size": int,
    "beta1": float,
    "beta2": float,
    "checkpoint_every": int,
    "seed": int,
    "preset": str,
    "photo_dir": str,
    "cartoon_dir": str,
    "out_dir": str,
    "resume": str,
    "extractor_weights": str,
    "weight_adv": float,
    "weight_content": float,
    "weight_gram": float,
    "weight_tv": float,
    "weight_color_recon": float,
    "weight_color_adv": float,
}


def parse_train_config(path) -> TrainConfig:
    """Flat `key = value` config file; '#' starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_COERCERS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value

    coerced = {k: _CONFIG_COERCERS[k](v) for k, v in raw.items()}
    texture = list(LossWeights().texture)
    for i, name in enumerate(("weight_adv", "weight_content", "weight_gram", "weight_tv")):
        if name in coerced:
            texture[i] = coerced.pop(name)
    color = list(LossWeights().color_finetune)
    for i, name in enumerate(("weight_color_recon", "weight_color_adv")):
        if name in coerced:
            color[i] = coerced.pop(name)
    betas = (coerced.pop("beta1", 0.5), coerced.pop("beta2", 0.999))
    return TrainConfig(
        betas=betas, weights=LossWeights(texture=tuple(texture), color_finetune=tuple(color)), **coerced
    )


@dataclass
class TrainResult:
    history: list[dict]
    checkpoint_path: Path
    model: CartoonModel

    def moving_average(self, key: str, window: int) -> list[float]:
        values = [h[key] for h in self.history if key in h]
        return [float(np.mean(values[max(0, i - window + 1) : i + 1])) for i in range(len(values))]


def _alpha_rng(seed: int, step: int) -> np.random.Generator:
    return np.random.default_rng((seed, _ALPHA_STREAM, step))


class Trainer:
    def __init__(
        self,
        cfg: TrainConfig,
        model: CartoonModel | None = None,
        pipeline: TrainDataPipeline | None = None,
    ):
        self.cfg = cfg
        self.out_dir = Path(cfg.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

        if model is not None:
            self.model = model
        elif cfg.resume:
            _, self.model = load_checkpoint(cfg.resume)
        elif cfg.stage != "joint":
            raise ValueError(f"stage {cfg.stage!r} needs a checkpoint to resume from")
        else:
            self.model = build_model(cfg.preset, seed=cfg.seed)

        self.extractor = load_perceptual_extractor(cfg.extractor_weights, seed=cfg.seed)
        net_cfg = self.model.cfg

        if pipeline is not None:
            self.pipeline = pipeline
        else:
            data_cfg = DatasetConfig.for_network(
                net_cfg, cfg.photo_dir, cfg.cartoon_dir, seed=cfg.seed, batch_size=cfg.batch_size
            )
            self.pipeline = TrainDataPipeline(data_cfg)

        self._setup_stage()
        self.step = 0
        self.history: list[dict] = []
        self._log_file = None

        if cfg.resume:
            sidecar = Path(str(cfg.resume) + ".resume.pt")
            if sidecar.exists():
                state = torch.load(sidecar, weights_only=False)
                if state.get("stage") == cfg.stage:
                    self.load_resume_state(sidecar)

    # --- stage plumbing ---------------------------------------------------

    def _setup_stage(self):
        tree = self.model.tree
        stage = self.cfg.stage
        if stage == "joint":
            tree.unfreeze(*tree.names)
            tree.freeze("texture_decoder.abstraction_unit", "disc_color")
            g_names = [
                "encoder",
                "texture_decoder.stroke_unit",
                "texture_decoder.trunk",
                "color_decoder",
            ]
            d_names = ["disc_texture"]
        elif stage == "abstraction":
            tree.freeze_all_except("texture_decoder.abstraction_unit")
            g_names = ["texture_decoder.abstraction_unit"]
            d_names = []
        else:  # color_target
            tree.freeze_all_except("color_decoder", "disc_color")
            g_names = ["color_decoder"]
            d_names = ["disc_color"]

        self.g_opt = torch.optim.Adam(
            list(tree.parameters(g_names, trainable_only=True)), lr=self.cfg.lr, betas=self.cfg.betas
        )
        self.d_opt = (
            torch.optim.Adam(
                list(tree.parameters(d_names, trainable_only=True)), lr=self.cfg.lr, betas=self.cfg.betas
            )
            if d_names
            else None
        )
        self._frozen_baseline = tree.leaf_hashes(sorted(tree.frozen()))
        self._extractor_baseline = [p.detach().clone() for p in self.extractor.parameters()]

    def audit_freezes(self) -> None:
        """Bitwise check that frozen leaves and the extractor never moved."""
        current = self.model.tree.leaf_hashes(sorted(self.model.tree.frozen()))
        moved = [p for p, h in current.items() if self._frozen_baseline.get(p) != h]
        if moved:
            raise FrozenLeafMoved(f"frozen leaves changed at step {self.step}: {moved[:5]}")
        for p, baseline in zip(self.extractor.parameters(), self._extractor_baseline):
            if not torch.equal(p.detach(), baseline):
                raise FrozenLeafMoved(f"perceptual extractor changed at step {self.step}")

    # --- helpers ------------------------------------------------------------

    @staticmethod
    def _tensors(batch: dict[str, np.ndarray]) -> dict[str, torch.Tensor]:
        return {k: torch.from_numpy(v) for k, v in batch.items() if k != "level"}

    def _guard_finite(self, value: torch.Tensor, batch: dict[str, np.ndarray]):
        if torch.isfinite(value).all():
            return
        dump = self.out_dir / f"diverged_step{self.step}.npz"
        np.savez_compressed(dump, **batch)
        raise TrainingDiverged(self.step, dump)

    def _record(self, record: dict):
        record = {"step": self.step, "stage": self.cfg.stage, **record}
        self.history.append(record)
        if self._log_file is not None:
            self._log_file.write(json.dumps(record) + "\n")
            self._log_file.flush()

    # --- per-stage steps ----------------------------------------------------

    def _step_joint(self) -> dict:
        cfg = self.cfg
        n = self.model.cfg.n_levels
        batch = stack_batch(self.pipeline.next_batch())
        level_s = int(batch["level"])
        level_a = int(_alpha_rng(cfg.seed, self.step).integers(1, n + 1))
        t = self._tensors(batch)
        gen, disc = self.model.generator, self.model.disc_texture

        with torch.no_grad():
            f = gen.encode(t["photo_lab"])
            fake_l = gen.decode_texture(f, (float(level_s), float(level_a)))
        d_loss = losses.d_adv_loss(disc(t["cartoon_l"], level_s), disc(fake_l, level_s))
        self.d_opt.zero_grad()
        d_loss.backward()
        self.d_opt.step()

        f = gen.encode(t["photo_lab"])
        fake_l = gen.decode_texture(f, (float(level_s), float(level_a)))
        fake_ab = gen.decode_color(f, t["aug_cue"])
        parts = losses.texture_loss_components(
            disc, self.extractor, t["photo_lab"][:, 0:1], fake_l, t["cartoon_l"], level_s, cfg.weights
        )
        recon = losses.color_recon_loss(t["aug_photo_ab"], fake_ab)
        total = parts["total"] + recon
        self._guard_finite(total, batch)
        self.g_opt.zero_grad()
        total.backward()
        self.g_opt.step()

        return {
            "level_s": level_s,
            "level_a": level_a,
            "d_loss": float(d_loss.detach()),
            "adv": float(parts["adv"].detach()),
            "content": float(parts["content"].detach()),
            "gram": float(parts["gram"].detach()),
            "tv": float(parts["tv"].detach()),
            "color_recon": float(recon.detach()),
            "g_total": float(total.detach()),
        }

    def _step_abstraction(self) -> dict:
        cfg = self.cfg
        n = self.model.cfg.n_levels
        batch = stack_batch(self.pipeline.next_batch())
        level_a = int(batch["level"])  # drives target resize and head routing
        level_s = int(_alpha_rng(cfg.seed, self.step).integers(1, n + 1))
        t = self._tensors(batch)
        gen, disc = self.model.generator, self.model.disc_texture

        with torch.no_grad():
            f = gen.encode(t["photo_lab"])
        fake_l = gen.decode_texture(f, (float(level_s), float(level_a)))
        parts = losses.texture_loss_components(
            disc, self.extractor, t["photo_lab"][:, 0:1], fake_l, t["cartoon_l"], level_a, cfg.weights
        )
        total = parts["total"]
        self._guard_finite(total, batch)
        self.g_opt.zero_grad()
        total.backward()
        self.g_opt.step()

        return {
            "level_s": level_s,
            "level_a": level_a,
            "adv": float(parts["adv"].detach()),
            "content": float(parts["content"].detach()),
            "gram": float(parts["gram"].detach()),
            "tv": float(parts["tv"].detach()),
            "g_total": float(total.detach()),
        }

    def _step_color_target(self) -> dict:
        cfg = self.cfg
        batch = stack_batch(self.pipeline.next_batch())
        t = self._tensors(batch)
        gen, disc = self.model.generator, self.model.disc_color

        with torch.no_grad():
            f = gen.encode(t["photo_lab"])
            fake_ab = gen.decode_color(f, t["raw_cue"])
        d_loss = losses.d_adv_loss(disc(t["cartoon_ab"]), disc(fake_ab))
        self.d_opt.zero_grad()
        d_loss.backward()
        self.d_opt.step()

        with torch.no_grad():
            f = gen.encode(t["photo_lab"])
        fake_ab = gen.decode_color(f, t["raw_cue"])
        recon = losses.color_recon_loss(t["photo_lab"][:, 1:3], fake_ab)
        adv = losses.adv_color_g(disc, fake_ab)
        total = losses.color_finetune_loss(recon, adv, cfg.weights)
        self._guard_finite(total, batch)
        self.g_opt.zero_grad()
        total.backward()
        self.g_opt.step()

        return {
            "d_loss": float(d_loss.detach()),
            "color_recon": float(recon.detach()),
            "color_adv": float(adv.detach()),
            "g_total": float(total.detach()),
        }

    # --- driver ---------------------------------------------------------

    def _checkpoint(self, tag: str) -> Path:
        path = self.out_dir / f"ckpt_{self.cfg.stage}_{tag}.npz"
        save_checkpoint(
            path,
            self.model,
            version=f"{self.model.cfg.preset}-{self.cfg.stage}-{self.step}",
            stage=self.cfg.stage,
            step=self.step,
        )
        self._save_resume_state(Path(str(path) + ".resume.pt"))
        return path

    def _save_resume_state(self, path: Path):
        torch.save(
            {
                "stage": self.cfg.stage,
                "step": self.step,
                "data_counter": self.pipeline.counter,
                "g_opt": self.g_opt.state_dict(),
                "d_opt": self.d_opt.state_dict() if self.d_opt else None,
            },
            path,
        )

    def load_resume_state(self, path):
        state = torch.load(path, weights_only=False)
        self.step = state["step"]
        self.pipeline.counter = state["data_counter"]
        self.g_opt.load_state_dict(state["g_opt"])
        if self.d_opt is not None and state["d_opt"] is not None:
            self.d_opt.load_state_dict(state["d_opt"])

    def run_step(self) -> dict:
        step_fn = {
            "joint": self._step_joint,
            "abstraction": self._step_abstraction,
            "color_target": self._step_color_target,
        }[self.cfg.stage]
        t0 = time.time()
        record = step_fn()
        record["wall_s"] = round(time.time() - t0, 4)
        self.step += 1
        self._record(record)
        return record

    def run(self) -> TrainResult:
        cfg = self.cfg
        with open(self.out_dir / f"train_log_{cfg.stage}.jsonl", "a") as logf:
            self._log_file = logf
            try:
                while self.step < cfg.steps:
                    record = self.run_step()
                    if self.step % FREEZE_AUDIT_EVERY == 0:
                        self.audit_freezes()
                    if self.step % max(1, cfg.checkpoint_every) == 0 and self.step < cfg.steps:
                        self._checkpoint(f"{self.step:06d}")
                    if self.step % 50 == 0 or self.step == cfg.steps:
                        log.info("stage=%s step=%d g_total=%.4f", cfg.stage, self.step, record["g_total"])
            finally:
                self._log_file = None
        self.audit_freezes()
        path = self._checkpoint("final")
        return TrainResult(history=self.history, checkpoint_path=path, model=self.model)


def train_stage_joint(cfg: TrainConfig, **kw) -> TrainResult:
    return Trainer(replace(cfg, stage="joint"), **kw).run()


def train_stage_abstraction(cfg: TrainConfig, **kw) -> TrainResult:
    return Trainer(replace(cfg, stage="abstraction"), **kw).run()


def train_stage_color_target(cfg: TrainConfig, **kw) -> TrainResult:
    return Trainer(replace(cfg, stage="color_target"), **kw).run()
