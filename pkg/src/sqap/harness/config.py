"""JSON run configuration.

One document with ``scene``, ``prune``, ``quant``, ``model`` and ``sweep``
sections; every key is optional and falls back to the dataclass default.
``SQAP_SEED`` in the environment overrides ``scene.seed``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..attention import Regime
from ..efficiency import ModelDims
from ..errors import ConfigError
from ..pruner import Ablation, CameraModel, PruneConfig, TokenGrid
from ..quantizer import Granularity, activation_spec, weight_spec
from .scene import SceneSpec, default_camera

SEED_ENV = "SQAP_SEED"


@dataclass(frozen=True)
class QuantConfig:
    bits_w: int = 4
    bits_a: int = 4
    granularity_w: Granularity = Granularity.PER_CHANNEL
    granularity_a: Granularity = Granularity.PER_TENSOR

    def specs(self):
        return weight_spec(self.bits_w, self.granularity_w), activation_spec(self.bits_a, self.granularity_a)


@dataclass(frozen=True)
class SweepConfig:
    ratios: tuple[float, ...] = (0.3, 0.4, 0.5, 0.6)
    seeds: int = 100
    regimes: tuple[Regime, ...] = tuple(Regime)
    workers: int = 1


@dataclass(frozen=True)
class HarnessConfig:
    scene: SceneSpec = field(default_factory=SceneSpec)
    prune: PruneConfig = field(default_factory=lambda: PruneConfig(world_point=SceneSpec().robot_point))
    quant: QuantConfig = field(default_factory=QuantConfig)
    model: ModelDims = field(default_factory=ModelDims)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    metric_k: int = 8
    ablation: Ablation = Ablation.FULL

    @property
    def attention_dims(self) -> tuple[int, int]:
        return self.scene.d_model, self.scene.n_visual


def _pick(section: dict, cls, name: str) -> dict:
    known = {f.name for f in fields(cls)}
    extra = set(section) - known
    if extra:
        raise ConfigError(f"unknown keys in '{name}': {sorted(extra)}")
    return dict(section)


def _camera(raw: dict | None, grid: TokenGrid) -> CameraModel:
    if raw is None:
        return default_camera(grid)
    try:
        return CameraModel(
            np.asarray(raw["intrinsic"], dtype=float),
            np.asarray(raw.get("rotation", np.eye(3)), dtype=float),
            np.asarray(raw.get("translation", np.zeros(3)), dtype=float),
            int(raw.get("image_width", grid.image_width)),
            int(raw.get("image_height", grid.image_height)),
        )
    except KeyError as exc:
        raise ConfigError(f"camera section missing {exc}") from exc


def config_from_dict(doc: dict, env: dict | None = None) -> HarnessConfig:
    env = os.environ if env is None else env
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - {"scene", "prune", "quant", "model", "sweep", "metric_k", "ablation"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    try:
        sc = dict(doc.get("scene", {}))
        grid = TokenGrid(**_pick(sc.pop("grid", {}), TokenGrid, "scene.grid"))
        camera = _camera(sc.pop("camera", None), grid)
        sc = _pick(sc, SceneSpec, "scene")
        if "salient_tokens" in sc:
            sc["salient_tokens"] = tuple((int(i), float(s)) for i, s in sc["salient_tokens"])
        if "outlier_channels" in sc:
            sc["outlier_channels"] = tuple((int(c), float(m)) for c, m in sc["outlier_channels"])
        if "robot_point" in sc:
            sc["robot_point"] = tuple(float(v) for v in sc["robot_point"])
        if SEED_ENV in env:
            sc["seed"] = int(env[SEED_ENV])
        scene = SceneSpec(grid=grid, camera=camera, **sc)

        pr = _pick(doc.get("prune", {}), PruneConfig, "prune")
        pr.setdefault("world_point", scene.robot_point)
        prune = PruneConfig(**pr)

        quant = QuantConfig(**_pick(doc.get("quant", {}), QuantConfig, "quant"))
        quant.specs()
        model = ModelDims(**_pick(doc.get("model", {}), ModelDims, "model"))

        sw = _pick(doc.get("sweep", {}), SweepConfig, "sweep")
        if "ratios" in sw:
            sw["ratios"] = tuple(float(r) for r in sw["ratios"])
        if "regimes" in sw:
            sw["regimes"] = tuple(Regime(r) for r in sw["regimes"])
        sweep = SweepConfig(**sw)
        if any(not 0.0 < r < 1.0 for r in sweep.ratios):
            raise ConfigError("sweep ratios must lie in (0, 1)")
        if sweep.seeds < 0:
            raise ConfigError("sweep seeds must be non-negative")

        cfg = HarnessConfig(
            scene=scene, prune=prune, quant=quant, model=model, sweep=sweep,
            metric_k=int(doc.get("metric_k", 8)), ablation=Ablation(doc.get("ablation", "full")),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 1 <= cfg.metric_k <= scene.n_visual:
        raise ConfigError(f"metric_k must lie in [1, {scene.n_visual}]")
    return cfg


def load_config(path, env: dict | None = None) -> HarnessConfig:
    """Read a config file; raises ``ConfigError`` for bad content, ``OSError`` for I/O."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc, env)


def with_ratio(cfg: HarnessConfig, ratio: float) -> HarnessConfig:
    return replace(cfg, prune=replace(cfg.prune, ratio=ratio))
