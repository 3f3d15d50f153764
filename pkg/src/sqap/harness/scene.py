"""Synthetic scenes: activations with planted salience and outlier channels."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidSpec, ProjectionError
from ..numerics import make_rng
from ..pruner import CameraModel, TokenGrid, project_world_to_token

_X_STREAM, _W_STREAM = 0, 1


def default_camera(grid: TokenGrid | None = None) -> CameraModel:
    grid = grid or TokenGrid()
    w, h = grid.image_width, grid.image_height
    k = np.array([[100.0, 0.0, w / 2], [0.0, 100.0, h / 2], [0.0, 0.0, 1.0]])
    return CameraModel(k, np.eye(3), np.zeros(3), w, h)


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to regenerate one synthetic scene.

    ``salient_tokens`` are ``(token index, strength)`` pairs: the token's
    activation gets ``strength`` times the query activation added to it.
    ``outlier_channels`` are ``(channel, multiplier)`` pairs scaling that
    activation row; the matching projection weight rows are divided by the
    multiplier so full-precision logits do not see the outlier.
    """

    grid: TokenGrid = field(default_factory=TokenGrid)
    camera: CameraModel = field(default_factory=default_camera)
    robot_point: tuple[float, float, float] = (-0.6, 0.5, 2.0)
    salient_tokens: tuple[tuple[int, float], ...] = (
        (40, 0.6), (41, 0.5), (72, 0.45), (150, 0.4), (151, 0.35), (215, 0.3),
    )
    outlier_channels: tuple[tuple[int, float], ...] = ((3, 50.0), (77, 30.0))
    seed: int = 0
    d_model: int = 512
    weight_noise: float = 0.3

    @property
    def n_visual(self) -> int:
        return self.grid.n_tokens

    def validate(self) -> None:
        n, d = self.n_visual, self.d_model
        if d <= 0:
            raise InvalidSpec("d_model must be positive")
        for idx, strength in self.salient_tokens:
            if not 0 <= idx < n:
                raise InvalidSpec(f"salient token {idx} outside [0, {n})")
            if not np.isfinite(strength):
                raise InvalidSpec(f"salient strength for token {idx} is not finite")
        for ch, mult in self.outlier_channels:
            if not 0 <= ch < d:
                raise InvalidSpec(f"outlier channel {ch} outside [0, {d})")
            if not (np.isfinite(mult) and mult >= 1):
                raise InvalidSpec(f"outlier multiplier {mult} must be >= 1")
        if len(self.robot_point) != 3:
            raise InvalidSpec("robot_point must be a 3-vector")


@dataclass(frozen=True)
class SceneTruth:
    salient: tuple[int, ...]
    outlier_channels: tuple[int, ...]
    robot_token: int | None


def _outlier_gain(spec: SceneSpec) -> np.ndarray:
    gain = np.ones(spec.d_model)
    for ch, mult in spec.outlier_channels:
        gain[ch] *= mult
    return gain


def generate_scene(spec: SceneSpec) -> tuple[np.ndarray, SceneTruth]:
    """Activation matrix ``(d_model, N_v + 1)``; the last column is the query token."""
    spec.validate()
    rng = make_rng(spec.seed, _X_STREAM)
    n = spec.n_visual
    x = rng.standard_normal((spec.d_model, n + 1))
    query = x[:, n].copy()
    for idx, strength in spec.salient_tokens:
        x[:, idx] += strength * query
    x *= _outlier_gain(spec)[:, None]

    try:
        robot = spec.grid.flat(project_world_to_token(spec.camera, spec.robot_point, spec.grid))
    except ProjectionError:
        robot = None
    truth = SceneTruth(
        salient=tuple(i for i, _ in spec.salient_tokens),
        outlier_channels=tuple(c for c, _ in spec.outlier_channels),
        robot_token=robot,
    )
    return x, truth


def scene_weights(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """Query/key projection weights with ``Wq @ Wk.T`` close to the identity."""
    spec.validate()
    rng = make_rng(spec.seed, _W_STREAM)
    d = spec.d_model
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    base = q * np.sign(np.diag(r))
    wk = base + spec.weight_noise * rng.standard_normal((d, d)) / np.sqrt(d)
    inv_gain = 1.0 / _outlier_gain(spec)[:, None]
    return base * inv_gain, wk * inv_gain
