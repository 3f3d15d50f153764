"""Token selection: attention top-k, robot-aware ring and farthest-point fill.

Token indices are flat, row-major over the patch grid:
``index = t_v * grid_w + t_u``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .attention import AttentionVector
from .errors import (
    BudgetTooSmall,
    BehindCamera,
    DimensionMismatch,
    KTooLarge,
    LengthMismatch,
    MTooLarge,
    OutOfFrame,
    ProjectionError,
)
from .numerics import as_matrix, topk_indices

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CameraModel:
    intrinsic: np.ndarray
    rotation: np.ndarray
    translation: np.ndarray
    image_width: int
    image_height: int

    def __post_init__(self):
        k = as_matrix(self.intrinsic, "intrinsic")
        r = as_matrix(self.rotation, "rotation")
        t = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if k.shape != (3, 3) or r.shape != (3, 3) or t.shape != (3,):
            raise DimensionMismatch("camera needs 3x3 K, 3x3 R and a length-3 t")
        if k[2, 2] != 1.0:
            raise ValueError("intrinsic[2][2] must be 1")
        if np.abs(r @ r.T - np.eye(3)).max() > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        object.__setattr__(self, "intrinsic", k)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def to_pixel(self, point) -> tuple[float, float, float]:
        """Return ``(u, v, depth)`` for a world point."""
        p = self.intrinsic @ (self.rotation @ np.asarray(point, dtype=np.float64) + self.translation)
        lam = float(p[2])
        if lam <= 0:
            raise BehindCamera(f"point {tuple(point)} has non-positive depth {lam}")
        return float(p[0]) / lam, float(p[1]) / lam, lam


@dataclass(frozen=True)
class TokenGrid:
    patch_w: int = 14
    patch_h: int = 14
    grid_w: int = 16
    grid_h: int = 16

    def __post_init__(self):
        if min(self.patch_w, self.patch_h, self.grid_w, self.grid_h) <= 0:
            raise ValueError("grid and patch dimensions must be positive")

    @property
    def n_tokens(self) -> int:
        return self.grid_w * self.grid_h

    @property
    def image_width(self) -> int:
        return self.grid_w * self.patch_w

    @property
    def image_height(self) -> int:
        return self.grid_h * self.patch_h

    def flat(self, coord: TokenCoord) -> int:
        return coord.t_v * self.grid_w + coord.t_u

    def coords(self, indices) -> np.ndarray:
        """``(n, 2)`` integer array of ``(t_u, t_v)`` for flat indices."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        return np.stack([idx % self.grid_w, idx // self.grid_w], axis=1)


@dataclass(frozen=True)
class TokenCoord:
    t_u: int
    t_v: int


class Ablation(str, enum.Enum):
    ATTN = "attn"
    ATTN_RING = "attn+ring"
    FULL = "full"


@dataclass(frozen=True)
class PruneConfig:
    ratio: float = 0.4
    ring_radius: int = 1
    attn_fraction: float = 0.5
    world_point: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not 0.0 <= self.ratio < 1.0:
            raise ValueError(f"ratio must lie in [0, 1), got {self.ratio}")
        if self.ring_radius < 0:
            raise ValueError("ring_radius must be non-negative")
        if not 0.0 <= self.attn_fraction <= 1.0:
            raise ValueError("attn_fraction must lie in [0, 1]")
        object.__setattr__(self, "world_point", tuple(float(c) for c in self.world_point))


@dataclass(frozen=True)
class PruneResult:
    attn_set: frozenset[int]
    ring_set: frozenset[int]
    fps_set: frozenset[int]
    final_set: frozenset[int] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "final_set", self.attn_set | self.ring_set | self.fps_set)

    def mask(self, n_tokens: int) -> np.ndarray:
        m = np.zeros(n_tokens, dtype=bool)
        m[sorted(self.final_set)] = True
        return m


def project_world_to_token(cam: CameraModel, point, grid: TokenGrid) -> TokenCoord:
    if (cam.image_width, cam.image_height) != (grid.image_width, grid.image_height):
        raise DimensionMismatch(
            f"camera image {cam.image_width}x{cam.image_height} does not match "
            f"grid image {grid.image_width}x{grid.image_height}"
        )
    u, v, _ = cam.to_pixel(point)
    if not (0.0 <= u < cam.image_width and 0.0 <= v < cam.image_height):
        raise OutOfFrame(f"pixel ({u:.3f}, {v:.3f}) outside {cam.image_width}x{cam.image_height}")
    return TokenCoord(math.floor(u / grid.patch_w), math.floor(v / grid.patch_h))


def ring_tokens(center: TokenCoord, radius: int, grid: TokenGrid) -> frozenset[int]:
    """Flat indices within Chebyshev distance ``radius`` of ``center``, clipped to the grid."""
    if not (0 <= center.t_u < grid.grid_w and 0 <= center.t_v < grid.grid_h):
        raise ValueError(f"center {center} outside the {grid.grid_w}x{grid.grid_h} grid")
    u0, u1 = max(0, center.t_u - radius), min(grid.grid_w - 1, center.t_u + radius)
    v0, v1 = max(0, center.t_v - radius), min(grid.grid_h - 1, center.t_v + radius)
    return frozenset(v * grid.grid_w + u for v in range(v0, v1 + 1) for u in range(u0, u1 + 1))


def topk_preserve(a_q, k: int) -> frozenset[int]:
    scores = a_q.scores if isinstance(a_q, AttentionVector) else np.asarray(a_q, dtype=np.float64)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > scores.size:
        raise KTooLarge(f"k={k} exceeds {scores.size} tokens")
    return frozenset(topk_indices(scores, k).tolist())


def fps_order(candidates, grid: TokenGrid, anchors, m: int) -> list[int]:
    """Greedy farthest-point picks from ``candidates``, in selection order.

    Each step takes the candidate whose minimum Euclidean grid distance to
    ``anchors`` plus earlier picks is largest; ties go to the lower index.
    Without anchors the first pick is the lowest-index candidate.
    """
    cand = np.array(sorted(set(candidates)), dtype=np.int64)
    anc = np.array(sorted(set(anchors)), dtype=np.int64)
    if m < 0:
        raise ValueError("m must be non-negative")
    if m > cand.size:
        raise MTooLarge(f"m={m} exceeds {cand.size} candidates")
    if np.intersect1d(cand, anc).size:
        raise ValueError("candidates and anchors must be disjoint")
    if m == 0:
        return []
    pts = grid.coords(cand)
    # squared integer distances keep tie-breaking exact
    if anc.size:
        diff = pts[:, None, :] - grid.coords(anc)[None, :, :]
        dist = (diff**2).sum(axis=2).min(axis=1)
        first = int(np.argmax(dist))
    else:
        dist = np.full(cand.size, np.iinfo(np.int64).max, dtype=np.int64)
        first = 0
    picks = []
    pick = first
    for _ in range(m):
        picks.append(int(cand[pick]))
        dist = np.minimum(dist, ((pts - pts[pick]) ** 2).sum(axis=1))
        dist[pick] = -1
        pick = int(np.argmax(dist))
    return picks


def fps_sample(candidates, grid: TokenGrid, anchors, m: int) -> frozenset[int]:
    return frozenset(fps_order(candidates, grid, anchors, m))


def retain_count(ratio: float, n_visual: int) -> int:
    """Tokens kept at pruning ratio ``ratio`` (Python ``round``: half to even)."""
    return round((1.0 - ratio) * n_visual)


def allocate_budget(cfg: PruneConfig, n_visual: int, ring_size: int) -> dict[str, int]:
    retain = retain_count(cfg.ratio, n_visual)
    if ring_size > retain:
        raise BudgetTooSmall(f"ring of {ring_size} tokens exceeds retain budget {retain}")
    free = retain - ring_size
    k = math.floor(cfg.attn_fraction * free)
    return {"retain": retain, "k": k, "m_initial": free - k}


def robot_ring(cam: CameraModel, grid: TokenGrid, cfg: PruneConfig) -> frozenset[int] | None:
    """Protected ring around the projected robot point, or None if it is not visible."""
    try:
        center = project_world_to_token(cam, cfg.world_point, grid)
    except ProjectionError as exc:
        log.warning("robot point not projectable (%s); pruning without a ring", exc)
        return None
    return ring_tokens(center, cfg.ring_radius, grid)


def prune_tokens(
    a_q,
    cam: CameraModel,
    grid: TokenGrid,
    cfg: PruneConfig,
    ablation: Ablation | str = Ablation.FULL,
) -> PruneResult:
    """Select exactly ``round((1 - ratio) * N_v)`` visual tokens.

    ``ablation`` walks the strategy ladder at a fixed budget: ``attn`` spends
    it all on top attention, ``attn+ring`` protects the robot ring and fills
    the rest by attention, ``full`` splits the free budget between attention
    and farthest-point sampling.
    """
    ablation = Ablation(ablation)
    scores = a_q.scores if isinstance(a_q, AttentionVector) else np.asarray(a_q, dtype=np.float64)
    n = grid.n_tokens
    if scores.size != n:
        raise LengthMismatch(f"attention has {scores.size} entries, grid has {n} tokens")

    ring = frozenset()
    if ablation is not Ablation.ATTN:
        ring = robot_ring(cam, grid, cfg) or frozenset()
    budget = allocate_budget(cfg, n, len(ring))
    free = budget["retain"] - len(ring)

    if ablation is not Ablation.FULL:
        ranked = (i for i in topk_indices(scores, n).tolist() if i not in ring)
        attn = frozenset(next(ranked) for _ in range(free))
        return PruneResult(attn, ring, frozenset())

    attn = topk_preserve(scores, budget["k"]) - ring
    kept = attn | ring
    remain = frozenset(range(n)) - kept
    fps = fps_sample(remain, grid, kept, budget["retain"] - len(kept))
    return PruneResult(attn, ring, fps)
