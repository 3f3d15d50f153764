"""Dense matrix helpers, seeded RNG streams and Hadamard rotation.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 in C (row-major)
order.  The helpers here validate shapes and finiteness so the rest of the
package can assume well-formed inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput, NotPowerOfTwo

MAX_HADAMARD_ORDER = 4096


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite, 2-D, C-contiguous float64 array."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return m


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def transpose(a) -> np.ndarray:
    return np.ascontiguousarray(as_matrix(a).T)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    """Orthonormal Sylvester-Hadamard matrix; entries are +-1/sqrt(order)."""

    order: int
    data: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


@lru_cache(maxsize=16)
def _sylvester(order: int) -> np.ndarray:
    h = np.ones((1, 1))
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    h = h / np.sqrt(order)
    h.setflags(write=False)
    return h


def build_hadamard(order: int) -> HadamardMatrix:
    order = int(order)
    if not is_power_of_two(order):
        raise NotPowerOfTwo(f"Hadamard order must be a power of two, got {order}")
    if order > MAX_HADAMARD_ORDER:
        raise ValueError(f"Hadamard order {order} exceeds {MAX_HADAMARD_ORDER}")
    return HadamardMatrix(order, _sylvester(order))


def rotate_pair(w, x, h: HadamardMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Rotate weights and activations along their shared channel axis.

    Returns ``(H @ W, H @ X)``; since ``H`` is orthonormal the projection
    ``W.T @ X`` is unchanged while outlier channels get spread over all rows.
    """
    w = as_matrix(w, "W")
    x = as_matrix(x, "X")
    d = w.shape[0]
    if x.shape[0] != d or h.order != d:
        raise DimensionMismatch(
            f"channel dims differ: W has {d}, X has {x.shape[0]}, H has order {h.order}"
        )
    return h.data @ w, h.data @ x


def channel_spread(x) -> float:
    """Ratio of the largest to the median per-channel max magnitude."""
    x = as_matrix(x)
    peaks = np.abs(x).max(axis=1)
    med = float(np.median(peaks))
    return float(peaks.max()) / med if med > 0 else float("inf")


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator keyed on ``(seed, *stream)``.

    The key goes through ``SeedSequence`` so every (seed, stream) pair gets an
    independent, platform-stable bit stream.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1), *stream])))


def derive_seed(master: int, index: int) -> int:
    """64-bit seed for trial ``index`` of a run keyed on ``master``."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def topk_indices(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores, ties broken toward the lower index."""
    s = np.asarray(scores, dtype=np.float64)
    return np.argsort(-s, kind="stable")[:k]
