"""Bounded path loss, Rayleigh fading and stacked multi-BS channels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PathLossParams:
    d_o: float = 0.3920
    alpha: float = 3.76

    def __post_init__(self):
        if not self.alpha > 2:
            raise ParameterError(f"alpha > 2 required, got {self.alpha}")
        if not self.d_o > 0:
            raise ParameterError(f"d_o > 0 required, got {self.d_o}")


@dataclass
class CompositeChannel:
    coeffs: np.ndarray
    per_bs_pathloss: np.ndarray

    @property
    def n_bs(self) -> int:
        return len(self.per_bs_pathloss)


def path_loss(r, p: PathLossParams):
    """Bounded path-loss gain ``(1 + r / d_o) ** -alpha``; equals 1 at r = 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterError("distance must be non-negative")
    out = (1.0 + r / p.d_o) ** (-p.alpha)
    return out if out.ndim else float(out)


def sample_fading(dim: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """CN(0, I) samples; ``size`` prefixes extra leading axes."""
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    shape = (dim,) if size is None else tuple(np.atleast_1d(size)) + (dim,)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def composite_channel(user, bs_list, M: int, p: PathLossParams, rng: np.random.Generator) -> CompositeChannel:
    """Stacked channel from every BS in ``bs_list`` to ``user``.

    Block ``b`` (entries ``b*M:(b+1)*M``) is ``sqrt(beta_b) h_b`` with fresh
    ``h_b ~ CN(0, I_M)``.
    """
    bs = np.atleast_2d(np.asarray(bs_list, dtype=float))
    if bs.size == 0:
        raise ParameterError("bs_list must be non-empty")
    r = np.hypot(*(bs - np.asarray(user, dtype=float)).T)
    beta = np.atleast_1d(path_loss(r, p))
    h = sample_fading(M, rng, size=len(bs))
    return CompositeChannel(coeffs=(np.sqrt(beta)[:, None] * h).reshape(-1), per_bs_pathloss=beta)


def pairwise_distances(a, b) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
