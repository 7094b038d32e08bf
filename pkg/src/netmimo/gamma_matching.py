"""Gamma surrogates for signal and inter-cluster interference powers.

Sums of independent Gamma variables are replaced by a single Gamma with the
same mean and variance. The chain goes

    channel strength      -> Gamma(k, theta) by moment matching
    projected powers      -> shape scaled by the fraction of spatial dimensions
    per-BS decomposition  -> sum_b beta_b * kappa  (signal)
                             sum_m beta_m * psi_m  (interference)

where the decomposed forms only depend on one BS distance per term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ParameterError


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0 and np.isfinite(self.shape) and np.isfinite(self.scale)):
            raise ParameterError(f"Gamma parameters must be positive and finite, got {self}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def var(self) -> float:
        return self.shape * self.scale**2

    def dist(self):
        return stats.gamma(a=self.shape, scale=self.scale)

    def cdf(self, x):
        return stats.gamma.cdf(x, a=self.shape, scale=self.scale)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, self.scale, size)


@dataclass(frozen=True)
class MatchedChannelStats:
    intended: GammaParams
    interferers: tuple


def moment_match(components) -> GammaParams:
    """Single Gamma with the mean and variance of a sum of independent Gammas.

    ``components`` is an iterable of ``(shape, scale)`` pairs.
    """
    comps = np.asarray(list(components), dtype=float).reshape(-1, 2)
    if len(comps) == 0:
        raise ParameterError("moment matching needs at least one component")
    k, theta = comps[:, 0], comps[:, 1]
    if np.any(k <= 0) or np.any(theta <= 0):
        raise ParameterError("component shapes and scales must be positive")
    m1 = np.sum(k * theta)
    m2 = np.sum(k * theta**2)
    return GammaParams(shape=float(m1**2 / m2), scale=float(m2 / m1))


def _pathloss_array(pathlosses) -> np.ndarray:
    beta = np.asarray(pathlosses, dtype=float).ravel()
    if beta.size == 0:
        raise ParameterError("path-loss list must be non-empty")
    if np.any(beta <= 0) or np.any(beta > 1):
        raise ParameterError("path-loss gains must lie in (0, 1]")
    return beta


def intended_channel_params(pathlosses, M: int) -> GammaParams:
    """Gamma surrogate of ||g||^2 for a stacked channel with per-BS gains ``pathlosses``.

    ``k = M (sum beta)^2 / sum beta^2``, ``theta = sum beta^2 / sum beta``.
    Equivalent to :func:`moment_match` over ``(M, beta_b)`` components.
    """
    beta = _pathloss_array(pathlosses)
    s1, s2 = beta.sum(), np.sum(beta**2)
    return GammaParams(shape=float(M * s1**2 / s2), scale=float(s2 / s1))


def interference_channel_params(pathlosses, M: int) -> GammaParams:
    """Same surrogate for the stacked channel from an interfering cluster."""
    return intended_channel_params(pathlosses, M)


def diversity_order(M: int, n_bs: float, eta: float) -> float:
    """Dimension of the ZF beamforming subspace, ``M B (1 - eta) + 1``."""
    return M * n_bs * (1.0 - eta) + 1.0


def signal_power_params(intended: GammaParams, M: int, B_l: int, eta: float) -> GammaParams:
    """Projected signal power |g^H w|^2 under ZF.

    Each of the ``M B_l`` dimensions contributes ``k / (M B_l)`` to the shape,
    and the beam keeps ``M B_l (1 - eta) + 1`` of them.
    """
    if not 0 < eta <= 1:
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    zeta = diversity_order(M, B_l, eta)
    return GammaParams(shape=intended.shape * zeta / (M * B_l), scale=intended.scale)


def interference_beam_power_params(interf: GammaParams, M: int, B_j: int, n_beams: float = 1) -> GammaParams:
    """Interference power from ``n_beams`` orthogonal beams of cluster j.

    A single beam gives shape ``k / (M B_j)``; with ``n_beams = eta M B_j``
    the aggregate shape becomes ``eta k``.
    """
    if n_beams <= 0:
        raise ParameterError("n_beams must be positive")
    return GammaParams(shape=interf.shape * n_beams / (M * B_j), scale=interf.scale)


def matched_channel_stats(serving_pathlosses, interferer_pathlosses, M: int) -> MatchedChannelStats:
    return MatchedChannelStats(
        intended=intended_channel_params(serving_pathlosses, M),
        interferers=tuple(interference_channel_params(b, M) for b in interferer_pathlosses),
    )


def signal_kappa_shape(M: int, n_bs: float, eta: float) -> float:
    """Per-BS Gamma shape ``(M B (1 - eta) + 1) / B`` of the decomposed signal."""
    if n_bs < 1:
        raise ParameterError("cluster size must be >= 1")
    return diversity_order(M, n_bs, eta) / n_bs


def per_bs_signal_surrogate(pathlosses, M: int, B_l: int, eta: float, rng: np.random.Generator, size=None):
    """Signal power as ``sum_b beta_b kappa_b`` with independent kappa_b.

    The shape of each kappa_b uses the actual cluster size ``B_l``.
    """
    beta = _pathloss_array(pathlosses)
    shape = signal_kappa_shape(M, B_l, eta)
    n = () if size is None else tuple(np.atleast_1d(size))
    kappa = rng.gamma(shape, 1.0, n + (beta.size,))
    return kappa @ beta


def decomposed_signal_surrogate(
    pathlosses, M: int, avg_cluster_size: float, eta: float, rng: np.random.Generator,
    size=None, shared: bool = True,
):
    """Signal power with the cluster size replaced by its mean.

    With ``shared=True`` one kappa ~ Gamma((M B (1 - eta) + 1) / B, 1) multiplies
    the whole path-loss sum. ``shared=False`` draws an independent kappa per BS,
    which is the form whose Laplace transform factorises over BSs.
    """
    beta = _pathloss_array(pathlosses)
    shape = signal_kappa_shape(M, avg_cluster_size, eta)
    n = () if size is None else tuple(np.atleast_1d(size))
    if shared:
        return rng.gamma(shape, 1.0, n) * beta.sum()
    return rng.gamma(shape, 1.0, n + (beta.size,)) @ beta


def decomposed_interference_surrogate(pathlosses, M: int, eta: float, rng: np.random.Generator, size=None):
    """Cluster interference ``sum_m beta_m psi_m`` with i.i.d. psi_m ~ Gamma(eta M, 1)."""
    if not 0 < eta <= 1:
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    beta = _pathloss_array(pathlosses)
    n = () if size is None else tuple(np.atleast_1d(size))
    psi = rng.gamma(eta * M, 1.0, n + (beta.size,))
    return psi @ beta
