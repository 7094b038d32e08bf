"""Linear precoders over a stacked cluster channel and the resulting SINR.

Channel matrices are ``(MB, K)``: column ``i`` is the stacked channel of
scheduled user ``i`` across all ``B`` cooperating BSs. Leading batch axes are
allowed in :func:`zf_beams` and :func:`rzf_beams`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError, ParameterError

# |R_ii| below this fraction of the largest |R_jj| counts as rank deficient.
_RANK_RTOL = 1e-10


@dataclass
class BeamSet:
    beams: np.ndarray
    per_beam_power: float = 1.0

    @property
    def n_beams(self) -> int:
        return self.beams.shape[-1]

    @property
    def total_power(self) -> float:
        return self.per_beam_power * self.n_beams


@dataclass
class SinrSample:
    signal_power: np.ndarray
    interference_power: np.ndarray
    gamma: np.ndarray
    rate: np.ndarray


def per_beam_power(n_bs: int, P_T: float, n_beams: int) -> float:
    """Equal split of the pooled cluster power ``B P_T`` over ``K`` beams."""
    if n_beams < 1 or n_bs < 1:
        raise ParameterError("need at least one BS and one beam")
    return n_bs * P_T / n_beams


def _as_matrix(channels) -> np.ndarray:
    if isinstance(channels, (list, tuple)):
        G = np.column_stack([np.asarray(c, dtype=complex).ravel() for c in channels])
    else:
        G = np.asarray(channels, dtype=complex)
    if G.ndim < 2:
        G = G.reshape(-1, 1)
    if G.shape[-1] > G.shape[-2]:
        raise ParameterError(f"K = {G.shape[-1]} users exceed {G.shape[-2]} antennas")
    return G


def _normalise_columns(W: np.ndarray) -> np.ndarray:
    return W / np.linalg.norm(W, axis=-2, keepdims=True)


def zf_beams(channels, power: float = 1.0) -> BeamSet:
    """Unit-norm ZF beams ``W = Q R^{-H}`` from the reduced QR of ``G``.

    ``G^H W`` is diagonal, so column ``i`` is the projection of ``g_i`` onto
    the orthogonal complement of the other users' channels.
    """
    G = _as_matrix(channels)
    Q, R = np.linalg.qr(G)
    diag = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
    if np.any(diag <= _RANK_RTOL * diag.max(axis=-1, keepdims=True)) or not np.all(diag > 0):
        raise DegenerateChannelError("channel matrix is rank deficient")
    # W^H = R^{-1} Q^H
    WH = np.linalg.solve(R, np.swapaxes(Q, -1, -2).conj())
    return BeamSet(_normalise_columns(np.swapaxes(WH, -1, -2).conj()), power)


def zf_beams_projection(channels, power: float = 1.0) -> BeamSet:
    """Reference ZF: explicit projection of each ``g_i`` off ``span(G_{-i})``."""
    G = _as_matrix(channels)
    if G.ndim != 2:
        raise ParameterError("reference ZF takes a single channel matrix")
    n, K = G.shape
    W = np.empty_like(G)
    for i in range(K):
        g = G[:, i]
        others = np.delete(G, i, axis=1)
        if others.shape[1]:
            Q, R = np.linalg.qr(others)
            d = np.abs(np.diag(R))
            if np.any(d <= _RANK_RTOL * max(d.max(), np.linalg.norm(g))):
                raise DegenerateChannelError("G_{-i} is rank deficient")
            g = g - Q @ (Q.conj().T @ g)
        norm = np.linalg.norm(g)
        if norm <= _RANK_RTOL * np.linalg.norm(G[:, i]):
            raise DegenerateChannelError(f"user {i} lies in the span of the others")
        W[:, i] = g / norm
    return BeamSet(W, power)


def zf_beams_pinv(channels, power: float = 1.0) -> BeamSet:
    """Reference ZF from the pseudo-inverse: beams are normalised columns of ``(G^+)^H``."""
    G = _as_matrix(channels)
    return BeamSet(_normalise_columns(np.linalg.pinv(G).conj().swapaxes(-1, -2)), power)


def rzf_beams(channels, reg: float, power: float = 1.0) -> BeamSet:
    """Regularised channel inversion ``G (G^H G + reg I)^{-1}``, columns unit-normalised."""
    if reg < 0:
        raise ParameterError("regularisation must be non-negative")
    G = _as_matrix(channels)
    K = G.shape[-1]
    gram = np.swapaxes(G, -1, -2).conj() @ G + reg * np.eye(K)
    # G A^{-1} = (A^{-H} G^H)^H, and A is Hermitian.
    W = np.swapaxes(np.linalg.solve(gram, np.swapaxes(G, -1, -2).conj()), -1, -2).conj()
    return BeamSet(_normalise_columns(W), power)


def beam_gains(H, W) -> np.ndarray:
    """``|h_u^H w_k|^2`` for every user column of ``H`` and beam column of ``W``."""
    return np.abs(np.swapaxes(np.asarray(H), -1, -2).conj() @ np.asarray(W)) ** 2


def sinr(user_channel, own_beam, own_power: float, interferers=(), noise: float = 1.0, gap: float = 1.0) -> SinrSample:
    """Downlink SINR of one user and its rate ``log2(1 + gamma / gap)``.

    ``interferers`` holds ``(f_j, BeamSet_j)`` pairs: the user's stacked
    channel from cluster ``j`` and that cluster's beams.
    """
    g = np.asarray(user_channel, dtype=complex).ravel()
    w = np.asarray(own_beam, dtype=complex).ravel()
    if g.shape != w.shape:
        raise ParameterError("user channel and beam dimensions differ")
    signal = own_power * abs(np.vdot(g, w)) ** 2
    interference = 0.0
    for f, beams in interferers:
        f = np.asarray(f, dtype=complex).ravel()
        if f.shape[0] != beams.beams.shape[0]:
            raise ParameterError("interfering channel and beam dimensions differ")
        interference += beams.per_beam_power * float(np.sum(np.abs(f.conj() @ beams.beams) ** 2))
    gamma = signal / (interference + noise)
    return SinrSample(signal, interference, gamma, np.log2(1.0 + gamma / gap))
