"""Invariant checks run by the ``validate`` experiment.

Each check returns a :class:`Check` with the measured quantity and the
threshold it was held to. The checks are fast versions of the property tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import analytic, beamforming, gamma_matching, geometry, montecarlo
from .config import SystemConfig


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    kind: str = "analytic"
    detail: str = ""


def _kernel_agreement(config: SystemConfig, rng) -> Check:
    worst = 0.0
    for _ in range(12):
        eta = rng.uniform(0.1, 1.0)
        b = rng.uniform(1.0, 12.0)
        p = analytic.AnalyticParams.from_config(config, eta, b)
        theta = rng.uniform(-math.pi, math.pi)
        d = p.R_c * rng.uniform(0.0, 0.95)
        z = 10 ** rng.uniform(-14, 0)
        for kind, fn in analytic._KERNELS.items():
            ref = analytic.kernel_by_quadrature(kind, theta, z, d, p)
            val = float(fn(theta, z, d, p))
            worst = max(worst, abs(val - ref) / max(abs(ref), 1e-300))
    return Check("kernel-2F1-vs-quadrature", worst <= 1e-6, worst, 1e-6)


def _log_identity() -> Check:
    worst = max(abs(analytic.log_identity(x) - math.log1p(x)) for x in (0.1, 1.0, 10.0))
    return Check("log-integral-identity", worst <= 1e-8, worst, 1e-8)


def _moment_match(rng) -> Check:
    comps = [(rng.uniform(0.5, 5), rng.uniform(0.1, 3)) for _ in range(6)]
    g = gamma_matching.moment_match(comps)
    m1 = sum(k * t for k, t in comps)
    m2 = sum(k * t * t for k, t in comps)
    err = max(abs(g.mean - m1) / m1, abs(g.var - m2) / m2)
    return Check("moment-matching-equality", err <= 1e-12, err, 1e-12)


def _zf_orthogonality(rng) -> Check:
    worst = 0.0
    for K, n in ((3, 10), (8, 20), (12, 15)):
        G = (rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K))) * rng.uniform(1e-6, 1, n)[:, None]
        W = beamforming.zf_beams(G).beams
        X = np.abs(G.conj().T @ W) ** 2 / np.sum(np.abs(G) ** 2, axis=0)[:, None]
        worst = max(worst, float(np.max(X[~np.eye(K, dtype=bool)])))
    return Check("zf-orthogonality", worst < 1e-12, worst, 1e-12)


def _isotropic_ks(config: SystemConfig, rng) -> Check:
    M, B, K = config.M, 2, 6
    beta = np.full(B, 0.3)
    plan = montecarlo.SimPlan(n_topologies=1, n_fading_per_topology=4000, seed=int(rng.integers(2**32)))
    s = montecarlo.collect_power_samples(plan, config, beta, K)
    p = stats.kstest(s.signal, stats.gamma(a=M * B - K + 1, scale=0.3).cdf).pvalue
    return Check("isotropic-projected-power-ks", p > 0.01, p, 0.01, "montecarlo")


def _mgf_bounds(config: SystemConfig) -> Check:
    p = analytic.AnalyticParams.from_config(config, 0.6, 4)
    z = np.logspace(-16, 2, 40)
    log_ms, log_mi = analytic._log_mgf_terms(np.array([0.0, 0.5 * p.R_c, p.R_c]), z, p,
                                             analytic.QuadratureSpec(), "analytic-2F1", True)
    ok = bool(np.all(log_ms >= 0) and np.all(log_mi >= 0) and np.all(np.isfinite(log_ms)))
    return Check("mgf-in-unit-interval", ok, float(min(log_ms.min(), log_mi.min())), 0.0)


def _asymptotic_bound(config: SystemConfig, settings) -> Check:
    zero = analytic.asymptotic_upper_bound(analytic.AnalyticParams.from_config(config, 1.0, 4))
    margin = math.inf
    for b in (64, 256):
        p = analytic.AnalyticParams.from_config(config, 0.6, b)
        margin = min(margin, analytic.asymptotic_upper_bound(p) - analytic.per_bs_ergodic_sum_rate(p, settings.quad()).value)
    return Check("asymptotic-bound", zero == 0.0 and margin >= 0, margin, 0.0,
                 detail=f"bound at eta=1 is {zero}")


def _strength_bounds(config: SystemConfig, settings) -> Check:
    """Monte Carlo E||g||^2 and E|g^H w|^2 at the cluster centre against their bounds."""
    worst = -math.inf
    for b in (2, 4, 10):
        p = analytic.AnalyticParams.from_config(config, 0.6, b)
        mean_g, mean_s = _centre_strength(config, b, 0.6, n=max(50, settings.topologies), seed=settings.seed)
        worst = max(worst, mean_g / analytic.expected_channel_strength_bound(p))
        if b in (2, 4):
            worst = max(worst, mean_s / analytic.finite_Rc_signal_bound(p))
    return Check("strength-bounds-dominate", worst <= 1.0, worst, 1.0, "montecarlo")


def _centre_strength(config: SystemConfig, avg_cluster_size: float, eta: float, n: int, seed: int):
    """Mean ||g||^2 and ZF |g^H w|^2 of a user at the centre of a Poisson cluster disc."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(7,))))
    M = config.M
    R = math.sqrt(avg_cluster_size / (config.lambda_ * math.pi))
    g_acc, s_acc = 0.0, 0.0
    for _ in range(n):
        B = rng.poisson(avg_cluster_size)
        if B == 0:
            continue
        r = R * np.sqrt(rng.uniform(size=B))
        phi = rng.uniform(0, 2 * math.pi, B)
        bs = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
        K = max(1, int(math.floor(eta * M * B + 0.5)))
        others = geometry.sample_in_disc(R, K - 1, rng)
        users = np.vstack([[0.0, 0.0], others])
        dist = np.hypot(users[:, None, 0] - bs[None, :, 0], users[:, None, 1] - bs[None, :, 1])
        beta = (1 + dist / config.d_o) ** (-config.alpha)
        h = (rng.standard_normal((K, B, M)) + 1j * rng.standard_normal((K, B, M))) * math.sqrt(0.5)
        H = (np.sqrt(beta)[..., None] * h).reshape(K, B * M).T
        W = beamforming.zf_beams(H).beams
        g_acc += float(np.sum(np.abs(H[:, 0]) ** 2))
        s_acc += float(np.abs(np.vdot(H[:, 0], W[:, 0])) ** 2)
    return g_acc / n, s_acc / n


def run_checks(config: SystemConfig, settings, include_montecarlo: bool = True):
    rng = np.random.default_rng(settings.seed)
    checks = [
        _kernel_agreement(config, rng),
        _log_identity(),
        _moment_match(rng),
        _zf_orthogonality(rng),
        _mgf_bounds(config),
        _asymptotic_bound(config, settings),
    ]
    if include_montecarlo:
        checks += [_isotropic_ks(config, rng), _strength_bounds(config, settings)]
    return checks
