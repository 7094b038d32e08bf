"""Per-BS ergodic sum rate of clustered ZF network MIMO from stochastic geometry.

The rate of a user at distance ``d`` from the cluster centre is written as

    int_0^inf exp(-z Gamma) / z * M_I(z) * (1 - M_S(z)) dz      [nats]

where ``M_S`` and ``M_I`` are the Laplace transforms of the (Gamma surrogate)
signal and out-of-cluster interference powers, both normalised by the noise
power. Each transform is ``exp(-lambda int_0^{2 pi} K(theta) dtheta)`` with a
kernel ``K`` that reduces to Gauss hypergeometric functions of the
``2F1(a, b; 1 + b; -y)`` family.

The kernels can also be evaluated by direct radial quadrature, which serves as
an independent check of the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import geometry
from .config import SystemConfig, stable_digest
from .errors import NumericalFailure, ParameterError
from .hypergeom import hyp2f1m1

LN2 = math.log(2.0)
# exp(-z Gamma) below this relative level is dropped from the z integral.
_Z_UPPER_DECAY = 1e-12
# (1 - M_S) ~ z E[S] near the origin; nodes start where this is negligible.
_Z_LOWER_MASS = 1e-10
# Beyond this level of a*c*x^-alpha the interference integrand is linear in c.
_TAIL_LINEAR = 1e-10

METHODS = ("analytic-2F1", "analytic-quadrature", "monte-carlo")


@dataclass(frozen=True)
class AnalyticParams:
    """Inputs of the analytic rate expression.

    ``rho`` is the per-beam SNR ``P_T / (eta M sigma^2)``; ``gap`` is linear.
    ``R_c`` and ``varpi`` are derived, so they always agree with the rest.
    """

    lambda_: float
    M: int
    eta: float
    avg_cluster_size: float
    rho: float
    gap: float
    alpha: float
    d_o: float

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ParameterError(f"lambda must be positive, got {self.lambda_}")
        if not (int(self.M) == self.M and self.M >= 1):
            raise ParameterError(f"M must be a positive integer, got {self.M}")
        if not 0 < self.eta <= 1:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if not self.avg_cluster_size >= 1:
            raise ParameterError(f"average cluster size must be >= 1, got {self.avg_cluster_size}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ParameterError(f"rho must be positive and finite, got {self.rho}")
        if not self.gap >= 1:
            raise ParameterError(f"linear gap must be >= 1, got {self.gap}")
        if not self.alpha > 2:
            raise ParameterError(f"alpha > 2 required, got {self.alpha}")
        if not self.d_o > 0:
            raise ParameterError(f"d_o must be positive, got {self.d_o}")
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def from_config(cls, config: SystemConfig, eta: float, avg_cluster_size: float, rho: float | None = None):
        return cls(
            lambda_=config.lambda_,
            M=config.M,
            eta=float(eta),
            avg_cluster_size=float(avg_cluster_size),
            rho=config.snr(eta) if rho is None else float(rho),
            gap=config.gap_linear,
            alpha=config.alpha,
            d_o=config.d_o,
        )

    @property
    def R_c(self) -> float:
        return geometry.cluster_radius(self.avg_cluster_size, self.lambda_)

    @property
    def varpi(self) -> float:
        return (self.M * self.avg_cluster_size * (1.0 - self.eta) + 1.0) / self.avg_cluster_size

    @property
    def n_beams_per_bs(self) -> float:
        return self.eta * self.M

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambda_, "M": self.M, "eta": self.eta,
            "avg_cluster_size": self.avg_cluster_size, "rho": self.rho,
            "gap": self.gap, "alpha": self.alpha, "d_o": self.d_o,
        }

    def digest(self) -> str:
        return stable_digest(self.to_dict())


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and tolerances of the nested rate integral.

    ``tail_split`` is a multiple of the boundary distance ``l_theta`` beyond
    which the interference integrand is replaced by its small-argument form.
    """

    z_nodes: int = 161
    theta_nodes: int = 32
    d_nodes: int = 24
    radial_rel_tol: float = 1e-6
    rate_rel_tol: float = 1e-4
    tail_split: float = 10.0

    def __post_init__(self):
        for name in ("z_nodes", "theta_nodes", "d_nodes"):
            v = getattr(self, name)
            if int(v) != v or v < 8:
                raise ParameterError(f"{name} must be an integer >= 8, got {v}")
        for name in ("radial_rel_tol", "rate_rel_tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if not self.tail_split > 1:
            raise ParameterError("tail_split must exceed 1")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class RateResult:
    value: float
    method: str
    ci_halfwidth: float = 0.0
    params_digest: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}")
        if not self.value >= 0:
            raise ParameterError(f"rate must be non-negative, got {self.value}")

    @property
    def nats(self) -> float:
        return self.value * LN2


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def _x_theta(theta, d, params: AnalyticParams):
    return 1.0 + geometry.boundary_distance(d, theta, params.R_c) / params.d_o


def psi_I(theta, z, d, params: AnalyticParams):
    """Interference kernel, second-moment part. Broadcasts over the inputs."""
    x = _x_theta(theta, d, params)
    y = params.rho * np.asarray(z) * params.gap * x ** (-params.alpha)
    return params.d_o**2 * x**2 / 2.0 * hyp2f1m1(params.eta * params.M, -2.0 / params.alpha, y)


def psi_II(theta, z, d, params: AnalyticParams):
    """Interference kernel, first-moment part."""
    x = _x_theta(theta, d, params)
    y = params.rho * np.asarray(z) * params.gap * x ** (-params.alpha)
    return params.d_o**2 * x * hyp2f1m1(params.eta * params.M, -1.0 / params.alpha, y)


def upsilon_I(theta, z, d, params: AnalyticParams):
    """Signal kernel, second-moment part."""
    x = _x_theta(theta, d, params)
    z = np.asarray(z, dtype=float)
    b = -2.0 / params.alpha
    edge = hyp2f1m1(params.varpi, b, params.rho * z * x ** (-params.alpha))
    origin = hyp2f1m1(params.varpi, b, params.rho * z)
    return -params.d_o**2 * x**2 / 2.0 * edge + params.d_o**2 / 2.0 * origin


def upsilon_II(theta, z, d, params: AnalyticParams):
    """Signal kernel, first-moment part."""
    x = _x_theta(theta, d, params)
    z = np.asarray(z, dtype=float)
    b = -1.0 / params.alpha
    edge = hyp2f1m1(params.varpi, b, params.rho * z * x ** (-params.alpha))
    origin = hyp2f1m1(params.varpi, b, params.rho * z)
    return -params.d_o**2 * x * edge + params.d_o**2 * origin


_KERNELS = {"psi_I": psi_I, "psi_II": psi_II, "upsilon_I": upsilon_I, "upsilon_II": upsilon_II}


def _g(x, a, c, alpha):
    # (1 + c x^-alpha)^-a - 1 without cancellation.
    return np.expm1(-a * np.log1p(c * x ** (-alpha)))


def _x_moment_integral(n: int, x_lo: float, x_hi: float, a: float, c: float, alpha: float, rel_tol: float):
    """int_{x_lo}^{x_hi} g(x) x^(n-1) dx in the variable t = ln x."""
    if x_hi <= x_lo:
        return 0.0
    val, err = integrate.quad(
        lambda t: _g(math.exp(t), a, c, alpha) * math.exp(n * t),
        math.log(x_lo), math.log(x_hi), epsabs=0.0, epsrel=rel_tol, limit=400,
    )
    return val


def _x_moment_tail(n: int, x_lo: float, a: float, c: float, alpha: float, rel_tol: float, tail_split: float):
    """int_{x_lo}^inf g(x) x^(n-1) dx, with a closed-form linearised far tail."""
    x_s = max(tail_split * x_lo, (a * c / _TAIL_LINEAR) ** (1.0 / alpha))
    head = _x_moment_integral(n, x_lo, x_s, a, c, alpha, rel_tol)
    tail = -a * c * x_s ** (n - alpha) / (alpha - n)
    return head + tail


def kernel_by_quadrature(kind: str, theta: float, z: float, d: float, params: AnalyticParams,
                         quad: QuadratureSpec | None = None) -> float:
    """Scalar kernel value from its defining radial integral.

    Independent of the hypergeometric reduction; used as a reference.
    """
    quad = quad or QuadratureSpec()
    tol = quad.radial_rel_tol * 1e-3
    X = float(_x_theta(theta, d, params))
    if kind in ("psi_I", "psi_II"):
        n = 2 if kind == "psi_I" else 1
        c = params.rho * z * params.gap
        return -params.d_o**2 * _x_moment_tail(n, X, params.eta * params.M, c, params.alpha, tol, quad.tail_split)
    if kind in ("upsilon_I", "upsilon_II"):
        n = 2 if kind == "upsilon_I" else 1
        return -params.d_o**2 * _x_moment_integral(n, 1.0, X, params.varpi, params.rho * z, params.alpha, tol)
    raise ParameterError(f"unknown kernel {kind!r}")


def interference_radial_integral(l: float, z: float, params: AnalyticParams, quad: QuadratureSpec | None = None) -> float:
    """int_l^inf ((1 + z rho Gamma beta(r))^(-eta M) - 1) r dr  (non-positive)."""
    quad = quad or QuadratureSpec()
    tol = quad.radial_rel_tol * 1e-3
    X = 1.0 + l / params.d_o
    a, c = params.eta * params.M, params.rho * z * params.gap
    m2 = _x_moment_tail(2, X, a, c, params.alpha, tol, quad.tail_split)
    m1 = _x_moment_tail(1, X, a, c, params.alpha, tol, quad.tail_split)
    return params.d_o**2 * (m2 - m1)


def signal_radial_integral(l: float, z: float, params: AnalyticParams, quad: QuadratureSpec | None = None) -> float:
    """int_0^l ((1 + z rho beta(r))^(-varpi) - 1) r dr  (non-positive)."""
    quad = quad or QuadratureSpec()
    if l <= 0:
        return 0.0
    tol = quad.radial_rel_tol * 1e-3
    a, c = params.varpi, params.rho * z
    val, _ = integrate.quad(
        lambda r: _g(1.0 + r / params.d_o, a, c, params.alpha) * r,
        0.0, l, epsabs=0.0, epsrel=tol, limit=400,
        points=[p for p in (10 * params.d_o, 100 * params.d_o) if p < l] or None,
    )
    return val


# ---------------------------------------------------------------------------
# Rate integrals
# ---------------------------------------------------------------------------

def _theta_grid(n: int):
    # l(theta) = l(pi - theta): integrate [-pi/2, pi/2] and double.
    theta = -math.pi / 2 + (np.arange(n) + 0.5) * math.pi / n
    return theta, 2.0 * math.pi / n


def _signal_mean_bound(params: AnalyticParams) -> float:
    return params.rho * params.varpi * params.lambda_ * 2 * math.pi * params.d_o**2 / (
        (params.alpha - 1) * (params.alpha - 2)
    )


def _log_z_grid(mean_bound: float, gap: float, n: int):
    n = n if n % 2 else n + 1
    u = np.linspace(math.log(_Z_LOWER_MASS / mean_bound), math.log(math.log(1.0 / _Z_UPPER_DECAY) / gap), n)
    return u


def _trapezoid_with_check(values, u):
    """Trapezoid rule on a uniform grid, plus the same rule on every other node."""
    h = u[1] - u[0]
    full = h * (values.sum(axis=-1) - 0.5 * (values[..., 0] + values[..., -1]))
    half_v = values[..., ::2]
    coarse = 2 * h * (half_v.sum(axis=-1) - 0.5 * (half_v[..., 0] + half_v[..., -1]))
    return full, np.abs(full - coarse)


def _log_mgf_terms(d, z, params: AnalyticParams, quad: QuadratureSpec, method: str, interference: bool):
    """lambda * int_0^{2pi} kernel dtheta for the signal and interference parts.

    Returns arrays of shape ``(len(d), len(z))``.
    """
    theta, w = _theta_grid(quad.theta_nodes)
    D = np.asarray(d, dtype=float)[:, None, None]
    Z = np.asarray(z, dtype=float)[None, :, None]
    T = theta[None, None, :]
    shape = (D.shape[0], Z.shape[1], T.shape[2])
    if method == "analytic-2F1":
        sig = np.broadcast_to(upsilon_I(T, Z, D, params) - upsilon_II(T, Z, D, params), shape)
        if interference:
            itf = np.broadcast_to(psi_I(T, Z, D, params) - psi_II(T, Z, D, params), shape)
    elif method == "analytic-quadrature":
        l = np.broadcast_to(geometry.boundary_distance(D, T, params.R_c), shape)
        sig = np.empty(shape)
        itf = np.empty(shape)
        zz = np.broadcast_to(Z, shape)
        for idx in np.ndindex(*shape):
            sig[idx] = -signal_radial_integral(l[idx], zz[idx], params, quad)
            if interference:
                itf[idx] = -interference_radial_integral(l[idx], zz[idx], params, quad)
    else:
        raise ParameterError(f"unknown analytic method {method!r}")
    log_ms = params.lambda_ * w * sig.sum(axis=-1)
    log_mi = params.lambda_ * w * itf.sum(axis=-1) if interference else np.zeros_like(log_ms)
    return log_ms, log_mi


def rate_profile(d, params: AnalyticParams, quad: QuadratureSpec | None = None,
                 method: str = "analytic-2F1", interference: bool = True):
    """Ergodic rate in nats of users at distances ``d`` and its error estimate."""
    quad = quad or QuadratureSpec()
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d < 0) or np.any(d > params.R_c * (1 + 1e-12)):
        raise ParameterError("user distance must lie in [0, R_c]")
    u = _log_z_grid(_signal_mean_bound(params), params.gap, quad.z_nodes)
    z = np.exp(u)
    log_ms, log_mi = _log_mgf_terms(d, z, params, quad, method, interference)
    # dz / z = du; (1 - M_S) computed via expm1 to keep small-z accuracy.
    integrand = np.exp(-z * params.gap - log_mi) * -np.expm1(-log_ms)
    if not np.all(np.isfinite(integrand)) or np.any(integrand < 0):
        raise NumericalFailure(
            "non-finite or negative z integrand",
            diagnostics={"params": params.to_dict(), "method": method},
        )
    value, err = _trapezoid_with_check(integrand, u)
    bad = err > quad.rate_rel_tol * np.abs(value) + 1e-12
    if np.any(bad):
        raise NumericalFailure(
            "z integral did not converge",
            diagnostics={
                "params": params.to_dict(), "d": d[bad].tolist(),
                "estimate": value[bad].tolist(), "error": err[bad].tolist(),
                "z_nodes": len(u),
            },
        )
    return value, err


def ergodic_rate_at_distance(d: float, params: AnalyticParams, quad: QuadratureSpec | None = None,
                             method: str = "analytic-2F1", interference: bool = True) -> float:
    """Ergodic rate (bits/s/Hz) of a scheduled user at distance ``d`` from the cluster centre."""
    value, _ = rate_profile([d], params, quad, method, interference)
    return float(value[0] / LN2)


def per_bs_ergodic_sum_rate(params: AnalyticParams, quad: QuadratureSpec | None = None,
                            method: str = "analytic-2F1", interference: bool = True) -> RateResult:
    """Per-BS ergodic sum rate in bits/s/Hz.

    Averages the user rate over a uniform position in the cluster disc
    (Gauss-Legendre in ``s = d^2 / R_c^2``) and multiplies by ``eta M``
    scheduled users per BS. ``interference=False`` gives the isolated-cluster
    baseline.
    """
    quad = quad or QuadratureSpec()
    s, w = np.polynomial.legendre.leggauss(quad.d_nodes)
    s, w = (s + 1.0) / 2.0, w / 2.0
    d = params.R_c * np.sqrt(s)
    rates, _ = rate_profile(d, params, quad, method, interference)
    value = params.eta * params.M * float(np.dot(w, rates)) / LN2
    return RateResult(value=max(value, 0.0), method=method, params_digest=params.digest())


# ---------------------------------------------------------------------------
# Baselines and bounds
# ---------------------------------------------------------------------------

def isolated_cell_user_rate(d, config: SystemConfig, eta: float, n_z: int = 401):
    """Rate (bits/s/Hz) of a user at distance ``d`` from a lone BS.

    The BS serves ``K = eta M`` users with per-beam power ``P_T / K`` and the
    ZF signal power is ``beta(d) * Gamma(M - K + 1, 1)``.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    rho = config.snr(eta)
    gap = config.gap_linear
    shape = config.M * (1.0 - eta) + 1.0
    beta = (1.0 + d / config.d_o) ** (-config.alpha)
    n_z = n_z if n_z % 2 else n_z + 1
    u = np.linspace(math.log(_Z_LOWER_MASS / (rho * shape)), math.log(math.log(1.0 / _Z_UPPER_DECAY) / gap), n_z)
    z = np.exp(u)
    integrand = np.exp(-z * gap)[None, :] * -np.expm1(-shape * np.log1p(z[None, :] * rho * beta[:, None]))
    value, _ = _trapezoid_with_check(integrand, u)
    return value / LN2


def isolated_cell_rate(config: SystemConfig, eta: float, radius: float | None = None,
                       d_nodes: int = 64) -> float:
    """Per-BS sum rate of one BS with users uniform in a disc (default area 1/lambda)."""
    radius = radius if radius is not None else math.sqrt(1.0 / (config.lambda_ * math.pi))
    s, w = np.polynomial.legendre.leggauss(d_nodes)
    s, w = (s + 1.0) / 2.0, w / 2.0
    rates = isolated_cell_user_rate(radius * np.sqrt(s), config, eta)
    return eta * config.M * float(np.dot(w, rates))


def expected_channel_strength_bound(params: AnalyticParams) -> float:
    """Upper bound on E||g||^2 of the stacked cluster channel, independent of R_c."""
    return 2 * params.M * params.lambda_ * math.pi * params.d_o**2 / ((params.alpha - 1) * (params.alpha - 2))


def finite_Rc_signal_bound(params: AnalyticParams) -> float:
    """Upper bound on E|g^H w|^2 for a unit-norm ZF beam at finite ``R_c``."""
    denom = (params.alpha - 1) * (params.alpha - 2)
    return (2 * params.d_o**2 / (params.R_c**2 * denom)
            + 2 * params.M * params.lambda_ * math.pi * params.d_o**2 * (1 - params.eta) / denom)


def asymptotic_upper_bound(params: AnalyticParams) -> float:
    """Large-cluster limit bound on the per-BS rate (bits/s/Hz); exactly 0 at ``eta = 1``."""
    snr = 2 * params.rho * params.M * params.lambda_ * math.pi * params.d_o**2 * (1 - params.eta) / (
        params.gap * (params.alpha - 1) * (params.alpha - 2)
    )
    return params.eta * params.M * math.log2(1.0 + snr)


def optimal_loading_factor(config: SystemConfig, avg_cluster_size: float, eta_grid,
                           quad: QuadratureSpec | None = None):
    """Grid search for the rate-maximising loading factor.

    ``rho`` is recomputed for every ``eta``. Ties go to the smaller ``eta``.
    Returns ``(eta_star, etas, rates)`` with rates in bits/s/Hz.
    """
    etas = np.sort(np.asarray(eta_grid, dtype=float))
    if etas.size == 0 or etas[0] <= 0 or etas[-1] > 1:
        raise ParameterError("eta grid must be non-empty and within (0, 1]")
    if etas.size > 1 and np.max(np.diff(etas)) > 0.05 + 1e-9:
        raise ParameterError("eta grid step must be <= 0.05")
    rates = np.array([
        per_bs_ergodic_sum_rate(AnalyticParams.from_config(config, e, avg_cluster_size), quad).value
        for e in etas
    ])
    return float(etas[int(np.argmax(rates))]), etas, rates


def log_identity(x: float) -> float:
    """ln(1 + x) evaluated as int_0^inf exp(-t) / t * (1 - exp(-x t)) dt."""
    if x < 0:
        raise ParameterError("x must be non-negative")
    val, _ = integrate.quad(lambda t: math.exp(-t) * -math.expm1(-x * t) / t if t > 0 else x,
                            0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return val
