"""Monte Carlo simulation of clustered ZF/RZF network MIMO.

BSs form a Poisson point process over a hexagonal tessellation; each hexagon
is a cooperation cluster (a "group"). Only users of the measured groups get
channels to every BS, which is enough to evaluate their SINR exactly; every
other group only needs its own users' channels to build its beams.

Randomness is drawn from per-topology and per-slot substreams of one
``SeedSequence``, so results do not depend on the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import spatial

from . import geometry
from .beamforming import rzf_beams, zf_beams
from .channel import PathLossParams, path_loss, sample_fading
from .config import SystemConfig
from .errors import DegenerateChannelError, ParameterError
from .gamma_matching import GammaParams, interference_beam_power_params, intended_channel_params

ASSOCIATIONS = ("location-based", "channel-based")
BS_MODELS = ("poisson", "fixed-per-cluster")
BEAMFORMERS = ("zf", "rzf")
SCENARIOS = ("full-network", "isolated-cluster", "isolated-cell", "single-cell-processing")
_MAX_REDRAWS = 10_000
_MAX_DEGENERATE_RETRIES = 5


@dataclass(frozen=True)
class SimPlan:
    """What to simulate and how much.

    ``user_density_factor`` scales the BS density to give the user density of
    the association pool. ``user_distance`` pins one user of each measured
    cluster at that distance from the origin (random angle); in the
    isolated-cell scenario it pins every user.
    """

    n_topologies: int = 200
    n_fading_per_topology: int = 20
    seed: int = 0
    association: str = "location-based"
    bs_count_model: str = "poisson"
    beamformer: str = "zf"
    scenario: str = "full-network"
    eta: float = 0.6
    avg_cluster_size: float = 4.0
    layers: int = 2
    user_density_factor: float = 20.0
    user_distance: float | None = None

    def __post_init__(self):
        if self.n_topologies < 1 or self.n_fading_per_topology < 1:
            raise ParameterError("n_topologies and n_fading_per_topology must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        for name, allowed in (("association", ASSOCIATIONS), ("bs_count_model", BS_MODELS),
                              ("beamformer", BEAMFORMERS), ("scenario", SCENARIOS)):
            if getattr(self, name) not in allowed:
                raise ParameterError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if not 0 < self.eta <= 1:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if self.scenario == "isolated-cell":
            object.__setattr__(self, "avg_cluster_size", 1.0)
        if not self.avg_cluster_size >= 1:
            raise ParameterError("avg_cluster_size must be >= 1")
        if self.layers < 0 or int(self.layers) != self.layers:
            raise ParameterError("layers must be a non-negative integer")
        if not self.user_density_factor > 0:
            raise ParameterError("user_density_factor must be positive")
        if self.user_distance is not None and self.user_distance < 0:
            raise ParameterError("user_distance must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PowerSamples:
    signal: np.ndarray
    interference: np.ndarray
    signal_params: GammaParams
    interference_params: GammaParams | None


@dataclass
class SimResult:
    per_bs_rate: float
    ci95: float
    user_rate_samples: np.ndarray
    topology_means: np.ndarray
    per_user_rate: float = float("nan")
    n_redraws: int = 0
    power_samples: PowerSamples | None = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Topology construction
# ---------------------------------------------------------------------------

@dataclass
class _Layout:
    bs: np.ndarray                 # (N, 2)
    group_of_bs: np.ndarray        # (N,)
    n_groups: int
    measured: np.ndarray           # group ids whose users are scored
    n_measured_bs: int
    lattice: geometry.HexLattice | None
    hex_groups: bool               # groups coincide with lattice cells


def _seed_rng(seed: int, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _draw_layout(plan: SimPlan, config: SystemConfig, rng: np.random.Generator):
    """Sample a layout, redrawing while nothing would be measured."""
    if plan.scenario == "isolated-cell":
        return _Layout(np.zeros((1, 2)), np.zeros(1, dtype=int), 1, np.array([0]), 1, None, False), 0
    layers = 0 if plan.scenario == "isolated-cluster" else plan.layers
    lattice = geometry.build_hex_lattice(plan.avg_cluster_size, config.lambda_, layers)
    for redraws in range(_MAX_REDRAWS):
        topo = geometry.deploy_bs(lattice, config.lambda_, rng, model=plan.bs_count_model,
                                  per_cluster=max(1, int(math.floor(plan.avg_cluster_size + 0.5))))
        in_centre = topo.cluster_of_bs == 0
        if not in_centre.any():
            continue
        if plan.scenario == "single-cell-processing":
            n = len(topo.bs_points)
            return _Layout(topo.bs_points, np.arange(n), n, np.flatnonzero(in_centre),
                           int(in_centre.sum()), lattice, False), redraws
        return _Layout(topo.bs_points, topo.cluster_of_bs, lattice.n_cells, np.array([0]),
                       int(in_centre.sum()), lattice, True), redraws
    raise ParameterError("could not draw a topology with a non-empty centre cluster")


def _group_members(layout: _Layout):
    order = np.argsort(layout.group_of_bs, kind="stable")
    counts = np.bincount(layout.group_of_bs, minlength=layout.n_groups)
    return np.split(order, np.cumsum(counts)[:-1])


def _n_scheduled(plan: SimPlan, config: SystemConfig, members, measured_set):
    return np.array([
        geometry.scheduled_users(plan.eta, config.M, len(m), serving=g in measured_set)
        for g, m in enumerate(members)
    ])


# ---------------------------------------------------------------------------
# User placement and association
# ---------------------------------------------------------------------------

def _pathloss_params(config: SystemConfig) -> PathLossParams:
    return PathLossParams(d_o=config.d_o, alpha=config.alpha)


def _group_strength(points, layout: _Layout, config: SystemConfig) -> np.ndarray:
    """Sum of path-loss gains from every group to every point, ``(P, n_groups)``."""
    beta = path_loss(_distances(points, layout.bs), _pathloss_params(config))
    onehot = np.zeros((len(layout.bs), layout.n_groups))
    onehot[np.arange(len(layout.bs)), layout.group_of_bs] = 1.0
    return beta @ onehot


def _distances(a, b) -> np.ndarray:
    return np.hypot(a[..., :, None, 0] - b[..., None, :, 0], a[..., :, None, 1] - b[..., None, :, 1])


def _associate(points, layout: _Layout, config: SystemConfig, mode: str) -> np.ndarray:
    if mode == "location-based":
        if not layout.hex_groups:
            raise ParameterError("location-based association needs hexagonal clusters")
        return geometry.assign_points(layout.lattice, points)
    if not layout.hex_groups and layout.n_groups == len(layout.bs):
        # One BS per group: the largest gain is the nearest BS.
        return spatial.cKDTree(layout.bs).query(points)[1]
    strength = _group_strength(points, layout, config)
    best = strength.max(axis=1, keepdims=True)
    choice = np.argmax(strength, axis=1)
    if layout.hex_groups:
        loc = geometry.assign_points(layout.lattice, points)
        tied = strength[np.arange(len(points)), loc] >= best[:, 0] * (1.0 - 1e-12)
        choice = np.where(tied, loc, choice)
    return choice


def associate_users(topology: geometry.Topology, config: SystemConfig, mode: str,
                    points=None) -> geometry.Topology:
    """Attach users to clusters: by hexagon (location) or by largest sum of path-loss gains (channel).

    ``points`` defaults to ``topology.users["points"]``. The result is stored in
    ``topology.users["cluster"]``.
    """
    if mode not in ASSOCIATIONS:
        raise ParameterError(f"mode must be one of {ASSOCIATIONS}")
    pts = np.atleast_2d(np.asarray(points if points is not None else topology.users["points"], dtype=float))
    layout = _Layout(topology.bs_points, topology.cluster_of_bs, topology.lattice.n_cells,
                     np.array([0]), 0, topology.lattice, True)
    topology.users = {"points": pts, "cluster": _associate(pts, layout, config, mode)}
    return topology


def _pool(layout: _Layout, plan: SimPlan, config: SystemConfig, rng) -> np.ndarray:
    lat = layout.lattice
    n = rng.poisson(plan.user_density_factor * config.lambda_ * lat.cell_area * lat.n_cells)
    return geometry.sample_in_tessellation(lat, n, rng)


def _place_at_distance(d: float, n: int, rng) -> np.ndarray:
    phi = rng.uniform(0.0, 2 * math.pi, n)
    return np.column_stack([d * np.cos(phi), d * np.sin(phi)])


def _slot_users(layout: _Layout, plan: SimPlan, config: SystemConfig, K, rng):
    """Users scheduled in one slot, as a list of ``(K_g, 2)`` arrays."""
    if plan.scenario == "isolated-cell":
        k = int(K[0])
        if plan.user_distance is not None:
            return [_place_at_distance(plan.user_distance, k, rng)]
        return [geometry.sample_in_disc(math.sqrt(1.0 / (math.pi * config.lambda_)), k, rng)]
    if plan.association == "location-based" and layout.hex_groups:
        users = [geometry.sample_in_hexagon(layout.lattice, g, int(k), rng) if k else np.empty((0, 2))
                 for g, k in enumerate(K)]
    else:
        pts = _pool(layout, plan, config, rng)
        owner = _associate(pts, layout, config, "channel-based") if len(pts) else np.empty(0, int)
        users = []
        for g, k in enumerate(K):
            idx = np.flatnonzero(owner == g)
            if len(idx) > k:
                idx = np.sort(rng.choice(idx, size=int(k), replace=False))
            users.append(pts[idx])
    if plan.user_distance is not None:
        for g in layout.measured:
            if len(users[g]):
                users[g] = users[g].copy()
                users[g][0] = _place_at_distance(plan.user_distance, 1, rng)[0]
    return users


# ---------------------------------------------------------------------------
# One fading slot
# ---------------------------------------------------------------------------

def _slot_sinr(layout: _Layout, members, users, plan: SimPlan, config: SystemConfig, rng):
    """Signal and interference power (watts) of every measured user."""
    for attempt in range(_MAX_DEGENERATE_RETRIES):
        try:
            return _slot_sinr_once(layout, members, users, plan, config, rng)
        except DegenerateChannelError:
            if attempt == _MAX_DEGENERATE_RETRIES - 1:
                raise


def _slot_sinr_once(layout: _Layout, members, users, plan: SimPlan, config: SystemConfig, rng,
                    breakdown: bool = False):
    """With ``breakdown=True`` also return the received power per group, ``(U, n_groups)``."""
    M = config.M
    pl = _pathloss_params(config)
    P_T = config.tx_power_w
    meas = [g for g in layout.measured if len(users[g])]
    if not meas:
        return (np.empty(0), np.empty(0)) + ((np.empty((0, layout.n_groups)),) if breakdown else ())
    mu = np.vstack([users[g] for g in meas])
    mu_group = np.concatenate([np.full(len(users[g]), g) for g in meas])
    mu_local = np.concatenate([np.arange(len(users[g])) for g in meas])
    U, N = len(mu), len(layout.bs)
    F = np.sqrt(path_loss(_distances(mu, layout.bs), pl))[..., None] * sample_fading(M, rng, size=(U, N))

    # Group beams, batched over groups sharing (B_g, K_g).
    classes = {}
    for g, k in enumerate(len(u) for u in users):
        if k:
            classes.setdefault((len(members[g]), k), []).append(g)
    total = np.zeros(U)
    signal = np.zeros(U)
    per_group = np.zeros((U, layout.n_groups)) if breakdown else None
    first_of = {g: i for i, g in reversed(list(enumerate(mu_group)))}
    for (B, K), gs in sorted(classes.items()):
        bs_idx = np.array([members[g] for g in gs])                  # (S, B)
        pts = np.array([users[g] for g in gs])                        # (S, K, 2)
        d = _distances(pts, layout.bs[bs_idx])
        H = np.sqrt(path_loss(d, pl))[..., None] * sample_fading(M, rng, size=(len(gs), K, B))
        for s, g in enumerate(gs):
            if g in first_of:
                rows = slice(first_of[g], first_of[g] + K)
                H[s] = F[rows][:, members[g], :]
        Hm = H.reshape(len(gs), K, B * M).transpose(0, 2, 1)          # (S, BM, K)
        if plan.beamformer == "zf":
            W = zf_beams(Hm).beams
        else:
            W = rzf_beams(Hm, reg=1.0 / config.snr(plan.eta)).beams
        p = B * P_T / K
        Fs = F[:, bs_idx, :].reshape(U, len(gs), B * M)
        gains = p * np.abs(np.einsum("usd,sdk->usk", Fs.conj(), W)) ** 2
        total += gains.sum(axis=(1, 2))
        if breakdown:
            per_group[:, gs] = gains.sum(axis=2)
        for s, g in enumerate(gs):
            own = mu_group == g
            if own.any():
                signal[own] = gains[own, s, mu_local[own]]
    if breakdown:
        return signal, total - signal, per_group
    return signal, total - signal


def _rates(signal, interference, config: SystemConfig):
    gamma = signal / (interference + config.noise_w)
    return np.log2(1.0 + gamma / config.gap_linear)


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

def _run_topology(args):
    plan, config, t = args
    rng = _seed_rng(plan.seed, t, 0)
    layout, redraws = _draw_layout(plan, config, rng)
    members = _group_members(layout)
    K = _n_scheduled(plan, config, members, set(layout.measured.tolist()))
    per_slot = np.empty(plan.n_fading_per_topology)
    user_rates = []
    for s in range(plan.n_fading_per_topology):
        srng = _seed_rng(plan.seed, t, 1, s)
        users = _slot_users(layout, plan, config, K, srng)
        sig, itf = _slot_sinr(layout, members, users, plan, config, srng)
        r = _rates(sig, itf, config)
        per_slot[s] = r.sum() / layout.n_measured_bs
        if plan.user_distance is not None and plan.scenario != "isolated-cell":
            # Only the pinned probe users are conditioned on the distance.
            counts = [len(users[g]) for g in layout.measured if len(users[g])]
            r = r[np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(int)]
        user_rates.append(r)
    return float(per_slot.mean()), np.concatenate(user_rates), redraws


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _ci95(values) -> float:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float("nan")
    return float(1.96 * values.std(ddof=1) / math.sqrt(len(values)))


def run(plan: SimPlan, config: SystemConfig, workers: int = 1) -> SimResult:
    """Per-BS ergodic sum rate of the measured cluster, averaged over topologies.

    Each topology contributes the slot average of (sum of measured users'
    rates) / (number of measured BSs); ``ci95`` comes from those
    per-topology values.
    """
    out = _map(_run_topology, [(plan, config, t) for t in range(plan.n_topologies)], workers)
    means = np.array([o[0] for o in out])
    users = np.concatenate([o[1] for o in out])
    return SimResult(
        per_bs_rate=float(means.mean()),
        ci95=_ci95(means),
        user_rate_samples=users,
        topology_means=means,
        per_user_rate=float(users.mean()) if users.size else float("nan"),
        n_redraws=int(sum(o[2] for o in out)),
    )


def _cdf_topology(args):
    plan, config, t = args
    rng = _seed_rng(plan.seed, t, 0)
    layout, redraws = _draw_layout(plan, config, rng)
    members = _group_members(layout)
    measured = set(layout.measured.tolist())
    K = _n_scheduled(plan, config, members, measured)
    if plan.scenario == "isolated-cell":
        pool = [_slot_users(layout, plan, config, K, rng)[0]]
    else:
        pts = _pool(layout, plan, config, rng)
        mode = "location-based" if (plan.association == "location-based" and layout.hex_groups) else "channel-based"
        owner = _associate(pts, layout, config, mode) if len(pts) else np.empty(0, int)
        pool = [pts[owner == g] for g in range(layout.n_groups)]
    K = np.minimum(K, [len(p) for p in pool])
    cycles = [math.ceil(len(pool[g]) / K[g]) for g in measured if K[g]]
    n_slots = plan.n_fading_per_topology * max(cycles, default=1)
    acc = [np.zeros(len(pool[g])) for g in range(layout.n_groups)]
    for s in range(n_slots):
        srng = _seed_rng(plan.seed, t, 1, s)
        picks = [(s * k + np.arange(k)) % max(len(p), 1) for p, k in zip(pool, K)]
        users = [p[i] for p, i in zip(pool, picks)]
        sig, itf = _slot_sinr(layout, members, users, plan, config, srng)
        r = _rates(sig, itf, config)
        pos = 0
        for g in layout.measured:
            k = len(users[g])
            np.add.at(acc[g], picks[g], r[pos:pos + k])
            pos += k
    rates = [acc[g] / n_slots for g in layout.measured]
    return np.concatenate(rates) if rates else np.empty(0)


def user_rate_cdf(plan: SimPlan, config: SystemConfig, workers: int = 1):
    """Empirical CDF of long-run user rates under round-robin scheduling.

    Users are fixed per topology (density ``user_density_factor * lambda``);
    each cluster serves ``K`` of its users per slot in cyclic order. Returns
    ``(sorted_rates, cdf)`` with ``cdf[i] = (i + 1) / n``.
    """
    out = _map(_cdf_topology, [(plan, config, t) for t in range(plan.n_topologies)], workers)
    rates = np.sort(np.concatenate(out)) if out else np.empty(0)
    cdf = np.arange(1, len(rates) + 1) / max(len(rates), 1)
    return rates, cdf


def collect_power_samples(plan: SimPlan, config: SystemConfig, serving_pathloss, n_users: int,
                          interferer_pathloss=None, other_pathloss=None, n_interfering_users: int | None = None,
                          interfering_users_pathloss=None):
    """Fading-only samples of the ZF signal power and one interfering beam's power.

    The layout is fixed through path-loss gains: ``serving_pathloss`` from the
    probe user's cluster BSs, ``other_pathloss`` for the ``n_users - 1`` co-scheduled
    users (defaults to the probe's), ``interferer_pathloss`` from an interfering
    cluster's BSs, ``interfering_users_pathloss`` for the users that cluster
    serves (defaults to ``interferer_pathloss``). Powers are per unit beam power. ``n_fading_per_topology`` is
    the sample count.
    """
    M = config.M
    beta = np.asarray(serving_pathloss, dtype=float).ravel()
    B = len(beta)
    if not 1 <= n_users <= M * B:
        raise ParameterError("need 1 <= n_users <= M B")
    rng = _seed_rng(plan.seed, 0, 2)
    n = plan.n_fading_per_topology
    others = np.broadcast_to(np.asarray(other_pathloss if other_pathloss is not None else beta, dtype=float),
                             (n_users - 1, B)) if n_users > 1 else np.empty((0, B))
    gains = np.vstack([beta[None, :], others])                                        # (K, B)
    H = (np.sqrt(gains)[None, :, :, None] * sample_fading(M, rng, size=(n, n_users, B))).reshape(n, n_users, B * M)
    W = zf_beams(H.transpose(0, 2, 1)).beams
    signal = np.abs(np.einsum("nd,nd->n", H[:, 0, :].conj(), W[:, :, 0])) ** 2
    eta = n_users / (M * B)
    k = intended_channel_params(beta, M)
    zeta = M * B - n_users + 1
    sig_params = GammaParams(k.shape * zeta / (M * B), k.scale)
    interference = np.empty(0)
    itf_params = None
    if interferer_pathloss is not None:
        bj = np.asarray(interferer_pathloss, dtype=float).ravel()
        Bj = len(bj)
        Kj = n_interfering_users or geometry.scheduled_users(eta, M, Bj, serving=True)
        bu = np.broadcast_to(np.asarray(interfering_users_pathloss if interfering_users_pathloss is not None
                                        else bj, dtype=float), (Kj, Bj))
        Hj = np.sqrt(bu)[None, :, :, None] * sample_fading(M, rng, size=(n, Kj, Bj))
        Wj = zf_beams(Hj.reshape(n, Kj, Bj * M).transpose(0, 2, 1)).beams
        f = (np.sqrt(bj)[None, :, None] * sample_fading(M, rng, size=(n, Bj))).reshape(n, Bj * M)
        interference = np.abs(np.einsum("nd,nd->n", f.conj(), Wj[:, :, 0])) ** 2
        itf_params = interference_beam_power_params(intended_channel_params(bj, M), M, Bj, n_beams=1)
    return PowerSamples(signal, interference, sig_params, itf_params)
