"""BS deployment, hexagonal clustering and cluster geometry.

Points are handled as ``(n, 2)`` float arrays of metres. Hexagons are
flat-topped; cluster index 0 is the hexagon centred at the origin, followed
by successive rings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import OutOfRegionError, ParameterError

_SQRT3 = math.sqrt(3.0)
# Unit normals of the three edge directions of a flat-topped hexagon.
_EDGE_NORMALS = np.array(
    [[math.cos(a), math.sin(a)] for a in (math.pi / 6, math.pi / 2, 5 * math.pi / 6)]
)
_BOUNDARY_RTOL = 1e-12


class Point2D(NamedTuple):
    x: float
    y: float


class Window(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)


@dataclass(frozen=True)
class HexLattice:
    cell_area: float
    center_offsets: np.ndarray
    layers: int

    @property
    def circumradius(self) -> float:
        return math.sqrt(2.0 * self.cell_area / (3.0 * _SQRT3))

    @property
    def apothem(self) -> float:
        return self.circumradius * _SQRT3 / 2.0

    @property
    def n_cells(self) -> int:
        return len(self.center_offsets)

    def bounding_window(self, pad: float = 0.0) -> Window:
        c = self.center_offsets
        r = self.circumradius
        return Window(
            c[:, 0].min() - r - pad,
            c[:, 0].max() + r + pad,
            c[:, 1].min() - self.apothem - pad,
            c[:, 1].max() + self.apothem + pad,
        )

    def hex_norm(self, points) -> np.ndarray:
        """Scaled hexagonal norm of ``points`` relative to every centre.

        Entry ``[i, j]`` is <= 1 exactly when point ``i`` lies in hexagon ``j``.
        """
        p = np.atleast_2d(np.asarray(points, dtype=float))
        rel = p[:, None, :] - self.center_offsets[None, :, :]
        proj = np.abs(rel @ _EDGE_NORMALS.T)
        return proj.max(axis=-1) / self.apothem

    def contains(self, points) -> np.ndarray:
        return self.hex_norm(points).min(axis=1) <= 1.0 + _BOUNDARY_RTOL


@dataclass
class Topology:
    bs_points: np.ndarray
    cluster_of_bs: np.ndarray
    lattice: HexLattice
    users: dict = field(default_factory=dict)

    def cluster_counts(self) -> np.ndarray:
        return np.bincount(self.cluster_of_bs, minlength=self.lattice.n_cells)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_of_bs == cluster)


@dataclass(frozen=True)
class ClusterGeometry:
    avg_bs_count: float
    R_c: float


def sample_ppp(density: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson point process on a rectangle."""
    if not density > 0:
        raise ParameterError(f"density must be positive, got {density}")
    window = Window(*window)
    if not (window.xmax > window.xmin and window.ymax > window.ymin):
        raise ParameterError(f"degenerate window {tuple(window)}")
    n = rng.poisson(density * window.area)
    xs = rng.uniform(window.xmin, window.xmax, n)
    ys = rng.uniform(window.ymin, window.ymax, n)
    return np.column_stack([xs, ys])


def _ring_axial(layers: int):
    coords = [(0, 0)]
    for ring in range(1, layers + 1):
        for q in range(-ring, ring + 1):
            for r in range(-ring, ring + 1):
                if max(abs(q), abs(r), abs(q + r)) == ring:
                    coords.append((q, r))
    return coords


def build_hex_lattice(avg_cluster_size: float, density: float, layers: int = 2) -> HexLattice:
    """Hexagonal tessellation with ``1 + 3 L (L + 1)`` cells of area B/lambda."""
    if avg_cluster_size < 1:
        raise ParameterError(f"average cluster size must be >= 1, got {avg_cluster_size}")
    if not density > 0:
        raise ParameterError(f"density must be positive, got {density}")
    if layers < 0 or int(layers) != layers:
        raise ParameterError(f"layers must be a non-negative integer, got {layers}")
    area = avg_cluster_size / density
    r = math.sqrt(2.0 * area / (3.0 * _SQRT3))
    centers = np.array(
        [[1.5 * r * q, _SQRT3 * r * (rr + q / 2.0)] for q, rr in _ring_axial(int(layers))]
    )
    return HexLattice(cell_area=area, center_offsets=centers, layers=int(layers))


def assign_points(lattice: HexLattice, points) -> np.ndarray:
    """Vectorised :func:`assign_to_cluster`."""
    norms = lattice.hex_norm(points)
    best = norms.min(axis=1)
    if np.any(best > 1.0 + _BOUNDARY_RTOL):
        bad = np.atleast_2d(points)[np.argmax(best)]
        raise OutOfRegionError(f"point {tuple(bad)} lies outside the tessellation")
    # Boundary ties go to the lexicographically smallest centre.
    order = np.lexsort((lattice.center_offsets[:, 1], lattice.center_offsets[:, 0]))
    tied = norms[:, order] <= best[:, None] * (1.0 + _BOUNDARY_RTOL) + 1e-15
    return order[np.argmax(tied, axis=1)]


def assign_to_cluster(lattice: HexLattice, p) -> int:
    return int(assign_points(lattice, np.asarray(p, dtype=float).reshape(1, 2))[0])


def cluster_radius(avg_cluster_size: float, density: float) -> float:
    """Radius of the disc whose area equals that of a cluster, sqrt(B / (lambda pi))."""
    if avg_cluster_size < 1:
        raise ParameterError(f"average cluster size must be >= 1, got {avg_cluster_size}")
    if not density > 0:
        raise ParameterError(f"density must be positive, got {density}")
    return math.sqrt(avg_cluster_size / (density * math.pi))


def cluster_geometry(avg_cluster_size: float, density: float) -> ClusterGeometry:
    return ClusterGeometry(avg_cluster_size, cluster_radius(avg_cluster_size, density))


def boundary_distance(d, theta, R_c):
    """Distance from a user at ``(0, -d)`` to the circle of radius ``R_c`` along ``theta``.

    Vectorised over ``d`` and ``theta``. Result lies in ``[R_c - d, R_c + d]``.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(d > R_c * (1 + 1e-12)):
        raise ParameterError("user distance must lie in [0, R_c]")
    d = np.minimum(d, R_c)
    c = np.cos(theta)
    out = np.sqrt(np.maximum(R_c**2 - d**2 * c**2, 0.0)) + d * np.sin(theta)
    return out if out.ndim else float(out)


def sample_user_distance(R_c: float, rng: np.random.Generator, size=None):
    """Distance of a uniform point in a disc of radius ``R_c``: density 2d/R_c^2."""
    if not R_c > 0:
        raise ParameterError(f"R_c must be positive, got {R_c}")
    return R_c * np.sqrt(rng.uniform(0.0, 1.0, size))


def sample_in_hexagon(lattice: HexLattice, index: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. uniform points inside hexagon ``index`` (rejection sampling)."""
    r, a = lattice.circumradius, lattice.apothem
    out = np.empty((0, 2))
    while len(out) < n:
        m = max(8, int(1.3 * (n - len(out))) + 4)
        cand = np.column_stack([rng.uniform(-r, r, m), rng.uniform(-a, a, m)])
        proj = np.abs(cand @ _EDGE_NORMALS.T).max(axis=1)
        out = np.vstack([out, cand[proj <= a]])
    return out[:n] + lattice.center_offsets[index]


def sample_in_disc(radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    d = sample_user_distance(radius, rng, n)
    phi = rng.uniform(0.0, 2 * math.pi, n)
    return np.column_stack([d * np.cos(phi), d * np.sin(phi)])


def sample_in_tessellation(lattice: HexLattice, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. uniform points over the union of all hexagons."""
    cells = rng.integers(0, lattice.n_cells, n)
    counts = np.bincount(cells, minlength=lattice.n_cells)
    parts = [sample_in_hexagon(lattice, j, c, rng) for j, c in enumerate(counts) if c]
    pts = np.vstack(parts) if parts else np.empty((0, 2))
    return pts[rng.permutation(len(pts))]


def deploy_bs(
    lattice: HexLattice,
    density: float,
    rng: np.random.Generator,
    model: str = "poisson",
    per_cluster: int | None = None,
) -> Topology:
    """Place BSs over the tessellation and group them by hexagon.

    ``model="poisson"`` samples a PPP over the lattice bounding box padded by
    one circumradius and keeps the points inside the tessellation.
    ``model="fixed-per-cluster"`` drops exactly ``per_cluster`` uniform BSs
    into every hexagon.
    """
    if model == "poisson":
        pts = sample_ppp(density, lattice.bounding_window(pad=lattice.circumradius), rng)
        pts = pts[lattice.contains(pts)] if len(pts) else pts
        clusters = assign_points(lattice, pts) if len(pts) else np.empty(0, dtype=int)
    elif model == "fixed-per-cluster":
        if per_cluster is None or per_cluster < 1:
            raise ParameterError("fixed-per-cluster deployment needs per_cluster >= 1")
        pts = np.vstack([sample_in_hexagon(lattice, j, per_cluster, rng) for j in range(lattice.n_cells)])
        clusters = np.repeat(np.arange(lattice.n_cells), per_cluster)
    else:
        raise ParameterError(f"unknown BS count model {model!r}")
    return Topology(bs_points=pts, cluster_of_bs=np.asarray(clusters, dtype=int), lattice=lattice)


def scheduled_users(eta: float, M: int, n_bs: int, serving: bool = False) -> int:
    """Number of scheduled users for a cluster of ``n_bs`` BSs.

    Empty clusters schedule nobody. The cluster under study always serves at
    least one user.
    """
    if n_bs <= 0:
        return 0
    k = int(math.floor(round(eta * M * n_bs, 9) + 0.5))
    if serving:
        k = max(1, k)
    return min(k, M * n_bs)
