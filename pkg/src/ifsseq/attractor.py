"""Discretized hyperspace machinery: Hutchinson iteration, attractor renders,
Hausdorff distance, code-space addressing.

Compact sets are represented as finite point sets snapped to a grid of pitch
delta, which buys a provable 2*delta slack in every Hausdorff statement.  The
Hausdorff distance ships in two variants that must agree bit for bit: a plain
O(|A||B|) reference and an accelerated path (sorted scan in one dimension,
uniform grid buckets above).  Both reduce squared distances built from the
same expressions, so the agreement is exact, not approximate.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError, ResourceLimitError
from .maps import Box
from .sequences import IFSSequence, align_chain
from .systems import IFS

POINT_CAP = 5_000_000

Address = Sequence[int]


def default_resolution(dim: int) -> float:
    return 1e-4 if dim == 1 else 1e-3


class PointSet:
    """Finite set of d-dimensional points at a stated resolution.

    Construction snaps every coordinate to the grid delta*Z, deduplicates and
    sorts, so equal sets have identical storage regardless of input order.
    """

    __slots__ = ("points", "resolution")

    def __init__(self, points, resolution: float):
        if resolution <= 0.0 or not math.isfinite(resolution):
            raise InputError("resolution must be a positive real")
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.ndim != 2 or pts.size == 0:
            raise InputError("a point set needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InputError("points must be finite")
        snapped = np.round(pts / resolution) * resolution
        canonical = np.unique(snapped, axis=0)
        canonical.flags.writeable = False
        self.points = canonical
        self.resolution = float(resolution)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(
            self.points, other.points
        )

    def __repr__(self):
        return f"PointSet({len(self)} points, dim={self.dim}, delta={self.resolution})"


def box_seed(box: Box, resolution: float) -> PointSet:
    """Default seed for attractor iteration: the box vertices."""
    return PointSet(box.vertices(), resolution)


def _check_inside(S: IFS, B: PointSet):
    if B.dim != S.dim:
        raise InputError(f"point set has dimension {B.dim}, system has {S.dim}")
    # snapping may push boundary points half a pitch outside
    if not S.domain.contains(B.points, tol=B.resolution / 2.0 + 1e-9):
        raise InputError("point set leaves the system domain")


def hutchinson(S: IFS, B: PointSet) -> PointSet:
    """Union of the images of B under every map, snapped and deduplicated."""
    _check_inside(S, B)
    if S.n * len(B) > POINT_CAP:
        raise ResourceLimitError(
            f"image would hold {S.n * len(B)} points before deduplication; "
            "raise the resolution delta"
        )
    images = np.vstack([m.transform(B.points) for m in S.maps])
    return PointSet(images, B.resolution)


def attractor_points(
    S: IFS,
    depth: int,
    seed: PointSet | None = None,
    resolution: float | None = None,
) -> PointSet:
    """depth applications of the Hutchinson operator from the seed.

    The result sits within t^depth/(1-t) * h(seed, W(seed)) of the true
    attractor, plus snapping slack.
    """
    if depth < 0:
        raise InputError("depth must be nonnegative")
    if seed is None:
        seed = box_seed(S.domain, resolution or default_resolution(S.dim))
    current = seed
    for _ in range(depth):
        current = hutchinson(S, current)
    return current


def chaos_game(
    S: IFS,
    count: int,
    burn_in: int = 100,
    seed: int = 0,
    resolution: float | None = None,
) -> PointSet:
    """Random-orbit render with uniform map choice; deterministic per seed."""
    if count <= 0:
        raise InputError("count must be positive")
    if burn_in < 0:
        raise InputError("burn_in must be nonnegative")
    resolution = resolution or default_resolution(S.dim)
    rng = np.random.default_rng(seed)
    choices = rng.integers(0, S.n, size=burn_in + count)
    mats = [(m.A, m.b) for m in S.maps]
    x = S.domain.center
    orbit = np.empty((count, S.dim))
    for step, pick in enumerate(choices):
        A, b = mats[pick]
        x = A @ x + b
        if step >= burn_in:
            orbit[step - burn_in] = x
    return PointSet(orbit, resolution)


def _min_sq_brute(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    out = np.empty(queries.shape[0])
    chunk = max(1, 8_000_000 // max(points.shape[0], 1))
    for start in range(0, queries.shape[0], chunk):
        q = queries[start : start + chunk]
        sq = ((q[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        out[start : start + chunk] = sq.min(axis=1)
    return out


def _min_sq_sorted_1d(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Nearest squared distance on the line; points must be sorted ascending."""
    flat = points[:, 0]
    idx = np.searchsorted(flat, queries[:, 0])
    left = np.clip(idx - 1, 0, flat.size - 1)
    right = np.clip(idx, 0, flat.size - 1)
    d_left = (queries[:, 0] - flat[left]) ** 2
    d_right = (queries[:, 0] - flat[right]) ** 2
    return np.minimum(d_left, d_right)


class _GridIndex:
    """Uniform bucket grid for exact nearest-neighbour queries."""

    def __init__(self, points: np.ndarray, cell: float):
        self.points = points
        self.cell = cell
        keys = np.floor(points / cell).astype(np.int64)
        order = np.lexsort(keys.T[::-1])
        sorted_keys = keys[order]
        boundaries = np.flatnonzero(np.any(np.diff(sorted_keys, axis=0) != 0, axis=1)) + 1
        self.buckets: dict[tuple, np.ndarray] = {
            tuple(keys[group[0]]): group for group in np.split(order, boundaries)
        }
        self.key_min = keys.min(axis=0)
        self.key_max = keys.max(axis=0)

    def min_sq(self, q: np.ndarray) -> float:
        d = q.size
        base = np.floor(q / self.cell).astype(np.int64)
        # rings beyond this cover every occupied bucket
        reach = int(
            np.maximum(np.abs(base - self.key_min), np.abs(base - self.key_max)).max()
        )
        best = np.inf
        for ring in range(reach + 1):
            for offset in _ring_offsets(d, ring):
                rows = self.buckets.get(tuple(base + offset))
                if rows is not None:
                    cand = self.points[rows]
                    sq = ((q - cand) ** 2).sum(axis=1)
                    val = float(sq.min())
                    if val < best:
                        best = val
            # anything not yet scanned sits strictly beyond ring*cell
            if best <= (ring * self.cell) ** 2:
                return best
        return best


_RING_CACHE: dict[tuple[int, int], list] = {}


def _ring_offsets(d: int, ring: int) -> list:
    got = _RING_CACHE.get((d, ring))
    if got is None:
        rng = np.arange(-ring, ring + 1)
        mesh = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
        mask = np.abs(mesh).max(axis=1) == ring
        got = list(mesh[mask])
        _RING_CACHE[(d, ring)] = got
    return got


def _min_sq_grid(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    d = points.shape[1]
    span = float((points.max(axis=0) - points.min(axis=0)).max())
    cell = span / max(1.0, points.shape[0] ** (1.0 / d)) if span > 0 else 1.0
    index = _GridIndex(points, cell)
    return np.array([index.min_sq(q) for q in queries])


def _directed_sq(queries: np.ndarray, points: np.ndarray, accelerated: bool) -> float:
    if not accelerated:
        mins = _min_sq_brute(queries, points)
    elif points.shape[1] == 1:
        mins = _min_sq_sorted_1d(queries, points)
    else:
        mins = _min_sq_grid(queries, points)
    return float(mins.max())


def hausdorff(A: PointSet, B: PointSet) -> float:
    """Hausdorff distance between two nonempty point sets (accelerated path)."""
    return _hausdorff(A, B, accelerated=True)


def hausdorff_brute(A: PointSet, B: PointSet) -> float:
    """Plain O(|A||B|) reference; agrees with hausdorff bit for bit."""
    return _hausdorff(A, B, accelerated=False)


def _hausdorff(A: PointSet, B: PointSet, accelerated: bool) -> float:
    if A.dim != B.dim:
        raise InputError(f"dimension mismatch: {A.dim} vs {B.dim}")
    ab = _directed_sq(A.points, B.points, accelerated)
    ba = _directed_sq(B.points, A.points, accelerated)
    return math.sqrt(max(ab, ba))


def directed_distance(A: PointSet, B: PointSet) -> float:
    """One-sided sup of nearest distances from A into B (not symmetric)."""
    if A.dim != B.dim:
        raise InputError(f"dimension mismatch: {A.dim} vs {B.dim}")
    return math.sqrt(_directed_sq(A.points, B.points, accelerated=True))


def code_point(S: IFS, address: Address, x) -> np.ndarray:
    """Apply the maps named by the address, first symbol first."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not S.domain.contains(x[None, :]):
        raise InputError("starting point lies outside the domain")
    for k, symbol in enumerate(address):
        if not 0 <= int(symbol) < S.n:
            raise InputError(f"address symbol {symbol} at position {k} outside 0..{S.n - 1}")
        x = S.maps[int(symbol)](x)
    return x


class ConvergenceReport(NamedTuple):
    distances: tuple[float, ...]
    error_bound: float


def attractor_convergence_report(
    seq: IFSSequence,
    S: IFS,
    depth: int,
    resolution: float,
) -> ConvergenceReport:
    """Hausdorff distances h(A_j, A) of rendered attractors against the
    rendered attractor of S, with the shared discretization error bound
    t^depth/(1-t) * h(seed, W(seed)) + 2*delta."""
    aligned = align_chain(seq)
    if S.domain != aligned.domain:
        raise InputError("sequence and reference system must share the domain")
    seed = box_seed(S.domain, resolution)
    reference = attractor_points(S, depth, seed=seed)
    systems = list(aligned.terms) + [S]
    bound = 0.0
    for system in systems:
        t = system.contractivity
        h0 = hausdorff(seed, hutchinson(system, seed))
        bound = max(bound, t**depth / (1.0 - t) * h0)
    bound += 2.0 * resolution
    distances = tuple(
        hausdorff(attractor_points(term, depth, seed=seed), reference)
        for term in aligned.terms
    )
    return ConvergenceReport(distances, bound)
