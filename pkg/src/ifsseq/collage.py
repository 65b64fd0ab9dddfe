"""Collage-theorem distances and bounds, collage fitting, and sequence
extrapolation.

Fitting minimizes the collage distance h(L, W(L)) by random-restart
coordinate descent over the affine coefficients, with every candidate
projected back to the feasible set (singular values clamped, translation
pulled inside the domain), so iterates never leave the space of valid
systems.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .attractor import PointSet, hausdorff, hutchinson
from .errors import InputError, PreconditionError
from .maps import AffineMap, Box
from .sequences import IFSSequence, align_chain
from .systems import IFS


@dataclass(frozen=True)
class FitConfig:
    """Search budget and feasibility settings for collage fitting."""

    n: int
    restarts: int = 8
    max_iters: int = 200
    initial_step: float | None = None  # default: 0.1 * domain diameter
    step_decay: float = 0.7
    s_max: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be at least 1")
        if self.restarts < 1:
            raise InputError("restarts must be at least 1")
        if self.max_iters < 1:
            raise InputError("max_iters must be at least 1")
        if not 0.0 < self.s_max < 1.0:
            raise InputError("s_max must lie in (0, 1)")
        if not 0.0 < self.step_decay < 1.0:
            raise InputError("step_decay must lie in (0, 1)")
        if self.initial_step is not None and self.initial_step <= 0.0:
            raise InputError("initial_step must be positive")


@dataclass(frozen=True)
class ExtrapolationModel:
    """How per-coefficient series are carried past the last observed term.

    Kinds: 'hold-last' repeats the final term; 'linear' continues the
    least-squares slope; 'geometric' decays the remaining change toward an
    estimated limit.  All curves are anchored at the final term, so horizon
    zero reproduces it exactly.
    """

    kind: str
    horizon: int
    s_max: float = 0.95

    KINDS = ("hold-last", "linear", "geometric")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InputError(f"kind must be one of {self.KINDS}")
        if self.horizon < 0:
            raise InputError("horizon must be nonnegative")
        if not 0.0 < self.s_max < 1.0:
            raise InputError("s_max must lie in (0, 1)")


@dataclass(frozen=True)
class FitResult:
    ifs: IFS
    distance: float
    history: tuple[float, ...]
    baseline_fallback: bool = False


@dataclass(frozen=True)
class FitSequenceResult:
    sequence: IFSSequence
    distances: tuple[float, ...]
    results: tuple[FitResult, ...]


def collage_distance(S: IFS, target: PointSet) -> float:
    """h(L, W(L)): how far the target is from being W-invariant."""
    return hausdorff(target, hutchinson(S, target))


def collage_bound(eps: float, t: float) -> float:
    """eps/(1-t): Hausdorff distance to the attractor guaranteed by the
    collage inequality for a system with factor t and collage distance eps."""
    if eps < 0.0:
        raise InputError("eps must be nonnegative")
    if not 0.0 <= t < 1.0:
        raise InputError("contractivity factor must lie in [0, 1)")
    return eps / (1.0 - t)


def project_map(A: np.ndarray, b: np.ndarray, box: Box, s_max: float) -> AffineMap:
    """Nearest feasible map: singular values clamped to s_max, translation
    shifted (and A shrunk when even that cannot fit) so the box maps into
    itself."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    u, s, vt = np.linalg.svd(A)
    if s.size and s[0] > s_max:
        A = u @ np.diag(np.minimum(s, s_max)) @ vt
    extent = box.hi - box.lo
    for _ in range(64):
        img = box.vertices() @ A.T + b
        img_lo = img.min(axis=0)
        img_hi = img.max(axis=0)
        if np.all(img_hi - img_lo <= extent + 1e-15):
            break
        A = A * 0.8  # image larger than the box along some axis
    else:
        raise PreconditionError("cannot project the map into the domain")
    img = box.vertices() @ A.T + b
    shift = np.maximum(box.lo - img.min(axis=0), 0.0) + np.minimum(
        box.hi - img.max(axis=0), 0.0
    )
    return AffineMap(A, b + shift)


def _pack(maps) -> np.ndarray:
    return np.concatenate([np.concatenate([m.A.ravel(), m.b]) for m in maps])


def _unpack(params: np.ndarray, n: int, d: int, box: Box, s_max: float):
    per = d * d + d
    maps = []
    for i in range(n):
        block = params[i * per : (i + 1) * per]
        maps.append(project_map(block[: d * d].reshape(d, d), block[d * d :], box, s_max))
    return tuple(maps)


def _tiles(points: np.ndarray, n: int):
    """Split a point cloud into n roughly equal-count tiles, recursively
    cutting along the widest axis of each tile's bounding box.

    The cut lands on the largest coordinate gap near the count split, which
    separates the pieces of a disconnected self-affine target cleanly; for
    gap-free targets it degenerates to the plain count median."""
    if n == 1:
        return [points]
    left_n = n // 2
    axis = int(np.argmax(points.max(axis=0) - points.min(axis=0)))
    order = np.argsort(points[:, axis], kind="stable")
    coords = points[order, axis]
    target_cut = len(points) * left_n / n
    lo = max(1, int(np.floor(len(points) * 0.25)))
    hi = min(len(points) - 1, max(lo + 1, int(np.ceil(len(points) * 0.75))))
    gaps = np.diff(coords)[lo - 1 : hi - 1]
    if gaps.size and gaps.max() > 2.0 * max(np.median(np.diff(coords)), 1e-30):
        candidates = np.flatnonzero(gaps == gaps.max()) + lo
        cut = int(candidates[np.argmin(np.abs(candidates - target_cut))])
    else:
        cut = max(1, min(len(points) - 1, round(target_cut)))
    return _tiles(points[order[:cut]], left_n) + _tiles(points[order[cut:]], n - left_n)


def _heuristic_maps(target: PointSet, box: Box, cfg: FitConfig):
    """One axis-aligned map per equal-count tile of the target, sending the
    target's bounding box onto the tile's bounding box.  For a self-affine
    target whose pieces carry equal point shares this starts at or near the
    optimum."""
    src_lo = target.points.min(axis=0)
    src_hi = target.points.max(axis=0)
    extent = np.where(src_hi - src_lo > 0, src_hi - src_lo, 1.0)
    maps = []
    for tile in _tiles(target.points, cfg.n):
        lo = tile.min(axis=0)
        hi = tile.max(axis=0)
        A = np.diag((hi - lo) / extent)
        b = lo - A @ src_lo
        maps.append(project_map(A, b, box, cfg.s_max))
    return tuple(maps)


def _random_maps(target: PointSet, box: Box, cfg: FitConfig, rng):
    from .maps import spectral_norm

    d = target.dim
    maps = []
    for _ in range(cfg.n):
        A = rng.standard_normal((d, d))
        norm = spectral_norm(A)
        if norm > 0:
            A *= rng.uniform(0.1, 0.8) * cfg.s_max / norm
        anchor = target.points[rng.integers(0, len(target))]
        b = anchor - A @ anchor
        maps.append(project_map(A, b, box, cfg.s_max))
    return tuple(maps)


def _candidate_moves(params: np.ndarray, n: int, d: int, box: Box, step: float):
    """Trial parameter vectors around the current point.

    Three families, each in both signs: single coordinates; per-map stretches
    of A[r, c] with b[r] compensated about the domain center (a raw A change
    drags the image piece, trapping plain coordinate descent in a diagonal
    valley); and a joint stretch of every map about its own image center,
    which escapes the plateaus of the max-objective when several pieces
    attain the worst distance simultaneously.
    """
    per = d * d + d
    center = box.center
    for sign in (1.0, -1.0):
        delta = sign * step
        for idx in range(params.size):
            trial = params.copy()
            trial[idx] += delta
            yield trial
        for i in range(n):
            base = i * per
            for r in range(d):
                for c in range(d):
                    trial = params.copy()
                    trial[base + r * d + c] += delta
                    trial[base + d * d + r] -= delta * center[c]
                    yield trial
        for r in range(d):
            for c in range(d):
                trial = params.copy()
                for i in range(n):
                    base = i * per
                    A = params[base : base + d * d].reshape(d, d)
                    b = params[base + d * d : base + per]
                    own_center = A @ center + b
                    trial[base + r * d + c] += delta
                    trial[base + d * d + r] -= delta * own_center[c]
                yield trial


def _descend(target, box, cfg, maps0):
    d = target.dim
    step0 = cfg.initial_step if cfg.initial_step is not None else 0.1 * box.diameter
    if step0 <= 0.0:
        step0 = 0.1  # degenerate single-point domain
    stop_step = max(step0 * 1e-6, 1e-12)

    params = _pack(_unpack(_pack(maps0), cfg.n, d, box, cfg.s_max))
    best = collage_distance(IFS(box, _unpack(params, cfg.n, d, box, cfg.s_max)), target)
    history = [best]
    step = step0
    for _ in range(cfg.max_iters):
        improved = False
        for trial in _candidate_moves(params, cfg.n, d, box, step):
            trial_maps = _unpack(trial, cfg.n, d, box, cfg.s_max)
            value = collage_distance(IFS(box, trial_maps), target)
            if value < best:
                best = value
                params = _pack(trial_maps)  # keep the projected coefficients
                history.append(best)
                improved = True
                break
        if not improved:
            step *= cfg.step_decay
            if step < stop_step:
                break
    return _unpack(params, cfg.n, d, box, cfg.s_max), best, history


def _baseline_maps(target: PointSet, box: Box, cfg: FitConfig):
    """Constant maps pinned at evenly spaced target points."""
    d = target.dim
    picks = np.linspace(0, len(target) - 1, cfg.n).round().astype(int)
    return tuple(
        AffineMap(np.zeros((d, d)), target.points[p]) for p in picks
    )


def fit_ifs(
    target: PointSet,
    cfg: FitConfig,
    domain: Box | None = None,
    init_maps=None,
) -> FitResult:
    """Fit an n-map system to a target set by minimizing the collage distance.

    Restart 0 starts from `init_maps` when given (warm start), then a slab
    heuristic, then seeded random candidates; the best final objective wins,
    earlier restarts keeping ties.  Deterministic for a fixed cfg.seed.
    """
    box = domain if domain is not None else Box(target.points.min(axis=0), target.points.max(axis=0))
    if not box.contains(target.points, tol=target.resolution / 2.0 + 1e-9):
        raise InputError("target points must lie inside the declared domain")
    rng = np.random.default_rng(cfg.seed)

    starts = []
    if init_maps is not None:
        starts.append(tuple(project_map(m.A, m.b, box, cfg.s_max) for m in init_maps))
    starts.append(_heuristic_maps(target, box, cfg))
    while len(starts) < cfg.restarts:
        starts.append(_random_maps(target, box, cfg, rng))
    starts = starts[: cfg.restarts]

    best_maps, best_value, best_history = None, np.inf, []
    for maps0 in starts:
        maps, value, history = _descend(target, box, cfg, maps0)
        # numerically tied restarts (mirror-image optima) keep the earliest,
        # which preserves orientation across warm-started frame sequences
        if value < best_value - 1e-9:
            best_maps, best_value, best_history = maps, value, history

    baseline = _baseline_maps(target, box, cfg)
    baseline_value = collage_distance(IFS(box, baseline), target)
    if best_maps is None or best_value > baseline_value:
        return FitResult(
            IFS(box, baseline), baseline_value, (baseline_value,), baseline_fallback=True
        )
    return FitResult(IFS(box, best_maps), best_value, tuple(best_history))


def fit_sequence(
    targets, cfg: FitConfig, domain: Box | None = None
) -> FitSequenceResult:
    """Fit every frame, warm-starting each from the previous fit, then align
    the fitted chain.  Frame failures carry the frame index."""
    targets = list(targets)
    if not targets:
        raise InputError("need at least one target frame")
    if domain is None:
        lo = np.min([t.points.min(axis=0) for t in targets], axis=0)
        hi = np.max([t.points.max(axis=0) for t in targets], axis=0)
        domain = Box(lo, hi)
    results = []
    previous = None
    for k, target in enumerate(targets, start=1):
        try:
            result = fit_ifs(target, cfg, domain=domain, init_maps=previous)
        except (InputError, PreconditionError) as exc:
            raise type(exc)(f"frame {k}: {exc}") from exc
        results.append(result)
        previous = result.ifs.maps
    sequence = align_chain(IFSSequence(tuple(r.ifs for r in results)))
    return FitSequenceResult(
        sequence=sequence,
        distances=tuple(r.distance for r in results),
        results=tuple(results),
    )


def _limit_and_ratio(y: np.ndarray):
    """Estimated limit and step ratio of a convergent coefficient series.

    Solves y_j = s + (alpha*j + gamma) * (y_j - y_{j-1}) in least squares,
    which is exact both for geometric tails c + beta*rho^j and for harmonic
    tails c + a/j.  Returns None when the series does not show a usable
    one-sided decay.
    """
    m = y.size
    diffs = np.diff(y)
    scale = max(np.abs(y).max(), 1.0)
    if np.abs(diffs[-3:]).max() <= 1e-12 * scale:
        return float(y[-1]), 0.0  # already converged
    recent = diffs[-3:] if diffs.size >= 3 else diffs
    if not (np.all(recent > 0) or np.all(recent < 0)):
        return float(y[-1]), 0.0  # oscillation, treat as settled noise
    rho = diffs[-1] / diffs[-2] if diffs.size >= 2 and diffs[-2] != 0.0 else None
    if rho is None or not np.isfinite(rho):
        return None
    if abs(rho) >= 1.0:
        return None
    if m >= 4:
        j = np.arange(2, m + 1, dtype=float)  # 1-based indices with a prior step
        w = diffs  # w_j = y_j - y_{j-1}
        design = np.column_stack([np.ones(m - 1), j * w, w])
        coeffs, *_ = np.linalg.lstsq(design, y[1:], rcond=None)
        limit = float(coeffs[0])
    else:
        # exactly three points: classic three-point geometric fit
        limit = float(y[-1] + diffs[-1] * rho / (1.0 - rho))
    if not np.isfinite(limit):
        return None
    # a limit far outside the observed range signals a blowup, not a trend
    spread = float(y.max() - y.min())
    lo, hi = y.min() - 10.0 * spread, y.max() + 10.0 * spread
    return float(np.clip(limit, lo, hi)), float(rho)


def _extrapolate_series(y: np.ndarray, horizon: int, kind: str) -> float:
    if kind == "hold-last" or horizon == 0:
        return float(y[-1])
    if kind == "linear":
        j = np.arange(1, y.size + 1, dtype=float)
        slope = float(np.polyfit(j, y, 1)[0]) if y.size > 1 else 0.0
        return float(y[-1] + slope * horizon)
    fitted = _limit_and_ratio(y)
    if fitted is None:
        warnings.warn(
            "geometric decay not identifiable (step ratio >= 1); falling back "
            "to the linear model",
            RuntimeWarning,
            stacklevel=3,
        )
        return _extrapolate_series(y, horizon, "linear")
    limit, rho = fitted
    return float(limit + (y[-1] - limit) * rho**horizon)


def extrapolate(seq: IFSSequence, model: ExtrapolationModel) -> IFS:
    """Carry each affine coefficient of the aligned chain `horizon` steps past
    the final term and rebuild a feasible system."""
    aligned = align_chain(seq)
    minimum = 3 if model.kind == "geometric" else 2
    if len(aligned) < minimum:
        raise PreconditionError(
            f"{model.kind} extrapolation needs at least {minimum} terms"
        )
    d = aligned.domain.dim
    n = aligned.n
    maps = []
    for i in range(n):
        series = np.array(
            [np.concatenate([term.maps[i].A.ravel(), term.maps[i].b]) for term in aligned.terms]
        )
        coeffs = np.array(
            [
                _extrapolate_series(series[:, c], model.horizon, model.kind)
                for c in range(series.shape[1])
            ]
        )
        maps.append(
            project_map(coeffs[: d * d].reshape(d, d), coeffs[d * d :], aligned.domain, model.s_max)
        )
    return IFS(aligned.domain, tuple(maps))
