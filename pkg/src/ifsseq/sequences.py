"""Sequences of same-arity systems: alignment, monotonicity, Cauchy analysis,
and limit extraction.

All predicates act on finite prefixes.  "For every eps there is an N" becomes
"the smallest N witnessed inside the given prefix", and a witness must be
nonvacuous: it has to cover at least one consecutive pair (or, for Cauchy,
one pair of distinct indices).  Returned indices count terms from 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError
from .maps import AffineMap, Box, dbar_inf
from .systems import IFS, Permutation, big_d, leq, minimal_order

FACTOR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IFSSequence:
    """Ordered list of systems sharing arity and domain.

    `aligned` records that consecutive minimal ordering has been applied;
    `alignment` then holds the permutation applied to each term.
    """

    terms: tuple[IFS, ...]
    aligned: bool = False
    alignment: tuple[Permutation, ...] | None = None

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise InputError("a sequence needs at least one term")
        first = terms[0]
        for k, term in enumerate(terms[1:], start=2):
            if term.n != first.n:
                raise InputError(f"term {k} has arity {term.n}, expected {first.n}")
            if term.domain != first.domain:
                raise InputError(f"term {k} lives on a different domain")
        object.__setattr__(self, "terms", terms)

    def __len__(self):
        return len(self.terms)

    @property
    def n(self) -> int:
        return self.terms[0].n

    @property
    def domain(self) -> Box:
        return self.terms[0].domain


@dataclass(frozen=True, eq=False)
class SequenceReport:
    """Aggregate of the sequence diagnostics produced by limit_candidate."""

    pairwise: np.ndarray
    factor_traces: tuple[tuple[float, ...], ...]
    decreasing: bool
    eventually_decreasing_at: int | None
    cauchy_at: int | None
    alignment: tuple[Permutation, ...]
    limit: IFS | None
    residual: float


def align_chain(seq: IFSSequence) -> IFSSequence:
    """Reindex each term so it is minimally ordered with respect to the
    previous (already reindexed) term.  Idempotent; term 1 is unchanged."""
    if seq.aligned:
        return seq
    terms = [seq.terms[0]]
    perms = [Permutation.identity(seq.n)]
    for term in seq.terms[1:]:
        reordered, sigma = minimal_order(terms[-1], term)
        terms.append(reordered)
        perms.append(sigma)
    return IFSSequence(tuple(terms), aligned=True, alignment=tuple(perms))


def pairwise_distances(seq: IFSSequence) -> np.ndarray:
    """Symmetric matrix of D between all pairs of terms."""
    m = len(seq)
    out = np.zeros((m, m))
    for j in range(m):
        for k in range(j + 1, m):
            out[j, k] = out[k, j] = big_d(seq.terms[j], seq.terms[k])
    return out


def _pair_flags(seq: IFSSequence) -> list[bool]:
    """leq(term_{j+1}, term_j) for each consecutive pair of the aligned chain."""
    aligned = align_chain(seq)
    return [
        leq(aligned.terms[j + 1], aligned.terms[j])
        for j in range(len(aligned) - 1)
    ]


def is_decreasing(seq: IFSSequence) -> bool:
    return all(_pair_flags(seq))


def _eventually_from_flags(flags: list[bool]) -> int | None:
    if all(flags):
        return 1
    last_bad = max(j for j, ok in enumerate(flags) if not ok)  # 0-based pair index
    start = last_bad + 2  # first term of the decreasing tail, 1-based
    return start if start <= len(flags) else None


def eventually_decreasing_at(seq: IFSSequence) -> int | None:
    """Smallest k such that the chain decreases from term k on; None when the
    prefix holds no nonvacuous witness."""
    return _eventually_from_flags(_pair_flags(seq))


def _cauchy_from_matrix(dist: np.ndarray, eps: float) -> int | None:
    if eps <= 0.0:
        raise InputError("eps must be positive")
    m = dist.shape[0]
    if m == 1:
        return 1
    for start in range(m - 1):  # need at least one distinct pair in the tail
        tail = dist[start:, start:]
        if float(tail.max(initial=0.0)) < eps:
            return start + 1
    return None


def cauchy_index(seq: IFSSequence, eps: float) -> int | None:
    """Smallest N with D(term_j, term_k) < eps for all j, k >= N."""
    return _cauchy_from_matrix(pairwise_distances(seq), eps)


def converges_to(seq: IFSSequence, target: IFS, eps: float) -> int | None:
    """Smallest N with D(term_j, target) < eps for every j >= N."""
    if eps <= 0.0:
        raise InputError("eps must be positive")
    dists = [big_d(term, target) for term in seq.terms]
    if dists[-1] >= eps:
        return None
    bad = [j for j, d in enumerate(dists) if d >= eps]
    return (max(bad) + 2) if bad else 1


def limit_of_contractions(
    maps, domain: Box, eps: float
) -> tuple[AffineMap, float]:
    """Limit candidate of a finite contraction sequence under dbar.

    Requires the contractivity factors to be eventually decreasing and the
    sequence to be empirically Cauchy at eps; the candidate is the final map
    (coefficient-wise limit of an affine Cauchy sequence) and the certified
    factor bound is the minimum over the decreasing tail.
    """
    maps = list(maps)
    if not maps:
        raise InputError("need at least one map")
    if eps <= 0.0:
        raise InputError("eps must be positive")
    factors = [m.contractivity for m in maps]
    flags = [factors[j + 1] <= factors[j] + FACTOR_TOL for j in range(len(factors) - 1)]
    start = _eventually_from_flags(flags)
    if start is None:
        raise PreconditionError(
            "contractivity factors are not eventually decreasing"
        )
    m = len(maps)
    dist = np.zeros((m, m))
    for j in range(m):
        for k in range(j + 1, m):
            dist[j, k] = dist[k, j] = dbar_inf(maps[j], maps[k], domain)
    if _cauchy_from_matrix(dist, eps) is None:
        raise PreconditionError(f"sequence is not Cauchy at eps={eps}")
    bound = min(factors[start - 1 :])
    return maps[-1], float(bound)


def limit_candidate(seq: IFSSequence, eps: float) -> SequenceReport:
    """Per-slot limit extraction over the aligned chain.

    The limit candidate is the final aligned term (no extrapolation), so the
    residual D(last term, limit) is zero whenever extraction succeeds.
    Slot-level precondition failures are re-raised with the offending slot.
    """
    aligned = align_chain(seq)
    dist = pairwise_distances(aligned)
    flags = _pair_flags(aligned)
    traces = tuple(
        tuple(term.maps[i].contractivity for term in aligned.terms)
        for i in range(aligned.n)
    )
    limit_maps = []
    for i in range(aligned.n):
        slot = [term.maps[i] for term in aligned.terms]
        try:
            limit_map, _ = limit_of_contractions(slot, aligned.domain, eps)
        except PreconditionError as exc:
            raise PreconditionError(f"slot {i + 1}: {exc}") from exc
        limit_maps.append(limit_map)
    limit = IFS(aligned.domain, tuple(limit_maps))
    return SequenceReport(
        pairwise=dist,
        factor_traces=traces,
        decreasing=all(flags),
        eventually_decreasing_at=_eventually_from_flags(flags),
        cauchy_at=_cauchy_from_matrix(dist, eps),
        alignment=aligned.alignment,
        limit=limit,
        residual=big_d(aligned.terms[-1], limit),
    )
