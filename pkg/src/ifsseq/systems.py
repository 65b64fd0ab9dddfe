"""Iterated function systems with a fixed arity and the assignment metric D.

D(S, T) is the minimum over permutations sigma of sum_i dbar(f_i, g_sigma(i)).
The minimum is found with a Hungarian-style solver; ties between co-optimal
permutations are broken toward the lexicographically smallest image, which
makes reordering operations deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError, ResourceLimitError
from .maps import AffineMap, Box, dbar_inf

MATCH_TOL = 1e-12
FACTOR_TOL = 1e-12
BRUTE_FORCE_MAX_N = 8


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection on {0..n-1}, stored as the image tuple."""

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        n = len(image)
        if n == 0 or sorted(image) != list(range(n)):
            raise InputError(f"{image} is not a permutation of 0..{n - 1}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def __len__(self):
        return len(self.image)

    @property
    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self.image))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for i, v in enumerate(self.image):
            inv[v] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(i) = self(other(i))."""
        if len(self) != len(other):
            raise InputError("permutation sizes differ")
        return Permutation(tuple(self.image[j] for j in other.image))

    def apply(self, items):
        """Reorder a sequence: result[i] = items[image[i]]."""
        items = list(items)
        if len(items) != len(self.image):
            raise InputError("sequence length does not match permutation size")
        return [items[j] for j in self.image]

    def describe(self) -> str:
        """Human-readable 1-based form, e.g. 'identity' or '(2 1)'."""
        if self.is_identity:
            return "identity"
        return "(" + " ".join(str(i + 1) for i in self.image) + ")"

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.image == other.image

    def __hash__(self):
        return hash(self.image)

    def __repr__(self):
        return f"Permutation({self.image})"


@dataclass(frozen=True, eq=False)
class IFS:
    """A box domain plus an ordered list of contractions mapping it into itself."""

    domain: Box
    maps: tuple[AffineMap, ...]

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise InputError("an IFS needs at least one map")
        for k, m in enumerate(maps):
            if m.dim != self.domain.dim:
                raise InputError(f"map {k} has dimension {m.dim}, domain has {self.domain.dim}")
            if m.contractivity >= 1.0:
                raise InputError(f"map {k} is not a contraction (factor {m.contractivity})")
            if not m.maps_into(self.domain):
                raise InputError(f"map {k} does not send the domain into itself")
        object.__setattr__(self, "maps", maps)

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def contractivity(self) -> float:
        """Largest factor among the maps."""
        return max(m.contractivity for m in self.maps)

    def reordered(self, sigma: Permutation) -> "IFS":
        """Same system with maps[i] replaced by maps[sigma(i)]."""
        return IFS(self.domain, tuple(sigma.apply(self.maps)))

    def __eq__(self, other):
        if not isinstance(other, IFS):
            return NotImplemented
        return self.domain == other.domain and self.maps == other.maps

    def __hash__(self):
        return hash((self.domain, self.maps))

    def __repr__(self):
        return f"IFS(domain={self.domain!r}, n={self.n})"


def ifs_contractivity(S: IFS) -> float:
    return S.contractivity


def _check_comparable(S: IFS, T: IFS):
    if S.n != T.n:
        raise InputError(f"arity mismatch: {S.n} vs {T.n} maps")
    if S.domain != T.domain:
        raise InputError("systems live on different domains")


def cost_matrix(S: IFS, T: IFS) -> np.ndarray:
    """Entry (i, j) = dbar(f_i, g_j) over the shared domain; all in [0, 1)."""
    _check_comparable(S, T)
    n = S.n
    C = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            C[i, j] = dbar_inf(S.maps[i], T.maps[j], S.domain)
    return C


def _solver_cost(C: np.ndarray) -> float:
    rows, cols = linear_sum_assignment(C)
    return float(C[rows, cols].sum())


def optimal_matching(C: np.ndarray) -> tuple[Permutation, float]:
    """Minimum-cost assignment on a square matrix.

    Among co-optimal permutations (up to MATCH_TOL) the lexicographically
    smallest image wins, fixed by greedily pinning each row to the smallest
    column whose optimal completion still reaches the overall minimum.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.size == 0:
        raise InputError("cost matrix must be square and nonempty")
    if not np.all(np.isfinite(C)):
        raise InputError("cost matrix entries must be finite")
    n = C.shape[0]
    best = _solver_cost(C)
    image: list[int] = []
    free = list(range(n))
    prefix = 0.0
    for i in range(n):
        for j in free:
            rest = [c for c in free if c != j]
            completion = _solver_cost(C[np.ix_(range(i + 1, n), rest)]) if rest else 0.0
            if prefix + C[i, j] + completion <= best + MATCH_TOL:
                image.append(j)
                free.remove(j)
                prefix += C[i, j]
                break
        else:  # numerically impossible, every row must pin somewhere
            raise AssertionError("assignment refinement failed to pin a column")
    sigma = Permutation(tuple(image))
    cost = float(sum(C[i, sigma.image[i]] for i in range(n)))
    return sigma, cost


def matching_brute_force(C: np.ndarray) -> tuple[Permutation, float]:
    """Exhaustive n! oracle with the same lexicographic tie-break."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise ResourceLimitError(f"brute-force enumeration capped at n={BRUTE_FORCE_MAX_N}")
    best_perm = None
    best_cost = np.inf
    for perm in itertools.permutations(range(n)):
        cost = float(sum(C[i, perm[i]] for i in range(n)))
        if cost < best_cost:
            best_cost = cost
            best_perm = perm
    return Permutation(best_perm), best_cost


def big_d(S: IFS, T: IFS) -> float:
    """The assignment metric D between two same-arity systems."""
    return optimal_matching(cost_matrix(S, T))[1]


def minimal_order(S: IFS, T: IFS) -> tuple[IFS, Permutation]:
    """Reindex T so it is minimally ordered with respect to S.

    Returns the reordered system and the permutation applied, so that the
    identity matching attains D(S, result).
    """
    sigma, _ = optimal_matching(cost_matrix(S, T))
    return T.reordered(sigma), sigma


def is_minimally_ordered(candidate: IFS, reference: IFS) -> bool:
    """True iff the identity matching of candidate against reference is optimal."""
    C = cost_matrix(reference, candidate)
    _, best = optimal_matching(C)
    return float(np.trace(C)) <= best + MATCH_TOL


def leq(S: IFS, T: IFS) -> bool:
    """Slotwise factor comparison S <= T after aligning T to S."""
    aligned, _ = minimal_order(S, T)
    return all(
        f.contractivity <= g.contractivity + FACTOR_TOL
        for f, g in zip(S.maps, aligned.maps)
    )


def is_mo_set(systems) -> bool:
    """Whether minimal ordering restricted to the collection is transitive.

    Reflexivity and symmetry hold for any collection, so the relation is an
    equivalence on the set exactly when every ordered triple is transitive.
    """
    systems = list(systems)
    for a in systems[1:]:
        _check_comparable(systems[0], a)
    m = len(systems)
    rel = [[is_minimally_ordered(systems[j], systems[i]) for j in range(m)] for i in range(m)]
    for i in range(m):
        for j in range(m):
            for k in range(m):
                if rel[i][j] and rel[j][k] and not rel[i][k]:
                    return False
    return True
