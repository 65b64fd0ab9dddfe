import numpy as np
import pytest

from ifsseq import IFS, AffineMap, Box, InputError, PreconditionError, big_d
from ifsseq.sequences import (
    IFSSequence,
    align_chain,
    cauchy_index,
    converges_to,
    eventually_decreasing_at,
    is_decreasing,
    limit_candidate,
    limit_of_contractions,
    pairwise_distances,
)

from conftest import cantor_ifs, cantor_term, random_ifs

EXACT = 1e-12


def scaling_pair(box, a1, a2):
    """Two-map system with factors (a1, a2), anchored at 0 and 1."""
    return IFS(box, (AffineMap([[a1]], [0.0]), AffineMap([[a2]], [1.0 - a2])))


@pytest.fixture
def cantor_seq(unit_box):
    return IFSSequence(tuple(cantor_term(j, unit_box) for j in range(1, 11)))


class TestConstruction:
    def test_rejects_mixed_arity(self, unit_box, ifs_s):
        single = IFS(unit_box, (AffineMap([[0.5]], [0.0]),))
        with pytest.raises(InputError):
            IFSSequence((ifs_s, single))

    def test_rejects_empty(self):
        with pytest.raises(InputError):
            IFSSequence(())


class TestAlignChain:
    def test_second_term_reordered(self, ifs_s, ifs_u):
        seq = align_chain(IFSSequence((ifs_s, ifs_u)))
        assert seq.aligned
        assert seq.alignment[0].is_identity
        assert seq.alignment[1].image == (1, 0)
        assert seq.terms[1].maps == (ifs_u.maps[1], ifs_u.maps[0])

    def test_idempotent(self, ifs_s, ifs_t, ifs_u):
        seq = align_chain(IFSSequence((ifs_s, ifs_t, ifs_u)))
        again = align_chain(seq)
        assert again is seq

    def test_preserves_consecutive_distances(self, unit_box):
        rng = np.random.default_rng(21)
        for _ in range(10):
            terms = tuple(random_ifs(rng, unit_box, 3) for _ in range(4))
            seq = IFSSequence(terms)
            aligned = align_chain(seq)
            for j in range(3):
                assert big_d(aligned.terms[j], aligned.terms[j + 1]) == pytest.approx(
                    big_d(terms[j], terms[j + 1]), abs=EXACT
                )

    def test_each_link_matches_pairwise_matching(self, unit_box):
        from ifsseq import minimal_order

        rng = np.random.default_rng(22)
        terms = tuple(random_ifs(rng, unit_box, 3) for _ in range(4))
        aligned = align_chain(IFSSequence(terms))
        for j in range(1, 4):
            expected, _ = minimal_order(aligned.terms[j - 1], terms[j])
            assert aligned.terms[j] == expected


class TestMonotonicity:
    def test_constant_sequence_is_decreasing(self, ifs_s):
        seq = IFSSequence((ifs_s, ifs_s, ifs_s))
        assert is_decreasing(seq)
        assert eventually_decreasing_at(seq) == 1

    def test_decreasing_factor_profile(self, unit_box):
        seq = IFSSequence(
            (
                scaling_pair(unit_box, 0.5, 0.5),
                scaling_pair(unit_box, 0.4, 0.45),
                scaling_pair(unit_box, 0.3, 0.4),
            )
        )
        assert is_decreasing(seq)

    def test_slot_increase_breaks_decrease(self, unit_box):
        seq = IFSSequence(
            (scaling_pair(unit_box, 0.3, 0.3), scaling_pair(unit_box, 0.5, 0.2))
        )
        assert not is_decreasing(seq)

    def test_eventually_decreasing_after_one_bump(self, unit_box):
        factors = [(0.5, 0.5), (0.4, 0.4), (0.6, 0.6), (0.5, 0.5), (0.4, 0.4)]
        seq = IFSSequence(tuple(scaling_pair(unit_box, a, b) for a, b in factors))
        # the single increase lands on term 3, the tail decreases from there
        assert not is_decreasing(seq)
        assert eventually_decreasing_at(seq) == 3

    def test_strictly_increasing_has_no_witness(self, unit_box):
        seq = IFSSequence(
            tuple(scaling_pair(unit_box, 0.1 * j, 0.1 * j) for j in range(1, 6))
        )
        assert eventually_decreasing_at(seq) is None


class TestCauchy:
    def test_constant_sequence(self, ifs_t):
        seq = IFSSequence((ifs_t, ifs_t, ifs_t))
        assert cauchy_index(seq, 1e-9) == 1

    def test_cantor_sequence_at_point_one(self, cantor_seq):
        # D(S_j, S_k) = u/(1+u) with u = |1/(3j) - 1/(3k)|; the tail from
        # term 2 still reaches u = 2/15 (D ~ 0.118), from term 3 the worst
        # pair has u = 7/90 (D ~ 0.072), so the witness index is 3
        assert cauchy_index(cantor_seq, 0.1) == 3

    def test_fixed_gap_never_cauchy(self, ifs_s, ifs_t):
        seq = IFSSequence((ifs_s, ifs_t, ifs_s, ifs_t))
        gap = big_d(ifs_s, ifs_t)
        assert gap > 0.1
        assert cauchy_index(seq, 0.1) is None

    def test_monotone_in_eps(self, cantor_seq):
        indices = [cauchy_index(cantor_seq, eps) for eps in (0.02, 0.05, 0.1, 0.5)]
        witnessed = [i for i in indices if i is not None]
        assert witnessed == sorted(witnessed, reverse=True)

    def test_oracle_scan_agrees(self, cantor_seq):
        dist = pairwise_distances(cantor_seq)
        eps = 0.03
        m = len(cantor_seq)
        expected = next(
            (
                n + 1
                for n in range(m - 1)
                if all(dist[j, k] < eps for j in range(n, m) for k in range(n, m))
            ),
            None,
        )
        assert cauchy_index(cantor_seq, eps) == expected


class TestConvergesTo:
    def test_cantor_sequence_to_limit(self, cantor_seq, unit_box):
        # D(S_j, S) = 1/(3j+1) < 0.05 exactly when j >= 7
        assert converges_to(cantor_seq, cantor_ifs(unit_box), 0.05) == 7

    def test_constant_sequence(self, ifs_t):
        seq = IFSSequence((ifs_t, ifs_t))
        assert converges_to(seq, ifs_t, 1e-9) == 1

    def test_far_target_absent(self, cantor_seq, ifs_u, unit_box):
        assert all(big_d(t, ifs_u) >= 0.2 for t in cantor_seq.terms)
        assert converges_to(cantor_seq, ifs_u, 0.1) is None


class TestLimitOfContractions:
    def test_shrinking_scalings(self, unit_box):
        maps = [AffineMap([[1.0 / 3.0 + 1.0 / (3.0 * n)]], [0.0]) for n in range(1, 61)]
        limit, bound = limit_of_contractions(maps, unit_box, eps=1e-3)
        assert limit == maps[-1]
        assert bound == pytest.approx(1.0 / 3.0 + 1.0 / 180.0, abs=EXACT)
        assert limit.contractivity <= bound + 1e-3

    def test_constant_sequence(self, unit_box):
        f = AffineMap([[0.4]], [0.1])
        limit, bound = limit_of_contractions([f, f, f], unit_box, eps=0.5)
        assert limit == f
        assert bound == f.contractivity

    def test_rejects_increasing_factors(self, unit_box):
        maps = [AffineMap([[1.0 - 1.0 / n]], [0.0]) for n in range(1, 30)]
        with pytest.raises(PreconditionError, match="eventually decreasing"):
            limit_of_contractions(maps, unit_box, eps=0.9)

    def test_rejects_non_cauchy(self, unit_box):
        f = AffineMap([[0.3]], [0.0])
        g = AffineMap([[0.3]], [0.5])
        with pytest.raises(PreconditionError, match="Cauchy"):
            limit_of_contractions([f, g, f, g], unit_box, eps=0.05)

    def test_factor_bound_dominates_tail(self, unit_box):
        rng = np.random.default_rng(31)
        for _ in range(20):
            base = rng.uniform(0.2, 0.5)
            maps = [
                AffineMap([[base + 0.4 / (n + 1)]], [0.0]) for n in range(1, 12)
            ]
            _, bound = limit_of_contractions(maps, unit_box, eps=0.5)
            tail = [m.contractivity for m in maps]
            assert bound <= min(tail) + 0.5


class TestLimitCandidate:
    def test_cantor_sequence_report(self, cantor_seq, unit_box):
        report = limit_candidate(cantor_seq, eps=0.2)
        # candidate equals the final aligned term, so the residual vanishes
        assert report.limit == cantor_seq.terms[-1]
        assert report.residual == 0.0
        assert report.decreasing
        assert report.eventually_decreasing_at == 1
        assert report.cauchy_at is not None
        # the candidate sits 1/(3*10+1) away from the true middle-thirds system
        assert big_d(report.limit, cantor_ifs(unit_box)) == pytest.approx(
            1.0 / 31.0, abs=EXACT
        )

    def test_constant_sequence_residual_zero(self, ifs_t):
        report = limit_candidate(IFSSequence((ifs_t, ifs_t, ifs_t)), eps=0.5)
        assert report.limit == ifs_t
        assert report.residual == 0.0

    def test_plane_triple_alignment(self, plane_s, plane_t, plane_u):
        # generous eps so the constant-map chain passes the Cauchy gate
        report = limit_candidate(IFSSequence((plane_s, plane_t, plane_u)), eps=1.9)
        assert [p.describe() for p in report.alignment] == ["identity", "identity", "identity"]
        assert report.decreasing  # constant maps all have factor zero
        assert report.limit is not None

    def test_slot_error_carries_index(self, unit_box):
        good = AffineMap([[0.2]], [0.0])
        growing = [AffineMap([[1.0 - 1.0 / n]], [0.0]) for n in (2, 3, 4)]
        terms = tuple(
            IFS(unit_box, (good, g)) for g in growing
        )
        with pytest.raises(PreconditionError, match="slot 2"):
            limit_candidate(IFSSequence(terms), eps=0.9)

    def test_strict_decrease_of_cantor_distances(self, cantor_seq, unit_box):
        target = cantor_ifs(unit_box)
        dists = [big_d(t, target) for t in cantor_seq.terms]
        assert all(a > b for a, b in zip(dists, dists[1:]))
        for j, d in enumerate(dists, start=1):
            assert d == pytest.approx(1.0 / (3.0 * j + 1.0), abs=EXACT)
