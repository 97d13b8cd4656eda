from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtc.quiver import YState, mutate_quiver, mutate_y
from mtc.surface import (
    FlipRecord,
    SelfFoldedError,
    Triangulation,
    TriangulationError,
    corner_cycles,
    flip,
    flip_sequence,
    puncture_monomial,
    quiver_of,
    require_valid,
    same_cycle,
    validate,
)

from helpers import flippable, random_flips
from oracles import rationals

TORUS = Triangulation([1, 2, 3], [(1, 2, 3), (1, 2, 3)], {"p": (1, 2, 3, 1, 2, 3)})


class TestValidate:
    def test_shipped_are_valid(self, presentation):
        assert validate(presentation.base) == []

    def test_unknown_arc(self):
        t = Triangulation([1, 2, 3], [(1, 2, 17), (1, 2, 3)], {"p": (1, 2, 3, 1, 2, 3)})
        assert any("17" in p for p in validate(t))

    def test_self_folded_triangle(self):
        t = Triangulation([1, 2], [(1, 1, 2)], {"p": (1, 1, 2)})
        assert any("self-folded triangle (1, 1, 2)" in p for p in validate(t))

    def test_arc_multiplicity(self):
        t = Triangulation([1, 2, 3, 4], [(1, 2, 3), (1, 2, 4)], {"p": (1, 2, 3, 1, 2, 4)})
        msgs = validate(t)
        assert any("arc 3 fills 1" in m for m in msgs) and any("arc 4 fills 1" in m for m in msgs)

    def test_corner_count(self):
        t = Triangulation([1, 2, 3], [(1, 2, 3), (1, 2, 3)], {"p": (1, 2, 3)})
        assert any("corners" in m for m in validate(t))

    def test_loop_pairs_must_share_a_triangle(self, sphere):
        loops = dict(sphere.base.puncture_loops)
        loops["A"], loops["D"] = (1, 4), (5, 7)
        msgs = validate(Triangulation(sphere.base.arcs, sphere.base.triangles, loops))
        assert any("not two sides of a triangle" in m for m in msgs)

    def test_loops_must_match_corner_cycles(self, sphere):
        # a cyclic sequence that uses valid consecutive pairs but is not a corner cycle
        loops = dict(sphere.base.puncture_loops)
        loops["B"], loops["O"] = loops["O"][:4], loops["B"] + loops["O"][4:]
        assert validate(Triangulation(sphere.base.arcs, sphere.base.triangles, loops))

    def test_loops_accept_rotation_and_reversal(self, sphere):
        loops = dict(sphere.base.puncture_loops)
        loops["O"] = tuple(reversed(loops["O"][2:] + loops["O"][:2]))
        assert validate(Triangulation(sphere.base.arcs, sphere.base.triangles, loops)) == []

    def test_require_valid_raises(self):
        with pytest.raises(TriangulationError, match="invalid triangulation"):
            require_valid(Triangulation([1, 2], [(1, 1, 2)], {"p": (1, 1, 2)}))


class TestQuiverOf:
    def test_torus_has_double_arrows(self):
        # each arc follows each other arc clockwise in both triangles
        assert quiver_of(TORUS).bbar.tolist() == [[0, -2, 2], [2, 0, -2], [-2, 2, 0]]

    def test_opposite_orientations_cancel(self):
        # (1,2,3),(1,3,2) is the thrice-punctured sphere: each pair of arcs
        # appears once in each cyclic order, so every arrow cancels
        tris = [(1, 2, 3), (1, 3, 2)]
        cycles = corner_cycles(tris)
        loops = {n: tuple(tris[i][(p + 1) % 3] for i, p in c) for n, c in enumerate(cycles)}
        t = Triangulation([1, 2, 3], tris, loops)
        assert validate(t) == [] and len(t.punctures) == 3
        assert not quiver_of(t).bbar.any()

    def test_single_triangle_rule(self, sphere):
        # clockwise (1, 5, 2) contributes 5 -> 1, 2 -> 5, 1 -> 2, and arcs 1, 2 share no other triangle
        q = quiver_of(sphere.base)
        assert q.Q(1, 2) == 1 and q.Q(2, 1) == 0

    def test_sphere_row_sums(self, sphere):
        # every arc borders two distinct triangles on a surface without self-folded triangles
        q = quiver_of(sphere.base)
        assert all(sum(abs(v) for v in row) <= 4 for row in q.bbar.tolist())


class TestFlip:
    def test_record_and_new_triangles(self):
        t2, rec = flip(TORUS, 2)
        assert rec == FlipRecord(2, 2, 3, 1, 3, 1)
        assert Counter(t2.triangles) == Counter([(2, 1, 3), (2, 1, 3)])
        assert validate(t2) == []

    def test_flip_twice_restores_triangle_set(self, presentation):
        t = presentation.base
        for e in flippable(t):
            t2, _ = flip(t, e)
            t3, _ = flip(t2, e)
            assert t3.triangle_multiset() == t.triangle_multiset()
            assert all(same_cycle(t3.puncture_loops[m], t.puncture_loops[m]) for m in t.punctures)

    def test_unknown_arc(self):
        with pytest.raises(TriangulationError, match="unknown arc 9"):
            flip(TORUS, 9)

    def test_self_folded_refused(self, sphere):
        # puncture A has degree two (loop (1, 5)); flipping 5 would leave a degree-one puncture
        with pytest.raises(SelfFoldedError, match="flipping 5"):
            flip(sphere.base, 5)
        assert 5 not in flippable(sphere.base) and 8 in flippable(sphere.base)

    def test_flip_sequence_step_in_message(self, sphere):
        with pytest.raises(SelfFoldedError, match="step 1"):
            flip_sequence(sphere.base, [9, 5])

    def test_compatible_with_mutation_on_shipped_sequences(self, presentation):
        snaps, records = flip_sequence(presentation.base, presentation.flips)
        for t, k in enumerate(presentation.flips):
            assert quiver_of(snaps[t + 1]) == mutate_quiver(quiver_of(snaps[t]), k)
            assert records[t].h == k

    @settings(max_examples=200)
    @given(st.randoms(use_true_random=False), st.integers(1, 20), st.sampled_from(["torus", "sphere"]))
    def test_compatible_with_mutation_random(self, rnd, length, which):
        from mtc.problem import parse, shipped

        name = "once_punctured_torus_LR" if which == "torus" else "five_punctured_sphere_s1s2s3inv"
        t0 = _BASES.setdefault(name, parse(shipped(name)).triangulation)
        seq, snaps = random_flips(t0, rnd, length)
        q = quiver_of(t0)
        for k, t in zip(seq, snaps[1:]):
            q = mutate_quiver(q, k)
            assert quiver_of(t) == q

    def test_loops_stay_valid_along_random_sequences(self, presentation, rng):
        _, snaps = random_flips(presentation.base, rng, 30)
        assert all(validate(t) == [] for t in snaps)


_BASES: dict = {}


class TestPunctureMonomials:
    def test_casimir_under_flip_exact(self, presentation, rng):
        t = presentation.base
        y = dict(zip(t.arcs, rationals(rng, len(t.arcs))))
        before = {m: puncture_monomial(t, m, y) for m in t.punctures}
        seq, snaps = random_flips(t, rng, 12)
        s = YState(y)
        for k, ta in zip(seq, snaps):
            s = mutate_y(quiver_of(ta), s, k)
        after = {m: puncture_monomial(snaps[len(seq)], m, s) for m in t.punctures}
        assert before == after

    def test_corner_cycles_cover_corners(self, presentation):
        cycles = corner_cycles(presentation.base.triangles)
        assert sum(len(c) for c in cycles) == 3 * len(presentation.base.triangles)
        assert len(cycles) == len(presentation.base.punctures)


def test_same_cycle():
    assert same_cycle((1, 2, 3, 4), (3, 4, 1, 2))
    assert same_cycle((1, 2, 3, 4), (2, 1, 4, 3))
    assert not same_cycle((1, 2, 3, 4), (1, 3, 2, 4))
    assert not same_cycle((1, 2), (1, 2, 1))
