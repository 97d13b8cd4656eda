import random
from fractions import Fraction

import pytest

from mtc.hyperbolic import gluing_product
from mtc.mtorus import (
    EdgeClass,
    Kind,
    MappingClassPresentation,
    PeriodicityError,
    check_periodicity,
    check_sigma,
    cusp_relations,
    edge_lifecycles,
    gluing_equations,
    layer,
    universal_trajectory,
)
from mtc.quiver import MutationError, YState, apply_sequence
from mtc.surface import quiver_of

from conftest import random_complex
from helpers import rel
from oracles import SPHERE_CUSPS, rationals, sphere_equations, torus_lr_equations

DEGREE = {Kind.END_CREATE: 1, Kind.END_DESTROY: 1, Kind.ADJ_PLUS: 1, Kind.ADJ_MINUS: 1, Kind.ADJ_PLUS2: 2, Kind.ADJ_MINUS2: 2}


class TestPeriodicity:
    def test_shipped_are_periodic(self, presentation):
        ok, why = check_periodicity(presentation)
        assert ok, why

    def test_wrong_relabel_detected(self, torus):
        # a transposition reverses the orientation, negating the quiver
        bad = MappingClassPresentation(torus.base, torus.flips, {1: 2, 2: 1, 3: 3})
        ok, why = check_periodicity(bad)
        assert not ok and "differs" in why
        with pytest.raises(PeriodicityError):
            layer(bad)

    def test_torus_quiver_is_blind_to_rotation(self, torus):
        # the Markov quiver and the triangle set are invariant under cyclic relabeling,
        # so the identity also passes the combinatorial periodicity check
        assert check_periodicity(MappingClassPresentation(torus.base, torus.flips, {1: 1, 2: 2, 3: 3}))[0]

    def test_relabel_not_permutation(self, torus):
        bad = MappingClassPresentation(torus.base, torus.flips, {1: 2, 2: 2, 3: 3})
        assert "not a permutation" in check_sigma(bad)
        assert not check_periodicity(bad)[0]

    def test_quiver_returns(self, presentation):
        lay = layer(presentation)
        assert lay.quivers[-1].relabel(presentation.sigma) == lay.quivers[0]
        assert len(lay.tetrahedra) == presentation.length
        assert len(lay.triangulations) == presentation.length + 1


class TestPrintedSystems:
    """Exact rational trajectories against the periodicity systems written out by hand."""

    @pytest.mark.parametrize("trial", range(20))
    def test_torus(self, torus, trial):
        rng = random.Random(trial)
        y0 = dict(zip(torus.arcs, rationals(rng, 3)))
        try:
            _, states = apply_sequence(quiver_of(torus.base), YState(y0), torus.flips, tol=0)
        except (MutationError, ZeroDivisionError):
            pytest.skip("rational point on a pole")
        expected = torus_lr_equations(y0)
        for h in torus.arcs:
            assert states[-1][h] == expected[torus.sigma[h]]

    @pytest.mark.parametrize("trial", range(20))
    def test_sphere(self, sphere, trial):
        rng = random.Random(100 + trial)
        y0 = dict(zip(sphere.arcs, rationals(rng, 9, lo=1, hi=4)))
        _, states = apply_sequence(quiver_of(sphere.base), YState(y0), sphere.flips, tol=0)
        expected = sphere_equations(y0)
        for h in sphere.arcs:
            assert states[-1][h] == expected[sphere.sigma[h]]

    def test_sphere_cusp_monomials(self, sphere):
        rels = {c.puncture: c.exponents for c in cusp_relations(sphere)}
        assert {m: sorted(e) for m, e in rels.items()} == {m: sorted(v) for m, v in SPHERE_CUSPS.items()}
        assert all(set(e.values()) == {1} for e in rels.values())

    def test_torus_cusp_is_squared(self, torus):
        (c,) = cusp_relations(torus)
        assert c.exponents == {1: 2, 2: 2, 3: 2}
        assert c.multiplicity == 2 and c.reduced() == {1: 1, 2: 1, 3: 1}


class TestLifecycles:
    def test_torus_frozen(self, torus):
        assert edge_lifecycles(torus) == [
            EdgeClass(0, 3, (2, 1, 1)),
            EdgeClass(1, 4, (3, 3, 2)),
        ]

    def test_one_edge_class_per_tetrahedron(self, presentation):
        # an ideal triangulation of a cusped 3-manifold has as many edges as tetrahedra
        assert len(edge_lifecycles(presentation)) == presentation.length

    def test_traces_end_on_flipped_label(self, presentation):
        for e in edge_lifecycles(presentation):
            assert presentation.flips[e.t_destroy % presentation.length] == e.label_at(e.t_destroy)
            assert len(e.trace) == e.t_destroy - e.t_create


class TestGluingEquations:
    def test_torus_frozen(self, torus):
        eqs = gluing_equations(torus, edge_lifecycles(torus))
        assert [eq.cyclic() for eq in eqs] == [
            [(0, Kind.END_CREATE), (1, Kind.ADJ_PLUS2), (0, Kind.ADJ_PLUS2), (1, Kind.END_DESTROY)],
            [(1, Kind.END_CREATE), (0, Kind.ADJ_MINUS2), (1, Kind.ADJ_MINUS2), (0, Kind.END_DESTROY)],
        ]

    def test_total_degree_is_six_per_tetrahedron(self, presentation):
        eqs = gluing_equations(presentation, edge_lifecycles(presentation))
        assert sum(DEGREE[c.kind] for eq in eqs for c in eq.contributions) == 6 * presentation.length

    def test_each_tetrahedron_contributes_all_six_angles(self, presentation):
        eqs = gluing_equations(presentation, edge_lifecycles(presentation))
        per_t = {t: {"end": 0, "plus": 0, "minus": 0} for t in range(presentation.length)}
        for eq in eqs:
            for t, kind in eq.cyclic():
                key = "end" if kind.name.startswith("END") else ("plus" if "PLUS" in kind.name else "minus")
                per_t[t][key] += DEGREE[kind]
        assert all(v == {"end": 2, "plus": 2, "minus": 2} for v in per_t.values())

    def test_product_of_all_equations_is_one_identically(self, presentation, rng):
        # each tetrahedron contributes (z z' z'')^2 = 1
        eqs = gluing_equations(presentation, edge_lifecycles(presentation))
        for _ in range(20):
            z = random_complex(rng, presentation.length)
            total = 1
            for eq in eqs:
                total *= gluing_product(eq, z)
            assert abs(total - 1) < 1e-10


class TestUniversalTrajectory:
    def test_first_period_matches_apply_sequence(self, presentation, rng):
        y0 = dict(zip(presentation.arcs, random_complex(rng, len(presentation.arcs))))
        traj = universal_trajectory(presentation, y0, 1)
        _, states = apply_sequence(quiver_of(presentation.base), YState(y0), presentation.flips)
        l = presentation.length
        assert all(traj[t].values == states[t].values for t in range(l))
        # at the period boundary the state is carried to the base labels through sigma
        assert traj[l].values == {presentation.sigma[h]: v for h, v in states[l].values.items()}

    def test_period_boundary_relabels(self, presentation, rng):
        y0 = dict(zip(presentation.arcs, random_complex(rng, len(presentation.arcs))))
        l = presentation.length
        traj = universal_trajectory(presentation, y0, 2)
        assert len(traj) == 2 * l + 1
        # period two restarts the flip sequence from the relabeled state
        _, states = apply_sequence(quiver_of(presentation.base), YState(traj[l].values), presentation.flips[:1])
        assert all(rel(traj[l + 1][e], states[1][e]) < 1e-12 for e in presentation.arcs)

    def test_error_step_is_universal(self, torus):
        # y_2 = -1 makes the very first flip singular; shifting to period two needs y(2) singular instead
        with pytest.raises(MutationError) as exc:
            universal_trajectory(torus, {1: 1j, 2: -1 + 0j, 3: 2j}, 2)
        assert exc.value.step == 0
