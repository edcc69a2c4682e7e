from fractions import Fraction as F

import numpy as np
import pytest

from ergolab import (
    Coupling,
    FactorSpec,
    JoiningInfeasibleError,
    PermutationSystem,
    coupling_of,
    joining_polytope,
    joining_vertices,
    power,
    product_coupling,
    relative_disjointness,
    rotation,
    uniform,
    weighted_coupling_average,
)


class TestClassicalSystems:
    def test_rotation_is_invariant(self):
        sys3 = rotation(3)
        assert sys3.permutation == (1, 2, 0)
        assert sys3.measure == (F(1, 3),) * 3

    def test_validation(self):
        with pytest.raises(ValueError):
            PermutationSystem((0, 0), (F(1, 2), F(1, 2)))
        with pytest.raises(ValueError):
            PermutationSystem((1, 0), (F(1, 3), F(2, 3)))  # not invariant
        with pytest.raises(ValueError):
            PermutationSystem((1, 0), (F(1, 2), F(1, 4)))  # not a probability
        with pytest.raises(ValueError):
            PermutationSystem((1, 0), (F(3, 2), F(-1, 2)))

    def test_nonuniform_invariant_measure(self):
        sys_ = PermutationSystem((1, 0, 2), (F(1, 4), F(1, 4), F(1, 2)))
        assert sys_.inverse_permutation == (1, 0, 2)


class TestCouplings:
    def test_product_coupling_valid(self):
        a, b = rotation(2), rotation(3)
        coupling_of(a, b, product_coupling(a, b).matrix)

    def test_marginal_violation(self):
        a, b = rotation(2), rotation(3)
        bad = [[F(1, 2), 0, 0], [0, F(1, 4), F(1, 4)]]
        with pytest.raises(ValueError):
            coupling_of(a, b, bad)

    def test_negative_entries(self):
        with pytest.raises(ValueError):
            Coupling(((F(-1, 2), F(1, 2)), (F(1, 2), F(1, 2))))

    def test_string_fractions(self):
        a, b = rotation(2), rotation(3)
        coupling_of(a, b, [["1/3", "1/6", "0"], ["0", "1/6", "1/3"]])


class TestJoiningPolytope:
    def test_trivial_pair(self):
        point = PermutationSystem((0,), (F(1),))
        rep = relative_disjointness(joining_polytope(point, point))
        assert rep.disjoint
        assert np.allclose(rep.unique_joining, [[1.0]])

    def test_self_pair_one_parameter_family(self):
        two = rotation(2)
        pol = joining_polytope(two, two)
        verts = joining_vertices(pol)
        assert len(verts) == 2
        mats = sorted(np.round(v, 9)[0, 0] for v in verts)
        assert mats == [0.0, 0.5]
        rep = relative_disjointness(pol)
        assert not rep.disjoint
        w1, w2 = rep.witnesses
        assert abs(w1[0, 0] - 0.0) < 1e-9 and abs(w2[0, 0] - 0.5) < 1e-9
        for w in rep.witnesses:
            assert pol.residual(w) < 1e-9

    @pytest.mark.parametrize("sizes", [(2, 3), (3, 4), (2, 5)])
    def test_coprime_rotations_disjoint(self, sizes):
        a, b = rotation(sizes[0]), rotation(sizes[1])
        pol = joining_polytope(a, b)
        rep = relative_disjointness(pol)
        assert rep.disjoint and rep.spread < 1e-9
        product = np.full(sizes, 1.0 / (sizes[0] * sizes[1]))
        assert np.max(np.abs(rep.unique_joining - product)) < 1e-9
        verts = joining_vertices(pol)
        assert len(verts) == 1
        assert np.max(np.abs(verts[0] - product)) < 1e-9

    def test_anything_vs_point_disjoint(self):
        a = rotation(4)
        point = PermutationSystem((0,), (F(1),))
        rep = relative_disjointness(joining_polytope(a, point))
        assert rep.disjoint
        assert np.allclose(rep.unique_joining.ravel(), [0.25] * 4)

    def test_vertices_closed_under_product_shift(self):
        two = rotation(2)
        pol = joining_polytope(two, two)
        for v in joining_vertices(pol):
            pushed = np.empty_like(v)
            for x in range(2):
                for y in range(2):
                    pushed[two.permutation[x], two.permutation[y]] = v[x, y]
            assert pol.residual(pushed) < 1e-12


class TestFactors:
    def make_diag_factor(self, masses):
        # level sets of the diagonal indicator on the 2x2 product
        gen = ((F(1), F(0)), (F(0), F(1)))
        return FactorSpec(generators=(gen,), cell_masses=tuple(masses))

    def test_factor_pins_the_joining(self):
        two = rotation(2)
        # cells ordered by smallest flat index: diagonal {0,3} first, then {1,2}
        factor = self.make_diag_factor([F(1, 4), F(3, 4)])
        pol = joining_polytope(two, two, factor)
        rep = relative_disjointness(pol)
        assert rep.disjoint
        assert abs(rep.unique_joining[0, 0] - 0.125) < 1e-9
        assert abs(rep.unique_joining[0, 1] - 0.375) < 1e-9

    def test_masses_must_be_a_probability(self):
        two = rotation(2)
        for masses in ([F(3, 2), F(-1, 2)], [F(3, 4), F(1, 2)]):
            with pytest.raises(ValueError):
                joining_polytope(two, two, self.make_diag_factor(masses))

    def test_infeasible_prescription_reported(self):
        two, three = rotation(2), rotation(3)
        # the row partition is invariant, but a 0.9 row mass contradicts the
        # marginal measure of the first point
        gen = ((F(1), F(1), F(1)), (F(0), F(0), F(0)))
        factor = FactorSpec(generators=(gen,), cell_masses=(F(9, 10), F(1, 10)))
        with pytest.raises(JoiningInfeasibleError):
            relative_disjointness(joining_polytope(two, three, factor))

    def test_noninvariant_partition_rejected(self):
        two = rotation(2)
        three = rotation(3)
        gen = tuple(tuple(F(1) if (x, y) == (0, 0) else F(0) for y in range(3)) for x in range(2))
        factor = FactorSpec(generators=(gen,), cell_masses=(F(1, 6), F(5, 6)))
        with pytest.raises(ValueError):
            joining_polytope(two, three, factor)

    def test_mass_count_mismatch(self):
        two = rotation(2)
        factor = self.make_diag_factor([F(1)])
        with pytest.raises(ValueError):
            joining_polytope(two, two, factor)


class TestCouplingAverages:
    def test_fixed_point_is_exact(self):
        a, b = rotation(2), rotation(3)
        product = product_coupling(a, b)
        avg = weighted_coupling_average(a, b, product, uniform(), 7)
        assert avg.matrix == product.matrix

    def test_period_six_average_exact(self):
        a, b = rotation(2), rotation(3)
        kappa = coupling_of(a, b, [["1/3", "1/6", "0"], ["0", "1/6", "1/3"]])
        avg = weighted_coupling_average(a, b, kappa, uniform(), 6)
        assert avg.matrix == product_coupling(a, b).matrix

    def test_linear_weights_near_product(self):
        a, b = rotation(2), rotation(3)
        kappa = coupling_of(a, b, [["1/3", "1/6", "0"], ["0", "1/6", "1/3"]])
        avg = weighted_coupling_average(a, b, kappa, power(1.0), 6000)
        dist = max(abs(float(v) - 1.0 / 6.0) for row in avg.matrix for v in row)
        assert dist < 1e-3

    def test_disjoint_pairs_average_to_unique_joining(self):
        # every starting coupling in the corpus is pulled to the unique
        # joining at index 1000 * (product size), under both weight families
        import itertools
        for na, nb in ((2, 3), (3, 4)):
            a, b = rotation(na), rotation(nb)
            rep = relative_disjointness(joining_polytope(a, b))
            assert rep.disjoint
            sweep = 1000 * na * nb
            corpus = [product_coupling(a, b)]
            # perturb the product in a 2x2 corner: row and column sums survive
            base = F(1, na * nb)
            bump = base / 2
            lopsided = [[base for _ in range(nb)] for _ in range(na)]
            lopsided[0][0] += bump
            lopsided[0][1] -= bump
            lopsided[1][0] -= bump
            lopsided[1][1] += bump
            corpus.append(coupling_of(a, b, lopsided))
            for kappa in corpus:
                for scheme in (uniform(), power(1.0)):
                    avg = weighted_coupling_average(a, b, kappa, scheme, sweep)
                    dist = float(
                        np.max(np.abs(avg.as_array() - rep.unique_joining))
                    )
                    assert dist < 1e-3

    def test_self_pair_averages_settle_in_polytope(self):
        # every coupling of the 2-cycle self-pair is already invariant, so the
        # plain average reproduces it; membership in the polytope is exact
        two = rotation(2)
        kappa = coupling_of(two, two, [["1/2", "0"], ["0", "1/2"]])
        pol = joining_polytope(two, two)
        avg = weighted_coupling_average(two, two, kappa, uniform(), 5)
        assert pol.residual(avg.as_array()) < 1e-12
        assert avg.matrix == kappa.matrix

    def test_moving_orbit_averages_to_unique_joining(self):
        # against the identity system the diagonal coupling has a period-2
        # orbit whose even-length averages land exactly on the unique joining
        two = rotation(2)
        still = PermutationSystem((0, 1), (F(1, 2), F(1, 2)))
        kappa = coupling_of(two, still, [["1/2", "0"], ["0", "1/2"]])
        rep = relative_disjointness(joining_polytope(two, still))
        assert rep.disjoint
        avg = weighted_coupling_average(two, still, kappa, uniform(), 4)
        assert avg.matrix == tuple((F(1, 4), F(1, 4)) for _ in range(2))
        assert np.max(np.abs(avg.as_array() - rep.unique_joining)) < 1e-9

    def test_cycled_family(self):
        a, b = rotation(2), rotation(3)
        k1 = product_coupling(a, b)
        k2 = coupling_of(a, b, [["1/3", "1/6", "0"], ["0", "1/6", "1/3"]])
        avg = weighted_coupling_average(a, b, [k1, k2], uniform(), 12)
        assert pytest.approx(float(sum(sum(r) for r in avg.matrix))) == 1.0

    def test_marginal_violation_rejected(self):
        a, b = rotation(2), rotation(3)
        with pytest.raises(ValueError):
            weighted_coupling_average(
                a, b, Coupling(((F(1), F(0), F(0)), (F(0), F(0), F(0)))), uniform(), 3
            )

    def test_irrational_weights_rejected(self):
        a, b = rotation(2), rotation(3)
        with pytest.raises(ValueError):
            weighted_coupling_average(
                a, b, product_coupling(a, b), power(0.5), 5
            )
