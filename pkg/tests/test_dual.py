import json
import math
import random

import pytest

from ergolab import AlgebraElement, Alphabet, L2Vector, State, matrix_element
from conftest import random_element, random_vector_state, random_word


@pytest.fixture
def ab():
    return Alphabet({"s": None, "c": 3})


def lam(word, coeff=1.0):
    return AlgebraElement.unitary(word, coeff)


class TestUnitaries:
    def test_identity_word_is_unit(self, ab):
        assert lam(ab.identity()).is_close(AlgebraElement.one(ab))

    def test_homomorphism(self, ab):
        rng = random.Random(1)
        for _ in range(300):
            g, h = random_word(rng, ab), random_word(rng, ab)
            assert (lam(g) * lam(h)).is_close(lam(g * h))

    def test_adjoint_is_inverse(self, ab):
        rng = random.Random(2)
        for _ in range(300):
            g = random_word(rng, ab)
            assert lam(g).adjoint().is_close(lam(g.inverse()))
            assert (lam(g).adjoint() * lam(g)).is_close(AlgebraElement.one(ab))


class TestRing:
    def test_expand_and_cancel(self, ab):
        g = ab.word("s[0]")
        one = AlgebraElement.one(ab)
        lhs = (one + lam(g)) * (one - lam(g))
        assert lhs.is_close(one - lam(g * g))

    def test_unit_neutral(self, ab):
        rng = random.Random(3)
        for _ in range(100):
            a = random_element(rng, ab, terms=3)
            assert (a * AlgebraElement.one(ab)).is_close(a)
            assert (AlgebraElement.one(ab) * a).is_close(a)

    def test_adjoint_antihomomorphism(self, ab):
        rng = random.Random(4)
        for _ in range(200):
            a, b = random_element(rng, ab), random_element(rng, ab)
            assert (a * b).adjoint().is_close(b.adjoint() * a.adjoint())

    def test_associative_distributive(self, ab):
        rng = random.Random(5)
        for _ in range(100):
            a, b, c = (random_element(rng, ab) for _ in range(3))
            assert ((a * b) * c).is_close(a * (b * c))
            assert (a * (b + c)).is_close(a * b + a * c)

    def test_pruning_keeps_maps_small(self, ab):
        a = lam(ab.word("s[0]"), 1e-16)
        assert len(a) == 0

    def test_scalar_ops(self, ab):
        a = lam(ab.word("c[0]"), 2.0)
        assert (0.5 * a).coefficient(ab.word("c[0]")) == 1.0
        assert (-a + a).is_close(AlgebraElement.zero(ab))


class TestShiftAutomorphism:
    def test_single_unitary(self, ab):
        assert lam(ab.word("s[0]")).shifted(3).is_close(lam(ab.word("s[3]")))

    def test_multiplicative(self, ab):
        rng = random.Random(6)
        for _ in range(200):
            a, b = random_element(rng, ab), random_element(rng, ab)
            n = rng.randint(-6, 6)
            assert (a * b).shifted(n).is_close(a.shifted(n) * b.shifted(n))

    def test_zero_shift(self, ab):
        rng = random.Random(7)
        a = random_element(rng, ab)
        assert a.shifted(0).is_close(a)


class TestFiniteOrbitPart:
    def test_cycle_kept(self, ab):
        a = lam(ab.word("c[0]"))
        assert a.finite_orbit_part().is_close(a)

    def test_shift_killed(self, ab):
        assert not lam(ab.word("s[0]")).finite_orbit_part()

    def test_linearity_mixed_word(self, ab):
        a = lam(ab.word("c[0]"), 2.0) + lam(ab.word("s[0] c[1]"), 3.0)
        assert a.finite_orbit_part().is_close(lam(ab.word("c[0]"), 2.0))

    def test_unital_idempotent(self, ab):
        rng = random.Random(8)
        one = AlgebraElement.one(ab)
        assert one.finite_orbit_part().is_close(one)
        for _ in range(200):
            a = random_element(rng, ab, terms=3)
            ea = a.finite_orbit_part()
            assert ea.finite_orbit_part().is_close(ea)

    def test_module_property(self, ab):
        # E(b a c) = b E(a) c for finite-orbit supported b, c
        rng = random.Random(9)
        cycles = Alphabet({"c": 3})
        for _ in range(300):
            a = random_element(rng, ab, terms=3)
            b = random_element(rng, cycles, terms=2)
            c = random_element(rng, cycles, terms=2)
            b = AlgebraElement.from_json(ab, b.to_json())
            c = AlgebraElement.from_json(ab, c.to_json())
            lhs = (b * a * c).finite_orbit_part()
            rhs = b * a.finite_orbit_part() * c
            assert lhs.distance(rhs) <= 1e-12

    def test_commutes_with_shift(self, ab):
        rng = random.Random(10)
        for _ in range(200):
            a = random_element(rng, ab, terms=3)
            n = rng.randint(-5, 5)
            assert a.shifted(n).finite_orbit_part().is_close(
                a.finite_orbit_part().shifted(n)
            )

    def test_trace_preserved(self, ab):
        rng = random.Random(11)
        mu = State.trace()
        for _ in range(200):
            a = random_element(rng, ab, terms=3)
            assert abs(mu(a.finite_orbit_part()) - mu(a)) <= 1e-12


class TestVectors:
    def test_unitary_moves_basis(self, ab):
        g, h = ab.word("s[0] c[1]"), ab.word("c[2]^-1 s[4]")
        out = lam(g).apply(L2Vector.basis(h))
        assert abs(out.amplitude(g * h) - 1.0) < 1e-15
        assert len(out) == 1

    def test_unit_fixes_vectors(self, ab):
        rng = random.Random(12)
        one = AlgebraElement.one(ab)
        x = L2Vector.basis(ab.word("s[1]")) + 2.0 * L2Vector.basis(ab.word("c[0]"))
        y = one.apply(x)
        assert (y - x).norm() < 1e-15

    def test_l1_bound(self, ab):
        rng = random.Random(13)
        for _ in range(100):
            a = random_element(rng, ab, terms=3)
            x = 0.7 * L2Vector.basis(random_word(rng, ab)) + 0.2 * L2Vector.basis(
                random_word(rng, ab)
            )
            assert a.apply(x).norm() <= a.l1() * x.norm() + 1e-12

    def test_normalize_zero_raises(self, ab):
        with pytest.raises(ValueError):
            L2Vector(ab, {}).normalized()


class TestStates:
    def test_trace_values(self, ab):
        mu = State.trace()
        g = ab.word("s[0] c[1]")
        assert mu(lam(g)) == 0.0
        assert mu(AlgebraElement.one(ab)) == 1.0
        assert abs(mu(lam(g) * lam(g).adjoint()) - 1.0) < 1e-15

    def test_trace_property(self, ab):
        rng = random.Random(14)
        mu = State.trace()
        for _ in range(300):
            a, b = random_element(rng, ab), random_element(rng, ab)
            assert abs(mu(a * b) - mu(b * a)) <= 1e-12

    def test_vector_state_example(self, ab):
        x = L2Vector.basis(ab.identity()) + L2Vector.basis(ab.word("s[5]"))
        phi = State.vector_state((1.0 / x.norm()) * x)
        for n in range(1, 12):
            value = phi(lam(ab.word(f"s[{n}]")))
            expected = 0.5 if n == 5 else 0.0
            assert abs(value - expected) < 1e-12

    def test_positivity(self, ab):
        rng = random.Random(15)
        states = [State.trace()] + [random_vector_state(rng, ab) for _ in range(4)]
        for _ in range(100):
            c = random_element(rng, ab, terms=3)
            a = c.adjoint() * c
            for phi in states:
                value = phi(a)
                assert value.real >= -1e-12 and abs(value.imag) <= 1e-12

    def test_unit_maps_to_one(self, ab):
        rng = random.Random(16)
        one = AlgebraElement.one(ab)
        for _ in range(20):
            phi = random_vector_state(rng, ab)
            assert abs(phi(one) - 1.0) <= 1e-12

    def test_mixture_validation(self, ab):
        x = L2Vector.basis(ab.identity())
        with pytest.raises(ValueError):
            State.mixture([])
        with pytest.raises(ValueError):
            State.mixture([(0.5, x), (-0.5, x)])
        with pytest.raises(ValueError):
            State.mixture([(0.7, x)])
        with pytest.raises(ValueError):
            State.vector_state(2.0 * x)

    def test_mixture_evaluates_convexly(self, ab):
        rng = random.Random(17)
        s1 = random_vector_state(rng, ab)
        s2 = random_vector_state(rng, ab)
        mix = State.mixture([(0.3, s1.vector), (0.7, s2.vector)])
        a = random_element(rng, ab, terms=3)
        assert abs(mix(a) - (0.3 * s1(a) + 0.7 * s2(a))) <= 1e-12

    def test_profile_matches_direct_evaluation(self, ab):
        rng = random.Random(18)
        phi = random_vector_state(rng, ab, support=3)
        profile = phi.profile(ab)
        for word, value in profile.items():
            assert abs(phi(lam(word)) - value) <= 1e-12


class TestMatrixElements:
    def test_indicator(self, ab):
        rng = random.Random(19)
        for _ in range(200):
            f, g, h = (random_word(rng, ab) for _ in range(3))
            value = matrix_element(f, lam(g), h)
            assert value == (1.0 if f == g * h else 0.0)

    def test_unit_diagonal(self, ab):
        h = ab.word("s[2] c[1]")
        assert matrix_element(h, AlgebraElement.one(ab), h) == 1.0

    def test_agreement_with_state(self, ab):
        rng = random.Random(20)
        for _ in range(100):
            h = random_word(rng, ab)
            a = random_element(rng, ab, terms=3)
            phi = State.vector_state(L2Vector.basis(h))
            assert abs(matrix_element(h, a, h) - phi(a)) <= 1e-12

    def test_one_hit(self, ab):
        rng = random.Random(21)
        for _ in range(40):
            f, h = random_word(rng, ab), random_word(rng, ab)
            g = random_word(rng, ab) * ab.letter("s", rng.randint(-3, 3))
            hits = 0
            for n in range(1, 120):
                if matrix_element(f, lam(g).shifted(n), h) != 0.0:
                    hits += 1
            assert hits <= 1


class TestSerialization:
    def test_roundtrip(self, ab):
        rng = random.Random(22)
        for _ in range(50):
            a = random_element(rng, ab, terms=4)
            data = a.to_json()
            text = json.dumps(data)
            back = AlgebraElement.from_json(ab, json.loads(text))
            assert a.distance(back) <= 1e-15

    def test_shape(self, ab):
        data = (lam(ab.word("s[0]"), 1 + 2j)).to_json()
        assert data == [{"word": "s[0]", "re": 1.0, "im": 2.0}]
