import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from k3lat.exactlinalg import Matrix
from k3lat.isometry import (
    RationalIsometry,
    coinvariant_sublattice,
    cyclic_type,
    embed_U_isometry,
    random_integral_isometry,
    u_isometry,
)
from k3lat.lattices import embed, hyperbolic_plane, k3_lattice
from k3lat.orbits import (
    UCanonicalPair,
    congruence_orbit_test,
    discriminant_module,
    double_orbit_reduce,
    double_orbit_witness,
    enumerate_lagrangians,
    image_subgroup,
    lagrangian_from_pair,
    orthogonal_group_of_U,
    u_case_module,
    u_double_orbit_canonical,
    u_double_orbit_decompose,
    vector_to_vector,
)

from helpers import cyclic_reflection

U = hyperbolic_plane()
K3 = k3_lattice()
seeds = st.integers(0, 2 ** 32 - 1)


def coprime_pairs(n):
    return [(c, n // c) for c in range(1, n + 1) if n % c == 0 and math.gcd(c, n // c) == 1]


def brute_lagrangians(n):
    """Cyclic isotropic subgroups of order n in (Z/n)^2 with q(x, y) = 2xy/n mod 2."""
    found = set()
    for x, y in itertools.product(range(n), repeat=2):
        H = frozenset(((k * x) % n, (k * y) % n) for k in range(n))
        if len(H) == n and all(Fraction(2 * u * v, n) % 2 == 0 for u, v in H):
            found.add(H)
    return found


def distinct_primes(n):
    return sum(1 for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p)))


class TestFiniteQuadraticModule:
    def test_unimodular_is_trivial(self):
        M = discriminant_module(K3, Matrix.identity(22))
        assert M.order == 1 and list(M.elements()) == [()]

    def test_u_case_generic_agrees(self):
        f = u_isometry(3, 2)
        M = discriminant_module(U, coinvariant_sublattice(f))
        assert M.elementary_divisors == (6, 6)
        assert len(enumerate_lagrangians(M, 6)) == 4

    @pytest.mark.parametrize("a, b", [(3, 2), (5, 1), (4, 3), (7, 2)])
    def test_q_on_generators(self, a, b):
        M = u_case_module(a, b)
        n = a * b
        for x, y in itertools.product(range(n), repeat=2):
            assert M.q((x, y)) == Fraction(2 * x * y, n) % 2

    @given(st.sampled_from([(3, 2), (5, 1), (4, 3), (5, 2)]), st.data())
    def test_form_axioms(self, ab, data):
        M = u_case_module(*ab)
        n = M.elementary_divisors[0]
        x = (data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1)))
        y = (data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1)))
        k = data.draw(st.integers(-5, 5))
        assert (M.q(M.add(x, y)) - M.q(x) - M.q(y) - 2 * M.b(x, y)) % 2 == 0
        assert (M.q(M.scale(k, x)) - k * k * M.q(x)) % 2 == 0

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            discriminant_module(U, Matrix([[1, 1], [0, 0]]))


class TestLagrangians:
    @pytest.mark.parametrize("n", range(1, 31))
    def test_count_against_brute_force(self, n):
        a, b = n, 1
        M = u_case_module(a, b)
        found = enumerate_lagrangians(M, n)
        assert len(found) == len(brute_lagrangians(n)) == 2 ** distinct_primes(n)
        assert len(found) == len(coprime_pairs(n))

    def test_examples(self):
        assert len(enumerate_lagrangians(u_case_module(3, 2), 6)) == 4
        assert len(enumerate_lagrangians(u_case_module(4, 1), 4)) == 2
        assert len(enumerate_lagrangians(u_case_module(1, 1), 1)) == 1

    def test_order_mismatch(self):
        with pytest.raises(ValueError):
            enumerate_lagrangians(u_case_module(3, 2), 5)

    def test_cap(self):
        with pytest.raises(ValueError):
            enumerate_lagrangians(u_case_module(3, 2), 6, cap=10)

    def test_pair_lagrangians_are_the_images(self):
        a, b = 3, 2
        f = u_isometry(a, b)
        M = u_case_module(a, b)
        assert lagrangian_from_pair(M, a, b, a, b) == image_subgroup(M, Matrix.identity(2))
        assert lagrangian_from_pair(M, a, b, b, a) == image_subgroup(M, f.inverse().matrix)
        assert (lagrangian_from_pair(M, a, b, 3, 2) & lagrangian_from_pair(M, a, b, 2, 3)).order == 1

    @pytest.mark.parametrize("n", [6, 10, 12, 30])
    def test_intersection_order(self, n):
        for a, b in coprime_pairs(n):
            M = u_case_module(a, b)
            for (c1, d1), (c2, d2) in itertools.product(coprime_pairs(n), repeat=2):
                H = lagrangian_from_pair(M, a, b, c1, d1) & lagrangian_from_pair(M, a, b, c2, d2)
                expected = (n // math.lcm(c1, c2)) * (n // math.lcm(d1, d2))
                assert H.order == expected
                assert (H.order == 1) == ((c1, d1) == (d2, c2))

    def test_pair_errors(self):
        M = u_case_module(3, 2)
        with pytest.raises(ValueError):
            lagrangian_from_pair(M, 3, 2, 1, 5)
        with pytest.raises(ValueError):
            lagrangian_from_pair(u_case_module(4, 1), 4, 1, 2, 2)


class TestUDoubleOrbit:
    def test_examples(self):
        assert u_double_orbit_canonical(RationalIsometry.identity(U)) == UCanonicalPair(1, 1)
        assert u_double_orbit_canonical(u_isometry(3, 2)) == UCanonicalPair(3, 2)
        swap_scale = RationalIsometry(U, Matrix([[0, "5/2"], ["2/5", 0]]))
        assert u_double_orbit_canonical(swap_scale) == UCanonicalPair(5, 2)

    @pytest.mark.parametrize("n", range(1, 31))
    def test_invariant_under_O_U(self, n):
        for a, b in coprime_pairs(n):
            pair = UCanonicalPair(max(a, b), min(a, b))
            f = u_isometry(a, b)
            for k1, k2 in itertools.product(orthogonal_group_of_U(), repeat=2):
                g = k1 @ f @ k2
                l, p, r = u_double_orbit_decompose(g)
                assert p == pair and l @ p.isometry() @ r == g
                assert p.n == cyclic_type(g)

    def test_pair_validation(self):
        for a, b in [(2, 3), (4, 2), (2, 2), (3, 0)]:
            with pytest.raises(ValueError):
                UCanonicalPair(a, b)


class TestCongruence:
    def test_examples(self):
        v12 = embed((1, 6), 0)
        assert congruence_orbit_test(v12, v12, 6) == 1
        assert congruence_orbit_test(embed((1, 1), 0), embed((1, 2), 0), 5) is None

    @given(st.integers(-20, 20), st.integers(1, 30))
    def test_self_is_one(self, d, n):
        v = embed((1, d), 0)
        assert congruence_orbit_test(v, v, n) == 1

    @given(st.integers(-20, 20), st.integers(-20, 20), st.integers(1, 30))
    def test_matches_brute_force(self, d1, d2, n):
        k = congruence_orbit_test(embed((1, d1), 0), embed((1, d2), 0), n)
        units = [k for k in range(1, n + 1) if math.gcd(k, n) == 1 and (d1 - k * k * d2) % n == 0]
        assert k == (units[0] if units else None)

    def test_imprimitive(self):
        with pytest.raises(ValueError):
            congruence_orbit_test(embed((2, 2), 0), embed((1, 1), 0), 3)

    def test_vector_to_vector(self, rng):
        g = random_integral_isometry(K3, rng)
        y = embed((1, 5), 2)
        v = vector_to_vector(y, g(y))
        assert v.is_integral() and v(y) == g(y)
        with pytest.raises(ValueError):
            vector_to_vector(embed((1, 1), 0), embed((1, 2), 0))


class TestDoubleOrbitReduce:
    def test_already_reduced(self):
        phi = embed_U_isometry(u_isometry(3, 2))
        red = double_orbit_reduce(phi, canonical=False)
        assert red.pair.n == 6 and red.recompose() == phi
        assert double_orbit_reduce(phi).pair == UCanonicalPair(6, 1)

    def test_integral_input(self, rng):
        g = random_integral_isometry(K3, rng)
        red = double_orbit_reduce(g)
        assert red.pair == UCanonicalPair(1, 1) and red.recompose() == g

    @given(seeds, st.integers(2, 12))
    def test_conjugated_reflection(self, seed, d):
        rng = random.Random(seed)
        g, h = random_integral_isometry(K3, rng), random_integral_isometry(K3, rng)
        phi = g @ cyclic_reflection(K3, d, rng.choice((0, 2, 4))) @ h
        for canonical in (True, False):
            red = double_orbit_reduce(phi, canonical=canonical)
            assert red.pair.n == d
            assert red.g.is_integral() and red.h.is_integral()
            assert red.recompose() == phi

    def test_witness_between_pairs(self):
        phi1 = embed_U_isometry(u_isometry(6, 1))
        phi2 = embed_U_isometry(u_isometry(3, 2))
        g, h = double_orbit_witness(phi1, phi2)
        assert g.is_integral() and h.is_integral()
        assert g @ phi2 @ h == phi1

    def test_different_orbits(self):
        with pytest.raises(ValueError):
            double_orbit_witness(embed_U_isometry(u_isometry(6, 1)), embed_U_isometry(u_isometry(5, 1)))

    def test_non_cyclic_rejected(self):
        phi = cyclic_reflection(K3, 2, 0) @ cyclic_reflection(K3, 2, 2)
        with pytest.raises(ValueError):
            double_orbit_reduce(phi)
