"""The ten acceptance criteria, each with its own time limit.

Every test prints one ``[acceptance] N name: PASS|FAIL`` line (shown even
when pytest captures output) and then asserts both correctness and time.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest

from k3lat.chern import (
    RootBundle,
    VirtualBundle,
    adams_cycles,
    ch_from_roots,
    ch_virtual,
    extract_graded,
    sym2_ch,
    sym2_from_ch,
    virtual_wedge2,
    wedge2_ch,
    wedge2_from_ch,
)
from k3lat.exactlinalg import Matrix
from k3lat.isometry import (
    cartan_dieudonne,
    compose_reflections,
    cyclic_type,
    embed_U_isometry,
    quotient_structure,
    random_integral_isometry,
    reflection,
    u_isometry,
)
from k3lat.lattices import direct_sum, hyperbolic_plane, k3_lattice, signature
from k3lat.mukai import (
    MukaiVector,
    exp_action,
    mukai_lattice,
    mukai_pairing,
    sheaf_isometry_domain,
    verify_universal_example,
)
from k3lat.orbits import (
    UCanonicalPair,
    double_orbit_reduce,
    enumerate_lagrangians,
    lagrangian_from_pair,
    orthogonal_group_of_U,
    u_case_module,
    u_double_orbit_canonical,
)

from helpers import cyclic_reflection, random_anisotropic, random_rational_isometry, random_transvection
from test_orbits import brute_lagrangians, coprime_pairs

K3 = k3_lattice()
U = hyperbolic_plane()
UU = direct_sum(U, U)
SEED = 20261016


@pytest.fixture
def criterion(capsys):
    """Run a check under a time limit and print one verdict line."""

    def run(number: int, name: str, limit: float, check):
        start = time.perf_counter()
        ok, detail = False, ""
        try:
            ok, detail = check()
        finally:
            elapsed = time.perf_counter() - start
            in_time = elapsed < limit
            verdict = "PASS" if ok and in_time else "FAIL"
            with capsys.disabled():
                print(f"\n[acceptance] {number:2d} {name}: {verdict} "
                      f"({elapsed:.2f}s, limit {limit:.0f}s) {detail}".rstrip())
        assert ok, detail
        assert in_time, f"took {elapsed:.1f}s, limit {limit}s"

    return run


def random_primitive(rng, bound=3):
    while True:
        v = tuple(rng.randint(-bound, bound) for _ in range(22))
        if any(v) and math.gcd(*v) == 1:
            return v


def test_01_reflection_cyclic_type(criterion):
    def check():
        cases = 0
        for offset in (0, 2, 4):
            for d in itertools.chain(range(-20, 0), range(1, 21)):
                if cyclic_type(cyclic_reflection(K3, d, offset)) != abs(d):
                    return False, f"d={d} at summand {offset // 2}"
                cases += 1
        return True, f"{cases} reflections"

    criterion(1, "reflection cyclic type", 5, check)


def test_02_u_double_orbits(criterion):
    def check():
        rng = random.Random(SEED)
        group = orthogonal_group_of_U()
        cases = 0
        for n in range(1, 31):
            for a, b in coprime_pairs(n):
                f = u_isometry(a, b)
                if cyclic_type(f) != n:
                    return False, f"cyclic type of f_({a},{b})"
                g = rng.choice(group) @ f @ rng.choice(group)
                if u_double_orbit_canonical(g) != UCanonicalPair(max(a, b), min(a, b)):
                    return False, f"pair ({a},{b}) not recovered"
                cases += 1
        return True, f"{cases} pairs"

    criterion(2, "U double orbits", 5, check)


def test_03_lagrangian_classification(criterion):
    def check():
        modules = 0
        for n in range(1, 31):
            pairs = coprime_pairs(n)
            if len(brute_lagrangians(n)) != len(pairs):
                return False, f"brute count at n={n}"
            for a, b in pairs:
                M = u_case_module(a, b)
                found = {H.elements for H in enumerate_lagrangians(M, n)}
                built = {(c, d): lagrangian_from_pair(M, a, b, c, d) for c, d in pairs}
                if found != {H.elements for H in built.values()} or len(found) != len(pairs):
                    return False, f"constructors differ at ({a},{b})"
                for (c1, d1), (c2, d2) in itertools.product(pairs, repeat=2):
                    trivial = (built[c1, d1] & built[c2, d2]).order == 1
                    if trivial != ((c1, d1) == (d2, c2)):
                        return False, f"complementarity at ({c1},{d1}),({c2},{d2})"
                modules += 1
        return True, f"{modules} modules"

    criterion(3, "lagrangian classification", 60, check)


def test_04_double_orbit_invariance(criterion):
    def check():
        rng = random.Random(SEED + 4)
        for t in range(200):
            phi = random_rational_isometry(K3, rng, rng.randint(1, 2))
            g = random_integral_isometry(K3, rng)
            h = random_integral_isometry(K3, rng)
            if quotient_structure(g @ phi @ h) != quotient_structure(phi):
                return False, f"triple {t}"
        return True, "200 triples"

    criterion(4, "double-orbit invariance", 60, check)


def random_cyclic_isometry(rng, n):
    if rng.random() < 0.5:
        base = cyclic_reflection(K3, rng.choice((n, -n)), rng.choice((0, 2, 4)))
    else:
        a, b = rng.choice(coprime_pairs(n))
        base = embed_U_isometry(u_isometry(a, b), K3)
    return random_integral_isometry(K3, rng) @ base @ random_integral_isometry(K3, rng)


def test_05_constructive_reduction(criterion):
    def check():
        rng = random.Random(SEED + 5)
        for t in range(50):
            n = rng.randint(1, 12)
            phi = random_cyclic_isometry(rng, n)
            red = double_orbit_reduce(phi)
            if red.recompose() != phi or red.pair.n != n:
                return False, f"case {t} (n={n})"
            if not (red.g.is_integral() and red.h.is_integral()):
                return False, f"case {t}: non-integral factors"
        return True, "50 reductions"

    criterion(5, "constructive double-orbit reduction", 300, check)


def test_06_sheaf_domain_formula(criterion):
    def check():
        rng = random.Random(SEED + 6)
        entries = range(-9, 10)
        calls = 0
        for n in range(1, 21):
            for j in range(1, n + 1):
                for k in range(1, n + 1):
                    x, y = random_primitive(rng), random_primitive(rng)
                    expected = n // math.gcd(j * k, n)
                    for _ in range(10):
                        C = Matrix([rng.choices(entries, k=22) for _ in range(22)])
                        if sheaf_isometry_domain(n, k, j, x, y, C).cyclic_order != expected:
                            return False, f"n={n} j={j} k={k}"
                        calls += 1
        return True, f"{calls} kernels"

    criterion(6, "sheaf isometry domain order", 60, check)


def test_07_universal_example(criterion):
    def check():
        cases = 0
        for n, s in itertools.product(range(1, 11), repeat=2):
            if math.gcd(n, s) == 1:
                if not verify_universal_example(n, s).verified:
                    return False, f"(n, s) = ({n}, {s})"
                cases += 1
        return True, f"{cases} coprime pairs"

    criterion(7, "universal example h -> h^", 10, check)


def test_08_chern_identities(criterion):
    def check():
        rng = random.Random(SEED + 8)

        def roots(rank):
            return RootBundle(Fraction(rng.randint(-7, 7), rng.randint(1, 7)) for _ in range(rank))

        for t in range(100):
            D = rng.randint(0, 10)
            F = roots(rng.randint(0, 5))
            B = roots(rng.randint(0, 5))
            ch = ch_from_roots(F, D)
            V = VirtualBundle(F, B)
            if wedge2_ch(F, D) != wedge2_from_ch(ch) or sym2_ch(F, D) != sym2_from_ch(ch):
                return False, f"square identity, set {t}"
            if virtual_wedge2(V, D) != wedge2_from_ch(ch_virtual(V, D)):
                return False, f"virtual wedge, set {t}"
            if extract_graded(adams_cycles(ch)) != ch.components:
                return False, f"Vandermonde round trip, set {t}"
        return True, "100 root sets"

    criterion(8, "Chern character identities", 30, check)


def test_09_cartan_dieudonne(criterion):
    def check():
        rng = random.Random(SEED + 9)
        samples = [(UU, 100), (K3, 20)]
        for L, count in samples:
            for t in range(count):
                phi = random_rational_isometry(L, rng, rng.randint(1, 4))
                if rng.random() < 0.5:
                    phi = phi @ random_transvection(L, rng)
                vectors = cartan_dieudonne(phi)
                if len(vectors) > L.rank + 2:
                    return False, f"rank {L.rank} case {t}: {len(vectors)} reflections"
                if compose_reflections(L, vectors) != phi:
                    return False, f"rank {L.rank} case {t}: product differs"
        return True, "100 on U+U, 20 on the K3 lattice"

    criterion(9, "Cartan-Dieudonne decomposition", 120, check)


def test_10_mukai_pairing(criterion):
    def check():
        if signature(mukai_lattice()) != (4, 20):
            return False, "signature"
        rng = random.Random(SEED + 10)

        def vec():
            return tuple(rng.randint(-5, 5) for _ in range(22))

        for t in range(500):
            alpha = vec()
            v = MukaiVector(rng.randint(-5, 5), vec(), rng.randint(-5, 5))
            w = MukaiVector(rng.randint(-5, 5), vec(), rng.randint(-5, 5))
            if mukai_pairing(exp_action(alpha, v), exp_action(alpha, w)) != mukai_pairing(v, w):
                return False, f"triple {t}"
        return True, "signature (4,20), 500 triples"

    criterion(10, "Mukai pairing and exp action", 5, check)
