"""Randomized kernel properties, five hundred seeded cases per suite."""

import random
from fractions import Fraction as F

from qxtorus.cluster import SeizureSite, mutate_quiver, seize
from qxtorus.qtorus import (Quiver, Torus, check_substitution,
                            commutation_exponent, element_from_json,
                            substitute, weyl_order)

N_CASES = 500


def random_torus(rng, max_vertices=5):
    k = rng.randint(3, max_vertices)
    names = tuple(f"v{i}" for i in range(k))
    arrows = []
    for i in range(k):
        for j in range(k):
            if i != j and rng.random() < 0.45:
                arrows.append((names[i], names[j],
                               rng.choice((1, 1, 2, F(1, 2)))))
    return Torus(Quiver(names, arrows=tuple(arrows)),
                 root_order=rng.choice((1, 2, 3, 6)))


def random_element(rng, torus, max_terms=3):
    acc = torus.zero()
    for _ in range(rng.randint(1, max_terms)):
        support = rng.sample(torus.names, rng.randint(1, min(3, len(torus.names))))
        mono = {name: rng.choice((-2, -1, 1, 2)) for name in support}
        acc = acc + torus.monomial(
            mono,
            qexp=F(rng.randint(-4, 4), torus.root_order),
            coeff=rng.choice((1, -1, 2, -3, F(1, 2), F(-2, 3))))
    return acc


class TestNormalFormIdempotence:
    def test_round_trip_and_unit_stability(self):
        rng = random.Random(101)
        cases = 0
        while cases < N_CASES:
            torus = random_torus(rng)
            for _ in range(10):
                x = random_element(rng, torus)
                rebuilt = element_from_json(torus, x.to_json())
                assert rebuilt == x and rebuilt.terms == x.terms
                assert (x + torus.zero()).terms == x.terms
                assert (x * torus.one()).terms == x.terms
                assert (torus.one() * x).terms == x.terms
                cases += 1
        assert cases >= N_CASES


class TestRingAxioms:
    def test_associativity_distributivity_units(self):
        rng = random.Random(202)
        cases = 0
        while cases < N_CASES:
            torus = random_torus(rng)
            for _ in range(10):
                a = random_element(rng, torus)
                b = random_element(rng, torus)
                c = random_element(rng, torus)
                assert (a + b) + c == a + (b + c)
                assert a + b == b + a
                assert (a * b) * c == a * (b * c)
                assert a * (b + c) == a * b + a * c
                assert (a + b) * c == a * c + b * c
                assert a + torus.zero() == a
                assert a * torus.one() == a and torus.one() * a == a
                cases += 1
        assert cases >= N_CASES


class TestWeylPermutationInvariance:
    def test_ordering_is_order_free(self):
        rng = random.Random(303)
        cases = 0
        while cases < N_CASES:
            torus = random_torus(rng)
            for _ in range(10):
                word = [(rng.choice(torus.names), rng.choice((-2, -1, 1, 2)))
                        for _ in range(rng.randint(2, 5))]
                ordered = weyl_order(torus, word)
                shuffled = word[:]
                rng.shuffle(shuffled)
                assert weyl_order(torus, shuffled) == ordered
                cases += 1
        assert cases >= N_CASES


class TestSubstitutionHomomorphy:
    def test_scalar_twists(self):
        rng = random.Random(404)
        cases = 0
        while cases < N_CASES // 2:
            torus = random_torus(rng)
            images = {
                name: torus.monomial(
                    {name: 1},
                    qexp=F(rng.randint(-3, 3), torus.root_order),
                    coeff=rng.choice((1, -1, 2, F(1, 2))))
                for name in torus.names
            }
            check_substitution(torus, torus, images)
            for _ in range(5):
                a = random_element(rng, torus)
                b = random_element(rng, torus)
                assert substitute(images, a * b, torus) \
                    == substitute(images, a, torus) * substitute(images, b, torus)
                assert substitute(images, a + b, torus) \
                    == substitute(images, a, torus) + substitute(images, b, torus)
                cases += 1
        assert cases >= N_CASES // 2

    def test_cycle_rotations(self):
        rng = random.Random(405)
        cases = 0
        while cases < N_CASES // 2:
            k = rng.randint(3, 5)
            w = rng.choice((1, 2, F(1, 2)))
            names = tuple(f"c{i}" for i in range(k))
            arrows = tuple((names[i], names[(i + 1) % k], w) for i in range(k))
            torus = Torus(Quiver(names, arrows=arrows),
                          root_order=rng.choice((1, 2, 4)))
            images = {names[i]: torus.gen(names[(i + 1) % k]) for i in range(k)}
            check_substitution(torus, torus, images)
            for _ in range(5):
                a = random_element(rng, torus)
                b = random_element(rng, torus)
                assert substitute(images, a * b, torus) \
                    == substitute(images, a, torus) * substitute(images, b, torus)
                cases += 1
        assert cases >= N_CASES // 2


class TestMutationInvolutivity:
    def test_double_mutation_restores_weights(self):
        rng = random.Random(505)
        cases = 0
        while cases < N_CASES:
            k = rng.randint(3, 6)
            names = tuple(f"v{i}" for i in range(k))
            frozen = tuple(n for n in names[1:] if rng.random() < 0.2)
            vertex = rng.choice([n for n in names if n not in frozen])
            arrows = []
            for i in range(k):
                for j in range(i + 1, k):
                    if rng.random() < 0.6:
                        pair = (names[i], names[j]) if rng.random() < 0.5 \
                            else (names[j], names[i])
                        # composite arrows stay half-integral only when the
                        # mutated vertex sees integer weights
                        w = 1 if vertex in pair else rng.choice((1, F(1, 2)))
                        arrows.append(pair + (w,))
            quiver = Quiver(names, arrows=tuple(arrows), frozen=frozen)
            twice = mutate_quiver(mutate_quiver(quiver, vertex), vertex)
            assert twice.same_weights(quiver)
            cases += 1
        assert cases >= N_CASES


class TestSeizureCommutationPreservation:
    def random_setup(self, rng):
        extra = []
        for i in range(rng.randint(0, 3)):
            anchor = rng.choice(("Z1", "Z3"))
            w = rng.choice((1, 2, F(1, 2)))
            pair = (f"S{i}", anchor) if rng.random() < 0.5 else (anchor, f"S{i}")
            extra.append(pair + (w,))
        spectators = tuple(a if a.startswith("S") else b for a, b, _ in extra)
        quiver = Quiver(
            ("Z1", "Z2", "Z3", "Z4") + tuple(dict.fromkeys(spectators)),
            arrows=(("Z1", "Z2", 1), ("Z2", "Z3", 1),
                    ("Z3", "Z4", 1), ("Z4", "Z1", 1)) + tuple(extra))
        root = rng.choice((1, 2, 3))
        torus = Torus(quiver, root_order=root)
        site = SeizureSite(
            cycle=("Z1", "Z2", "Z3", "Z4"), monomial=("Z2", "Z4"),
            coeff=F(rng.choice((1, -1, 2, 3)), rng.choice((1, 2))),
            qexp=F(rng.randint(-3, 3), root))
        return torus, site

    def test_exponents_and_products_survive(self):
        rng = random.Random(606)
        cases = 0
        while cases < N_CASES:
            torus, site = self.random_setup(rng)
            red, smap = seize(torus, site)
            for _ in range(5):
                u, w = rng.sample(torus.names, 2)
                gu, gw = torus.gen(u), torus.gen(w)
                assert commutation_exponent(red, smap(gu), smap(gw)) \
                    == commutation_exponent(torus, gu, gw)
                assert smap(gu * gw) == smap(gu) * smap(gw)
                cases += 1
        assert cases >= N_CASES
