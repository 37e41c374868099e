"""Localization, mutation, seizure, and the chart-match report.

Golden targets are word products in printed factor order; the kernel
absorbs reordering q-powers, so comparisons are element equalities.
The match fixtures are cached module-wide: the full two-seizure /
one-mutation chain is built once.
"""

from fractions import Fraction as F

import pytest

from qxtorus.cluster import (LocalizedElement, SeizureSite, binomial_inverse,
                             localize_invert, localize_multiply,
                             localize_simplify, match_setup, match_theorem,
                             mutate, mutate_quiver, seize)
from qxtorus.gdaha import build_e6
from qxtorus.mconv import CentralFraction
from qxtorus.qtorus import Quiver, Torus, TorusElement

T3 = F(1, 3)
T23 = F(2, 3)


def word(torus, *factors):
    acc = torus.one()
    for name, exp in factors:
        acc = acc * torus.gen(name).pow_frac(F(exp))
    return acc


@pytest.fixture(scope="module")
def pair():
    # two q-commuting variables, one arrow
    q = Quiver(("x", "y"), arrows=(("x", "y", 1),))
    return Torus(q)


@pytest.fixture(scope="module")
def triangle_torus():
    # the box-shaped six-vertex chart at root order three, built directly
    q = Quiver(
        ("C1", "C2", "Y1", "Y2", "b:111", "t:111"),
        arrows=(("C1", "b:111", 1), ("Y2", "b:111", 1), ("b:111", "C2", 1),
                ("b:111", "Y1", 1), ("t:111", "C1", 1), ("t:111", "Y2", 1),
                ("C2", "t:111", 1), ("Y1", "t:111", 1)),
        frozen=("C1", "Y1", "t:111"))
    return Torus(q, 3)


@pytest.fixture(scope="module")
def setup():
    return match_setup()


class TestLocalizedArithmetic:
    def test_binomial_cancels_both_sides(self, pair):
        t = pair
        b = t.one() + t.q_power(1) * t.gen("x")
        binv = localize_invert(b)
        assert localize_multiply(b, binv) == t.one()
        assert localize_multiply(binv, b) == t.one()

    def test_inverse_power_binomial_canonical_form(self, pair):
        t = pair
        b = t.one() + t.q_power(1) * t.gen("x", -1)
        binv = localize_invert(b)
        # 1 + q x^-1 = q x^-1 (1 + q^-1 x), so the inverse leads with
        # q^-1 x and keeps a positive-power binomial factor
        lead, factors = binv.terms[0]
        assert lead == t.q_power(-1) * t.gen("x")
        assert factors == (("x", F(-1), 1),)
        assert localize_multiply(b, binv) == t.one()
        assert localize_multiply(binv, b) == t.one()

    def test_commuting_binomial_past_generator(self, pair):
        t = pair
        w = t.comm_mon(t._mon_from_map({"y": 1}), t._mon_from_map({"x": 1}))
        assert w == 2
        lhs = localize_multiply(binomial_inverse(t, "x", 2), t.gen("y"))
        rhs = localize_multiply(t.gen("y"), binomial_inverse(t, "x", 2 + w))
        assert lhs == rhs
        assert lhs != localize_multiply(t.gen("y"),
                                        binomial_inverse(t, "x", 2))

    def test_single_term_and_central_inversion(self):
        t = Torus(Quiver(("u",)))
        assert localize_invert(t.gen("u", 2)) == t.gen("u", -2)
        frac = localize_invert(t.one() + t.gen("u", 2))
        assert isinstance(frac, CentralFraction)

    def test_unsupported_denominator_rejected(self, pair):
        with pytest.raises(ValueError, match="unsupported denominator"):
            localize_invert(pair.one() + pair.gen("x") + pair.gen("y"))
        with pytest.raises(ZeroDivisionError):
            localize_invert(pair.zero())

    def test_noncommuting_denominators_rejected(self, pair):
        t = pair
        with pytest.raises(ValueError, match="non-commuting"):
            localize_multiply(binomial_inverse(t, "x", 1),
                              binomial_inverse(t, "y", 1))

    def test_sum_collapses_to_plain_element(self, pair):
        t = pair
        binv = binomial_inverse(t, "x", 1)
        x = t.gen("x")
        # (1 + q x)(1 + q x)^-1 assembled as a sum of localized terms
        s = localize_simplify(binv + t.q_power(1) * x * binv)
        assert isinstance(s, TorusElement)
        assert s == t.one()

    def test_simplify_keeps_residual_inverse(self, pair):
        t = pair
        r = localize_simplify(binomial_inverse(t, "x", 1) * t.gen("y"))
        assert isinstance(r, LocalizedElement)
        assert r.has_denominator()

    def test_printed_cancellation_chain(self, triangle_torus):
        # -q - q^(2/3) C1 (1+q b^-1)^-1 - q^(5/3) C1 b^-1 (1+q b^-1)^-1
        # collapses to -q - q^(2/3) C1
        t = triangle_torus
        binv = binomial_inverse(t, "b:111", 1, power=-1)
        c1 = t.gen("C1")
        b_inv = t.gen("b:111", -1)
        total = (-t.q_power(1)
                 + (-t.q_power(T23)) * (c1 * binv)
                 + (-t.q_power(F(5, 3))) * ((c1 * b_inv) * binv))
        assert localize_simplify(total) == -t.q_power(1) - t.q_power(T23) * t.gen("C1")


class TestMutation:
    def test_isolated_vertex_only_inverts(self):
        q = Quiver(("a", "k"))
        primed, mu = mutate(Torus(q), "k")
        assert primed.quiver.same_weights(q)
        assert mu(primed.gen("k")) == Torus(q).gen("k", -1)
        assert mu(primed.gen("a")) == Torus(q).gen("a")

    def test_accepts_bare_quiver(self):
        q = Quiver(("a", "k"), arrows=(("a", "k", 1),))
        primed, mu = mutate(q, "k")
        assert primed.root_order == 1
        assert primed.quiver.weight("a", "k") == -1

    def test_quiver_rule_star_to_box(self, triangle_torus):
        got = mutate_quiver(triangle_torus.quiver, "b:111")
        expect = Quiver(
            ("C1", "C2", "Y1", "Y2", "b:111", "t:111"),
            arrows=(("C1", "C2", 1), ("C1", "Y1", 1), ("b:111", "C1", 1),
                    ("t:111", "C1", 1), ("Y2", "C2", 1), ("C2", "b:111", 1),
                    ("C2", "t:111", 1), ("Y2", "Y1", 1), ("Y1", "b:111", 1),
                    ("Y1", "t:111", 1), ("b:111", "Y2", 1),
                    ("t:111", "Y2", 1)),
            frozen=("C1", "Y1", "t:111"))
        assert got.same_weights(expect)
        assert got.frozen == expect.frozen

    def test_variable_images_match_printed_forms(self, triangle_torus):
        t = triangle_torus
        primed, mu = mutate(t, "b:111")
        qp = t.q_power
        pos = t.one() + qp(1) * t.gen("b:111")
        neg_inv = binomial_inverse(t, "b:111", 1, power=-1)
        assert mu.images["b:111"] == t.gen("b:111", -1)
        assert mu.images["t:111"] == t.gen("t:111")
        assert mu.images["C1"] == localize_multiply(t.gen("C1"), neg_inv)
        assert mu.images["Y2"] == localize_multiply(t.gen("Y2"), neg_inv)
        assert mu.images["Y1"] == t.gen("Y1") * pos
        assert mu.images["C2"] == t.gen("C2") * pos

    def test_double_mutation_restores_generators(self, triangle_torus):
        t = triangle_torus
        primed, mu = mutate(t, "b:111")
        back, mu2 = mutate(primed, "b:111")
        assert back.quiver.same_weights(t.quiver)
        assert back.quiver.frozen == t.quiver.frozen
        for name in t.names:
            assert mu(mu2.images[name]) == t.gen(name)

    def test_frozen_vertex_rejected(self, triangle_torus):
        with pytest.raises(ValueError, match="frozen"):
            mutate(triangle_torus, "C1")

    def test_unknown_vertex_rejected(self, triangle_torus):
        with pytest.raises(ValueError, match="unknown"):
            mutate(triangle_torus, "Z9")

    def test_heavy_arrow_rejected(self):
        q = Quiver(("a", "k"), arrows=(("a", "k", 2),))
        with pytest.raises(ValueError, match="out of range"):
            mutate(Torus(q), "k")

    def test_inverse_generator_images(self, triangle_torus):
        # mu is a homomorphism: images of inverses are inverse images
        t = triangle_torus
        primed, mu = mutate(t, "b:111")
        for name in ("C1", "C2"):
            prod = localize_multiply(mu(primed.gen(name, -1)),
                                     mu(primed.gen(name)))
            assert prod == t.one()


def rhombus(extra=()):
    names = ("Z1", "Z2", "Z3", "Z4") + tuple(n for n, _, _ in extra)
    q = Quiver(tuple(dict.fromkeys(names)),
               arrows=(("Z1", "Z2", 1), ("Z2", "Z3", 1), ("Z3", "Z4", 1),
                       ("Z4", "Z1", 1)) + tuple(extra))
    return Torus(q)


class TestSeizure:
    def test_standalone_rhombus(self):
        t = rhombus()
        red, smap = seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                         monomial=("Z2", "Z4")))
        assert red.names == ("Z1", "Z2", "Z3")
        assert smap(t.gen("Z4")) == red.gen("Z2", -1)
        assert smap(t.gen("Z2") * t.gen("Z4")) == red.one()
        assert red.quiver.same_weights(t.quiver.without_vertex("Z4"))

    def test_full_word_on_standalone_rhombus(self):
        t = rhombus()
        red, smap = seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                         monomial=("Z1", "Z2", "Z3", "Z4")))
        w = t.gen("Z1") * t.gen("Z2") * t.gen("Z3") * t.gen("Z4")
        assert smap(w) == red.one()

    def test_assigned_value_scales_image(self):
        t = rhombus()
        red, smap = seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                         monomial=("Z2", "Z4"),
                                         coeff=F(3), qexp=F(2)))
        assert smap(t.gen("Z2") * t.gen("Z4")) == red.q_power(2, coeff=3)

    def test_noncentral_word_rejected(self):
        t = rhombus(extra=(("Z5", "Z1", 1),))
        with pytest.raises(ValueError, match="not central"):
            seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                 monomial=("Z1", "Z2", "Z3", "Z4")))

    def test_degree_condition_rejected(self):
        t = rhombus(extra=(("Z5", "Z2", 1),))
        with pytest.raises(ValueError, match="indegree and outdegree"):
            seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                 monomial=("Z2", "Z4")))

    def test_misoriented_cycle_rejected(self):
        t = rhombus()
        with pytest.raises(ValueError, match="missing cycle arrow"):
            seize(t, SeizureSite(cycle=("Z1", "Z4", "Z3", "Z2"),
                                 monomial=("Z4", "Z2")))

    def test_bad_word_support_rejected(self):
        t = rhombus()
        with pytest.raises(ValueError, match="cut corners"):
            seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                 monomial=("Z1", "Z4")))

    def test_zero_value_rejected(self):
        t = rhombus()
        with pytest.raises(ValueError, match="invertible"):
            seize(t, SeizureSite(cycle=("Z1", "Z2", "Z3", "Z4"),
                                 monomial=("Z2", "Z4"), coeff=F(0)))


@pytest.fixture(scope="module")
def chain():
    pres = build_e6()
    big = pres.torus
    mid, first = seize(big, SeizureSite(
        cycle=("t:111", "C1", "b:111", "C3"), monomial=("C1", "C3")))
    red, second = seize(mid, SeizureSite(
        cycle=("b:111", "C2", "t:111", "Y3"),
        monomial=("t:111", "b:111", "C2", "Y3")))
    return big, mid, first, red, second


class TestTriangleChartSeizures:
    def test_first_identification(self, chain):
        big, mid, first, _, _ = chain
        assert first.images["C3"] == mid.gen("C1", -1)
        assert first(big.gen("C3").pow_frac(T3)) == mid.gen("C1").pow_frac(-T3)

    def test_second_identification(self, chain):
        _, mid, _, red, second = chain
        assert second(mid.gen("Y3").pow_frac(T3)) == word(
            red, ("C2", -T3), ("b:111", -T3), ("t:111", -T3))

    def test_reduced_chart_shape(self, chain, triangle_torus):
        _, _, _, red, _ = chain
        assert red.quiver.same_weights(triangle_torus.quiver)
        assert red.quiver.frozen == frozenset({"C1", "Y1", "t:111"})

    def test_defining_words_map_to_one(self, chain):
        big, mid, first, red, second = chain
        w1 = big.gen("C1") * big.gen("C3")
        assert second(first(w1)) == red.one()
        w2 = (mid.gen("t:111") * mid.gen("b:111") * mid.gen("C2")
              * mid.gen("Y3"))
        assert second(w2) == red.one()


class TestChartMatch:
    def test_seized_first_loop_matrix_golden(self, setup):
        red = setup.reduced
        q = red.q_power
        g = red.gen
        golden = {
            (1, 1): red.one(),
            (1, 2): (-red.one() - q(-T3) * g("t:111")
                     - q(-T3) * g("C2") * g("t:111")
                     * (q(-1) + g("b:111"))),
            (1, 3): (q(1) + q(T3) * g("C1")
                     * (q(T3) + q(2) * g("t:111")
                        + q(1) * g("C2") * g("t:111"))),
            (2, 1): red.zero(),
            (2, 2): red.one(),
            (2, 3): -q(1) - q(T23) * g("C1"),
            (3, 1): red.zero(),
            (3, 2): red.zero(),
            (3, 3): red.one(),
        }
        bad = [(i, j) for (i, j), want in golden.items()
               if setup.seized[0].entry(i - 1, j - 1) != want]
        assert not bad, f"entries off at {bad}"

    def test_composite_images_of_loop_inverses(self, setup):
        red = setup.reduced
        q = red.q_power
        g = red.gen
        state = setup.state
        assert setup.push(state.torus.gen("O1").inverse()) == (
            q(-T23) * g("C2") * g("Y1").inverse())
        assert setup.push(state.torus.gen("G1").inverse()) == (
            q(-T23) * g("Y2") * g("C1").inverse())
        # forced by composing the chart maps; see the b-loop images
        assert setup.push(state.torus.gen("B1").inverse()) == (
            q(-T23) * g("b:111", -1) * g("t:111").inverse())

    def test_intermediate_before_mutation(self, setup):
        from qxtorus.cluster import _transplant
        from qxtorus.qtorus import substitute

        primed = setup.primed
        q = primed.q_power
        g = primed.gen
        u = setup.state.u

        def halfway(x):
            return substitute(setup.images,
                              _transplant(x, setup.reversed_torus),
                              primed, check=False)

        want23 = (-q(1) - q(T23) * g("C1") - q(-T3) * g("b:111") * g("C1"))
        assert halfway(u.entry(1, 2)) == want23
        inner = (primed.one() + q(-T23) * g("b:111") * g("t:111").inverse()
                 + q(-1) * g("b:111") + q(-2) * g("C2") * g("b:111"))
        want13 = (q(1) + q(T23) * g("C1")
                  + q(T3) * inner * g("t:111") * g("C1"))
        assert halfway(u.entry(0, 2)) == want13

    def test_pushed_entries_match_printed_forms(self, setup):
        red = setup.reduced
        q = red.q_power
        g = red.gen
        u = setup.state.u
        assert setup.push(u.entry(1, 2)) == -q(1) - q(T23) * g("C1")
        assert setup.push(u.entry(0, 1)) == (
            -red.one() - q(-T3) * g("t:111")
            - q(-T3) * g("C2") * g("t:111") * (q(-1) + g("b:111")))
        assert setup.push(u.entry(0, 2)) == (
            q(1) + q(T3) * g("C1")
            * (q(T3) + q(2) * g("t:111") + q(1) * g("C2") * g("t:111")))

    def test_rescaling_scalars(self, setup):
        red = setup.reduced
        assert setup.scale_low.is_single_term()
        assert setup.scale_inv.is_single_term()
        # the two rescalings pair to the q-reversed product of the
        # original central scalars
        assert setup.scale_low * setup.scale_inv == red.q_power(T23)

    def test_full_report(self, setup):
        report = match_theorem()
        assert report["passed"]
        names = [c["name"] for c in report["checks"]]
        assert len(names) == 30
        assert all(c["passed"] for c in report["checks"])
        for label in ("C", "Y", "R"):
            for i in range(1, 4):
                for j in range(1, 4):
                    assert f"entry:{label}{i}{j}" in names
        assert "unit-diagonal" in names
        assert "double-mutation" in names
        assert "negative-control" in names

    def test_unit_diagonal(self, setup):
        for i in range(3):
            assert setup.seized[0].entry(i, i) == setup.reduced.one()

    def test_negative_control_detects_drift(self, setup):
        # a drifted target entry must not compare equal
        img = setup.push(setup.state.u.entry(0, 1))
        assert img != setup.seized[0].entry(0, 1) + setup.reduced.one()
        assert img == setup.seized[0].entry(0, 1)
