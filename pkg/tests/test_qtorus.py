"""Core quantum-torus kernel: quivers, normal forms, exact arithmetic."""

from fractions import Fraction as F

import pytest

from qxtorus.qtorus import (Quiver, Torus, commutation_exponent, is_central,
                            multiply, rat, root_extend, substitute,
                            torus_from_json, torus_to_json, weyl_order)

H = F(1, 2)


@pytest.fixture()
def cycle():
    # solid triangle a -> b -> c -> a
    q = Quiver(["a", "b", "c"],
               [("a", "b", 1), ("b", "c", 1), ("c", "a", 1)])
    return Torus(q)


class TestRat:
    def test_accepted_forms(self):
        assert rat(3) == F(3)
        assert rat("2/7") == F(2, 7)
        assert rat(F(1, 2)) == H

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            rat(0.5)


class TestQuiver:
    def test_weights_are_skew(self, cycle):
        q = cycle.quiver
        assert q.weight("a", "b") == 1
        assert q.weight("b", "a") == -1
        assert q.weight("a", "c") == -1
        assert q.weight2("a", "b") == 2
        assert q.weight("a", "a") == 0

    def test_parallel_arrows_accumulate_and_cancel(self):
        q = Quiver(["x", "y"])
        q.add_arrow("x", "y", H)
        q.add_arrow("x", "y", H)
        assert q.weight("x", "y") == 1
        q.add_arrow("y", "x", 1)
        assert q.weight("x", "y") == 0
        assert list(q.arrows()) == []

    def test_validation(self):
        with pytest.raises(ValueError):
            Quiver(["x", "x"])
        with pytest.raises(ValueError):
            Quiver(["x"], frozen=["y"])
        q = Quiver(["x", "y"])
        with pytest.raises(ValueError):
            q.add_arrow("x", "x", 1)
        with pytest.raises(ValueError):
            q.add_arrow("x", "z", 1)
        with pytest.raises(ValueError):
            q.add_arrow("x", "y", F(1, 3))

    def test_reversed_and_without_vertex(self, cycle):
        rev = cycle.quiver.reversed()
        assert rev.weight("a", "b") == -1
        cut = cycle.quiver.without_vertex("c")
        assert set(cut.names) == {"a", "b"}
        assert cut.weight("a", "b") == 1

    def test_degree_at(self, cycle):
        assert cycle.quiver.degree_at("a") == (1, 1)


class TestCommutation:
    def test_solid_arrow_exponent(self, cycle):
        # one solid arrow a -> b: Z_b Z_a = q^-2 Z_a Z_b
        assert commutation_exponent(cycle, {"a": 1}, {"b": 1}) == -2
        assert commutation_exponent(cycle, {"b": 1}, {"a": 1}) == 2
        za, zb = cycle.gen("a"), cycle.gen("b")
        assert zb * za == cycle.q_power(-2) * za * zb

    def test_dashed_arrow_exponent(self):
        t = Torus(Quiver(["x", "y"], [("x", "y", H)]))
        assert commutation_exponent(t, t.gen("x"), t.gen("y")) == -1

    def test_root_extension_scales_exponents(self, cycle):
        fine = root_extend(cycle, 2)
        assert fine.root_order == 2
        c = commutation_exponent(fine, fine.gen("a", H), fine.gen("b", H))
        assert c == -H

    def test_inclusion_into_finer_torus(self, cycle):
        fine = cycle.root_extend(3)
        x = cycle.gen("a") * cycle.gen("b") + cycle.q_power(H)
        assert fine.include(x) == fine.gen("a") * fine.gen("b") \
            + fine.q_power(H)

    def test_exponents_must_fit_root_order(self, cycle):
        with pytest.raises(ValueError):
            cycle.gen("a", H)
        fine = cycle.root_extend(2)
        with pytest.raises(ValueError):
            fine.gen("a", F(1, 3))


class TestWeylOrdering:
    def test_invariant_under_permutation(self, cycle):
        za, zb = cycle.gen("a"), cycle.gen("b")
        assert weyl_order(cycle, [za, zb]) == weyl_order(cycle, [zb, za])

    def test_symmetric_point_of_the_product(self, cycle):
        # ord(Z_a Z_b) = q^-1 M(e_a + e_b) for the solid arrow a -> b
        assert weyl_order(cycle, [("a", 1), ("b", 1)]) \
            == cycle.monomial({"a": 1, "b": 1}, qexp=-1)

    def test_fixes_single_factors(self, cycle):
        assert weyl_order(cycle, [cycle.gen("c")]) == cycle.gen("c")
        assert weyl_order(cycle, []) == cycle.one()

    def test_rejects_dressed_factors(self, cycle):
        with pytest.raises(ValueError):
            weyl_order(cycle, [cycle.q_power(1) * cycle.gen("a")])

    def test_square_recovers_both_orders(self, cycle):
        za, zb = cycle.gen("a"), cycle.gen("b")
        ordd = weyl_order(cycle, [za, zb])
        assert ordd * ordd == cycle.q_power(0) * za * zb * zb * za


class TestArithmetic:
    def test_merge_rule_keeps_products_single(self, cycle):
        x = cycle.gen("a") * cycle.gen("b") * cycle.gen("c")
        assert x.is_single_term()
        mon, qexp, coeff = x.single_term()
        assert coeff == 1

    def test_scalars_and_sums(self, cycle):
        x = 2 * cycle.gen("a") - cycle.gen("a")
        assert x == cycle.gen("a")
        assert (x - x).is_zero()
        assert cycle.scalar(5) == 5
        assert cycle.q_power(H) + cycle.q_power(H) \
            == cycle.q_power(H, 2)

    def test_multiply_helper(self, cycle):
        assert multiply(cycle.gen("a"), cycle.gen("b")) \
            == cycle.gen("a") * cycle.gen("b")

    def test_integer_powers(self, cycle):
        za = cycle.gen("a")
        assert za ** 3 == za * za * za
        assert za ** 0 == cycle.one()
        assert za ** -2 == (za.inverse()) ** 2
        with pytest.raises(TypeError):
            za ** 0.5

    def test_inverse(self, cycle):
        x = cycle.q_power(F(3, 2), 5) * cycle.gen("a") * cycle.gen("b")
        assert x * x.inverse() == cycle.one()
        assert x.inverse() * x == cycle.one()
        with pytest.raises(ValueError):
            (cycle.gen("a") + cycle.one()).inverse()

    def test_fractional_powers(self, cycle):
        fine = cycle.root_extend(2)
        x = fine.q_power(1, 4) * fine.gen("a") * fine.gen("b")
        r = x.pow_frac(H)
        assert r * r == x
        assert x.root(2) == r
        with pytest.raises(ValueError):
            fine.gen("a").pow_frac(F(1, 3))
        with pytest.raises(ValueError):
            (fine.scalar(2) * fine.gen("a")).pow_frac(H)

    def test_cross_torus_operations_rejected(self, cycle):
        other = Torus(Quiver(["a", "b", "c"]))
        with pytest.raises(ValueError):
            cycle.gen("a") * other.gen("a")

    def test_equal_tori_interoperate(self, cycle):
        q = Quiver(["a", "b", "c"],
                   [("a", "b", 1), ("b", "c", 1), ("c", "a", 1)])
        twin = Torus(q)
        assert cycle.gen("a") * twin.gen("b") == twin.gen("a") * cycle.gen("b")


class TestStructure:
    def test_centrality(self, cycle):
        assert not is_central(cycle.gen("a"))
        assert is_central(cycle.monomial({"a": 1, "b": 1, "c": 1}))
        assert is_central(cycle.q_power(F(7, 3), -2))
        assert is_central(cycle.zero())

    def test_q_inversion(self, cycle):
        x = cycle.monomial({"a": 1}, qexp=H, coeff=3) + cycle.q_power(-2)
        y = x.q_invert()
        assert y == cycle.monomial({"a": 1}, qexp=-H, coeff=3) \
            + cycle.q_power(2)
        assert y.q_invert() == x

    def test_grading_by_vertex(self, cycle):
        x = cycle.gen("a") + cycle.gen("a", 2) * cycle.gen("b") + cycle.one()
        layers = x.graded_by_vertex("a")
        assert set(layers) == {F(0), F(1), F(2)}
        assert layers[F(1)] == cycle.gen("a")

    def test_support_queries(self, cycle):
        x = cycle.gen("a", 2) + cycle.gen("a", -1) * cycle.gen("b")
        assert x.n_terms() == 2
        assert x.vertex_degree_range("a") == (-1, 2)
        assert x.vertex_degree_range("c") == (0, 0)
        assert x.coefficient({"a": 2}) == {F(0): F(1)}
        assert x.coefficient({"c": 5}) == {}

    def test_json_shape(self, cycle):
        x = cycle.monomial({"a": 1, "b": -2}, qexp=H, coeff=-3)
        assert x.to_json() == [{
            "coeff": [{"qexp": "1/2", "c": "-3"}],
            "monomial": {"a": "1", "b": "-2"},
        }]


class TestSubstitution:
    def test_rescaling_homomorphism(self, cycle):
        images = {"a": cycle.q_power(1) * cycle.gen("a"),
                  "b": cycle.gen("b"), "c": cycle.gen("c")}
        x = cycle.gen("a") * cycle.gen("b") + cycle.gen("c")
        y = substitute(images, x, cycle)
        assert y == cycle.q_power(1) * cycle.gen("a") * cycle.gen("b") \
            + cycle.gen("c")

    def test_commutation_mismatch_rejected(self, cycle):
        rev = Torus(cycle.quiver.reversed())
        images = {n: rev.gen(n) for n in cycle.names}
        with pytest.raises(ValueError):
            substitute(images, cycle.gen("a"), rev)

    def test_fractional_exponents_use_exact_roots(self, cycle):
        fine = cycle.root_extend(2)
        images = {"a": fine.monomial({"a": 1}, coeff=4),
                  "b": fine.gen("b"), "c": fine.gen("c")}
        y = substitute(images, fine.gen("a", H), fine)
        assert y == fine.monomial({"a": H}, coeff=2)


class TestTorusJson:
    def test_round_trip(self, cycle):
        fine = cycle.root_extend(2)
        back = torus_from_json(torus_to_json(fine))
        assert back.compatible(fine)
        assert back.quiver.frozen == fine.quiver.frozen
