"""Acceptance gate: ten exact criteria, each with a stated time bound.

Every check is zero-tolerance: equalities of torus elements, operator
actions, and integers.  Wall-clock bounds are asserted per criterion so
a regression in either correctness or cost fails the gate.
"""

import time
from fractions import Fraction as F

import pytest

import test_gdaha
import test_properties
import test_transport

from qxtorus.basicrep import (LaurentPoly, ParamField, TripleOperator,
                              functor_operators, spanning_triples,
                              verify_lemma27)
from qxtorus.cluster import match_theorem
from qxtorus.gdaha import (build_d4, build_e6, invert_parameters,
                           verify_presentation)
from qxtorus.mconv import verify_functor
from qxtorus.ncmat import NCMatrix
from qxtorus.transport import (TriangleChart, moduli_dimensions,
                               transport_classical, transport_quantum)


class deadline:
    """Context manager asserting the block finished under the bound."""

    def __init__(self, seconds: float) -> None:
        self.seconds = seconds

    def __enter__(self) -> "deadline":
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"bound exceeded: {elapsed:.2f}s >= {self.seconds:.0f}s")
        return False


def test_criterion_01_groupoid_relations():
    with deadline(5.0):
        for n in (2, 3, 4):
            c = TriangleChart(n)
            prod = (transport_classical(c, 1) * transport_classical(c, 2)
                    * transport_classical(c, 3))
            assert prod.is_identity()
        for n in (2, 3):
            c = TriangleChart(n)
            prod = (transport_quantum(c, 1) * transport_quantum(c, 2)
                    * transport_quantum(c, 3))
            assert prod.is_identity()


def test_criterion_02_quantum_transport_goldens():
    with deadline(30.0):
        suite = test_transport.TestTransportGoldens()
        suite.test_degree2_quantum()
        suite.test_degree3_quantum()


def test_criterion_03_rank2_quadruple():
    with deadline(30.0):
        pres = build_d4()
        report = verify_presentation(pres)
        assert report["passed"]
        names = {c["name"] for c in report["checks"]}
        assert {"hecke:O", "hecke:B", "hecke:G", "hecke:P", "cyclic",
                "unit-product:P", "central:O:1"} <= names
        suite = test_gdaha.TestRank2Family()
        suite.test_hole_loop_closed_forms(pres)
        suite.test_puncture_loop_closed_form(pres)


def test_criterion_04_rank3_triple():
    with deadline(120.0):
        pres = build_e6()
        report = verify_presentation(pres)
        assert report["passed"]
        names = {c["name"] for c in report["checks"]}
        assert {"hecke:C", "hecke:Y", "hecke:R", "cyclic",
                "unit-product:R"} <= names
        inversion = invert_parameters(pres)
        assert inversion["passed"] and len(inversion["checks"]) >= 6
        suite = test_gdaha.TestRank3Family()
        suite.test_third_loop_closed_form(pres)
        suite.test_third_loop_equals_scaled_inverse_product(pres)


def test_criterion_05_convolution_pipeline():
    with deadline(120.0):
        report = verify_functor()
        assert report["passed"]
        names = {c["name"] for c in report["checks"]}
        assert {"idempotent:e1", "projection:e2", "span:e3", "factorization",
                "unipotent-cubic", "rescaled-lower-cubic",
                "rescaled-inverse-cubic", "cyclic:ULP",
                "parameter-match:lower", "parameter-match:inverse"} <= names


def test_criterion_06_chart_match():
    with deadline(120.0):
        report = match_theorem()
        assert report["passed"]
        names = {c["name"] for c in report["checks"]}
        wanted = {f"entry:{g}{i}{j}"
                  for g in "CYR" for i in "123" for j in "123"}
        assert wanted <= names
        assert {"unit-diagonal", "double-mutation"} <= names


def test_criterion_07_laurent_operator_relations():
    with deadline(180.0):
        report = verify_lemma27(degree=6, trials=3, seed=0)
        assert report["passed"] and report["trials"] == 3
        suffixes = {c["name"].split(":", 1)[1] for c in report["checks"]}
        assert {"quadratic-relations", "cyclic-product", "unipotent-cubic",
                "triangular-cubic", "inverse-cubic",
                "rescaled-triangular-cubic", "rescaled-inverse-cubic",
                "triple-product", "rescaled-triple-product"} <= suffixes


def test_criterion_08_dimension_identity():
    with deadline(1.0):
        cases = 0
        for g in range(3):
            for s in range(4):
                for m in range(5):
                    if 4 * g - 4 + 2 * s + m <= 0:
                        continue
                    for n in range(2, 6):
                        dim_p, dim_t = moduli_dimensions(g, s, m, n)
                        assert dim_p == dim_t
                        cases += 1
        assert cases >= 100


def test_criterion_09_randomized_property_suites():
    with deadline(60.0):
        props = test_properties
        props.TestNormalFormIdempotence().test_round_trip_and_unit_stability()
        props.TestRingAxioms().test_associativity_distributivity_units()
        props.TestWeylPermutationInvariance().test_ordering_is_order_free()
        homomorphy = props.TestSubstitutionHomomorphy()
        homomorphy.test_scalar_twists()
        homomorphy.test_cycle_rotations()
        props.TestMutationInvolutivity().test_double_mutation_restores_weights()
        props.TestSeizureCommutationPreservation() \
            .test_exponents_and_products_survive()


def test_criterion_10_negative_controls():
    with deadline(60.0):
        # every verification report carries a live entry-perturbation check
        for report in (verify_presentation(build_d4()),
                       verify_presentation(build_e6()),
                       verify_functor(), match_theorem()):
            control = [c for c in report["checks"]
                       if c["name"] == "negative-control"]
            assert control and control[0]["passed"]

        # transport: a single q-rescaled entry is caught by the golden
        # comparison and breaks the groupoid product
        c2 = TriangleChart(2)
        t1 = transport_quantum(c2, 1)
        rows = [list(r) for r in t1.rows]
        rows[0][0] = rows[0][0] * t1.ring.torus.q_power(F(1, 2))
        bad = NCMatrix(t1.ring, rows)
        assert bad != t1
        prod = bad * transport_quantum(c2, 2) * transport_quantum(c2, 3)
        assert not prod.is_identity()

        # operator triangle: drifting one diagonal entry kills the cubic
        params = ParamField(2, 3, 5, F(1, 2), 3)
        lower = functor_operators(params)[0]
        rows = [list(r) for r in lower.rows]
        rows[2][2] = rows[2][2] + 1
        perturbed = TripleOperator(params, rows)
        roots = (params.a * params.b, params.a / params.b,
                 params.c * params.d / params.q)
        survived = False
        for v in spanning_triples(params, 3):
            w = v
            for r in roots:
                image = perturbed.apply(w)
                w = tuple(x - y * r for x, y in zip(image, w))
            if not all(f.is_zero for f in w):
                survived = True
                break
        assert survived
