"""Hecke-type matrix presentations built from loop transports.

Two families are produced on glued triangulated surfaces:

* ``d4``: four charts of degree 2 glued into a sphere with three holes
  and a puncture.  Each hole contributes one 2x2 loop matrix with a
  quadratic minimal polynomial; the puncture loop closes the product
  relation O*B*G*P = q^-1.
* ``e6``: two charts of degree 3 glued into a one-holed torus shape.
  Three 3x3 loop matrices satisfy cubic minimal polynomials and close
  the product relation C*Y*R = q^(2/3).

All minimal-polynomial roots are central monomials of the amalgamated
torus, so the factor order in a Hecke check is immaterial; the
verification report asserts both orders anyway.  For the rank-3 family
the six central generators of the parameter lattice can be recovered
from the Hecke parameters (``invert_parameters``), proving the
presentation carries the full universal parameter torus.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .ncmat import NCMatrix, TorusRing, hecke_check
from .qtorus import Torus, TorusElement, is_central, torus_to_json
from .transport import Gluing, PathSpec, Surface, amalgamate, compose_path

__all__ = [
    "GdahaPresentation",
    "build_d4",
    "build_e6",
    "d4_surface",
    "e6_surface",
    "verify_presentation",
    "invert_parameters",
    "presentation_to_json",
]

_HALF = Fraction(1, 2)
_THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class GdahaPresentation:
    """A tuple of loop matrices with central Hecke parameters.

    ``hecke_parameters[i]`` lists the minimal-polynomial roots of
    ``generators[i]`` in ascending order (the order in which the factors
    are usually displayed).  ``cyclic_qexp`` is the exponent c in the
    closing relation  prod(generators) = q^c * 1.
    """

    family: str
    surface: Surface
    torus: Torus
    names: tuple[str, ...]
    generators: tuple[NCMatrix, ...]
    hecke_parameters: tuple[tuple[TorusElement, ...], ...]
    cyclic_qexp: Fraction

    @property
    def ring(self) -> TorusRing:
        return self.generators[0].ring

    def generator(self, name: str) -> NCMatrix:
        return self.generators[self.names.index(name)]


def d4_surface() -> Surface:
    """Four degree-2 charts; three self-gluings cut out the holes."""
    return Surface(
        n=2,
        labels=("c", "d", "l", "r"),
        gluings=(
            Gluing(("r", 2), ("r", 3), ("O1",)),
            Gluing(("c", 3), ("r", 1), ("O2",)),
            Gluing(("d", 2), ("d", 3), ("B1",)),
            Gluing(("c", 1), ("d", 1), ("B2",)),
            Gluing(("l", 2), ("l", 3), ("G1",)),
            Gluing(("c", 2), ("l", 1), ("G2",)),
        ),
        frozen=("O2", "B2", "G2"),
    )


def e6_surface() -> Surface:
    """Two degree-3 charts glued along all three side pairs."""
    return Surface(
        n=3,
        labels=("t", "b"),
        gluings=(
            Gluing(("t", 2), ("b", 1), ("Y2", "Y1")),
            Gluing(("b", 2), ("t", 1), ("C2", "C1")),
            Gluing(("t", 3), ("b", 3), ("Y3", "C3")),
        ),
        frozen=("t:111", "Y3", "C3", "Y1", "C1"),
    )


# Loop words: S tokens are the chart-independent antidiagonal block, T
# tokens name (chart label, transport index, power).  Scalar prefactors
# normalise the minimal polynomials to central roots.
_D4_LOOPS: Mapping[str, PathSpec] = {
    "O": PathSpec(
        (("S",), ("T", "r", 3, 1), ("S",), ("T", "r", 2, 1), ("S",)),
        qexp=Fraction(1), coeff=-1),
    "B": PathSpec(
        (("T", "c", 2, 1), ("S",), ("T", "d", 3, 1), ("S",),
         ("T", "d", 2, 1), ("S",), ("T", "c", 2, -1)),
        qexp=Fraction(1), coeff=-1),
    "G": PathSpec(
        (("T", "c", 1, -1), ("S",), ("T", "l", 3, 1), ("S",),
         ("T", "l", 2, 1), ("S",), ("T", "c", 1, 1)),
        qexp=Fraction(1), coeff=-1),
    "P": PathSpec(
        (("T", "c", 1, -1), ("S",), ("T", "l", 2, -1), ("S",),
         ("T", "l", 3, -1), ("S",), ("T", "c", 3, -1), ("S",),
         ("T", "d", 2, -1), ("S",), ("T", "d", 3, -1), ("S",),
         ("T", "c", 2, -1), ("S",), ("T", "r", 2, -1), ("S",),
         ("T", "r", 3, -1), ("S",)),
        qexp=_HALF),
}

_E6_LOOPS: Mapping[str, PathSpec] = {
    "C": PathSpec(
        (("T", "t", 2, 1), ("S",), ("T", "b", 1, 1), ("S",)),
        qexp=Fraction(10, 9)),
    "Y": PathSpec(
        (("S",), ("T", "b", 2, 1), ("S",), ("T", "t", 1, 1)),
        qexp=Fraction(10, 9)),
    "R": PathSpec(
        (("T", "t", 1, -1), ("S",), ("T", "b", 3, 1), ("S",),
         ("T", "t", 2, -1)),
        qexp=Fraction(10, 9)),
}


def _word(torus: Torus, *factors: tuple[str, Fraction]) -> TorusElement:
    """Left-to-right product of fractional generator powers."""
    acc = torus.one()
    for name, exp in factors:
        acc = acc * torus.gen(name).pow_frac(Fraction(exp))
    return acc


def _d4_conjugator(big: Torus) -> list[TorusElement]:
    # Diagonal gauge turning every loop upper/lower part into the shape
    # whose minimal polynomial has central roots.
    z = big.gen("c:110")
    return [
        big.q_power(Fraction(-1, 4)) * z.pow_frac(-_HALF),
        big.q_power(Fraction(1, 4)) * z.pow_frac(_HALF),
    ]


def _e6_conjugator(big: Torus) -> list[TorusElement]:
    za, zb = big.gen("t:210"), big.gen("t:120")
    return [
        za.pow_frac(-2 * _THIRD) * zb.pow_frac(-_THIRD),
        big.q_power(Fraction(5, 6)) * za.pow_frac(_THIRD) * zb.pow_frac(-_THIRD),
        big.q_power(_THIRD) * za.pow_frac(_THIRD) * zb.pow_frac(2 * _THIRD),
    ]


@functools.lru_cache(maxsize=1)
def build_d4() -> GdahaPresentation:
    """Build the four 2x2 loop matrices and their quadratic data."""
    surface = d4_surface()
    amalg = amalgamate(surface)
    torus = amalg.torus
    conj = _d4_conjugator(amalg.big)
    names = ("O", "B", "G", "P")
    gens = tuple(compose_path(amalg, _D4_LOOPS[n], conjugator=conj)
                 for n in names)
    cycle = (("O2", 1), ("B2", 1), ("G2", 1))
    holes = (("O1", _HALF), ("B1", _HALF), ("G1", _HALF))
    params = (
        (_word(torus, ("O1", _HALF)), _word(torus, ("O1", -_HALF))),
        (_word(torus, ("B1", _HALF)), _word(torus, ("B1", -_HALF))),
        (_word(torus, ("G1", _HALF)), _word(torus, ("G1", -_HALF))),
        (torus.q_power(1) * _word(torus, *holes, *cycle),
         torus.q_power(1) * _word(torus, *((n, -e) for n, e in holes),
                                  *((n, -e) for n, e in cycle))),
    )
    return GdahaPresentation(
        family="d4", surface=surface, torus=torus, names=names,
        generators=gens, hecke_parameters=params,
        cyclic_qexp=Fraction(-1))


def _e6_param_triples(torus: Torus) -> tuple[tuple[TorusElement, ...], ...]:
    t, b = "t:111", "b:111"
    th = _THIRD
    c_small = _word(torus, ("C1", -2 * th), ("C2", -th), ("Y3", -th),
                    ("C3", -2 * th), (t, -th), (b, -th))
    c_mid = _word(torus, ("C1", th), ("C2", -th), ("Y3", -th),
                  ("C3", th), (t, -th), (b, -th))
    c_big = _word(torus, ("C1", th), ("C2", 2 * th), ("Y3", 2 * th),
                  ("C3", th), (t, 2 * th), (b, 2 * th))
    y_small = _word(torus, ("Y1", -2 * th), ("Y2", -th), ("Y3", -2 * th),
                    ("C3", -th), (t, -th), (b, -th))
    y_mid = _word(torus, ("Y1", th), ("Y2", -th), ("Y3", th),
                  ("C3", -th), (t, -th), (b, -th))
    y_big = _word(torus, ("Y1", th), ("Y2", 2 * th), ("Y3", th),
                  ("C3", 2 * th), (t, 2 * th), (b, 2 * th))
    r_small = _word(torus, ("Y1", -th), ("Y2", -2 * th), ("C1", -th),
                    ("C2", -2 * th), (t, -th), (b, -th))
    r_mid = _word(torus, ("Y1", -th), ("Y2", th), ("C1", -th),
                  ("C2", th), (t, -th), (b, -th))
    r_big = _word(torus, ("Y1", 2 * th), ("Y2", th), ("C1", 2 * th),
                  ("C2", th), (t, 2 * th), (b, 2 * th))
    return ((c_small, c_mid, c_big),
            (y_small, y_mid, y_big),
            (r_small, r_mid, r_big))


@functools.lru_cache(maxsize=1)
def build_e6() -> GdahaPresentation:
    """Build the three 3x3 loop matrices and their cubic data."""
    surface = e6_surface()
    amalg = amalgamate(surface)
    torus = amalg.torus
    conj = _e6_conjugator(amalg.big)
    names = ("C", "Y", "R")
    gens = tuple(compose_path(amalg, _E6_LOOPS[n], conjugator=conj)
                 for n in names)
    return GdahaPresentation(
        family="e6", surface=surface, torus=torus, names=names,
        generators=gens, hecke_parameters=_e6_param_triples(torus),
        cyclic_qexp=Fraction(2, 3))


def _product(mats: Iterable[NCMatrix]) -> NCMatrix:
    acc = None
    for m in mats:
        acc = m if acc is None else acc * m
    assert acc is not None
    return acc


def _fractional_names(pres: GdahaPresentation,
                      watch: Sequence[str]) -> list[str]:
    """Names from ``watch`` appearing with non-integer exponent somewhere."""
    seen: set[str] = set()
    for mat in pres.generators:
        for i in range(mat.nrows):
            for j in range(mat.ncols):
                for term in mat.entry(i, j).to_json():
                    for name, exp in term["monomial"].items():
                        if name in watch and Fraction(exp).denominator != 1:
                            seen.add(name)
    return sorted(seen)


def _perturbed(pres: GdahaPresentation) -> GdahaPresentation:
    """Copy with +1 added to the (0,0) entry of the first generator."""
    first = pres.generators[0]
    rows = [[first.entry(i, j) for j in range(first.ncols)]
            for i in range(first.nrows)]
    rows[0][0] = rows[0][0] + pres.torus.one()
    bad = NCMatrix(first.ring, rows)
    return GdahaPresentation(
        family=pres.family, surface=pres.surface, torus=pres.torus,
        names=pres.names, generators=(bad,) + pres.generators[1:],
        hecke_parameters=pres.hecke_parameters,
        cyclic_qexp=pres.cyclic_qexp)


def verify_presentation(pres: GdahaPresentation,
                        negative_control: bool = True) -> dict:
    """Machine-check every defining identity; returns a pass/fail report.

    Checks per generator: the Hecke relation in both factor orders, the
    centrality of each parameter, and the parameter product collapsing
    to 1.  Globally: the cyclic product relation, and for the rank-2
    family the integrality of the cycle variables O2, B2, G2.  With
    ``negative_control`` a +1 perturbation of one entry is verified to
    break at least one identity.
    """
    torus = pres.torus
    checks: list[dict] = []

    def record(name: str, passed: bool) -> None:
        checks.append({"name": name, "passed": bool(passed)})

    for name, mat, params in zip(pres.names, pres.generators,
                                 pres.hecke_parameters):
        record(f"hecke:{name}", hecke_check(mat, params))
        record(f"hecke:{name}:reversed",
               hecke_check(mat, tuple(reversed(params))))
        for k, p in enumerate(params, 1):
            record(f"central:{name}:{k}", is_central(p))
        record(f"unit-product:{name}",
               _product_elements(params) == torus.one())

    cyc = _product(pres.generators)
    want = NCMatrix.identity(pres.ring, cyc.nrows).scale_left(
        torus.q_power(pres.cyclic_qexp))
    record("cyclic", cyc == want)

    if pres.family == "d4":
        record("integer-exponents:O2,B2,G2",
               not _fractional_names(pres, ("O2", "B2", "G2")))

    if negative_control:
        broken = verify_presentation(_perturbed(pres),
                                     negative_control=False)
        record("negative-control", not broken["passed"])

    return {
        "family": pres.family,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def _product_elements(elems: Sequence[TorusElement]) -> TorusElement:
    acc = elems[0]
    for e in elems[1:]:
        acc = acc * e
    return acc


def invert_parameters(pres: GdahaPresentation) -> dict:
    """Recover the six central lattice generators from the cubic roots.

    Only defined for the rank-3 family.  The parameter pairs are read
    off the stored ascending root triples as t1 = (big C, mid C),
    t2 = (big Y, mid Y), t3 = (small R, mid R); the six products below
    then reproduce the corresponding central monomials exactly, and the
    stored root triples regenerate from the pairs (round trip).
    """
    if pres.family != "e6":
        raise ValueError("parameter inversion applies to the e6 family only")
    torus = pres.torus
    (c_small, c_mid, c_big) = pres.hecke_parameters[0]
    (y_small, y_mid, y_big) = pres.hecke_parameters[1]
    (r_small, r_mid, r_big) = pres.hecke_parameters[2]
    t1 = (c_big, c_mid)
    t2 = (y_big, y_mid)
    t3 = (r_small, r_mid)

    one = Fraction(1)
    identities = (
        ("C1*Y3^-1", _word(torus, ("C1", one), ("Y3", -one)),
         t1[1] * (t2[0] * t2[1] * t3[0] * t3[1]).inverse()),
        ("C2*Y3", _word(torus, ("C2", one), ("Y3", one)),
         t1[0] * t2[1] * t3[1]),
        ("Y1*Y3", _word(torus, ("Y1", one), ("Y3", one)),
         t2[0] * t2[1] * t2[1]),
        ("Y2*Y3^-1", _word(torus, ("Y2", one), ("Y3", -one)),
         (t1[0] * t2[1] * t3[0]).inverse()),
        ("C3*Y3", _word(torus, ("C3", one), ("Y3", one)),
         t1[0] * t1[1] * t2[0] * t2[1] * t3[0] * t3[1]),
        ("T*B", _word(torus, ("t:111", one), ("b:111", one)),
         (t1[1] * t2[1] * t3[1]).inverse()),
    )

    checks: list[dict] = []
    for name, lhs, rhs in identities:
        checks.append({"name": f"central:{name}", "passed": is_central(lhs)})
        checks.append({"name": f"inversion:{name}", "passed": lhs == rhs})

    # ascending order: the derived third root is the smallest for the C/Y
    # pairs (big, mid) but the largest for the R pair (small, mid)
    regenerated = (
        ((t1[0] * t1[1]).inverse(), t1[1], t1[0]),
        ((t2[0] * t2[1]).inverse(), t2[1], t2[0]),
        (t3[0], t3[1], (t3[0] * t3[1]).inverse()),
    )
    round_trip = all(
        got == want
        for gots, wants in zip(regenerated, pres.hecke_parameters)
        for got, want in zip(gots, wants))
    checks.append({"name": "round-trip", "passed": round_trip})

    return {
        "family": pres.family,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def presentation_to_json(pres: GdahaPresentation) -> dict:
    """Serializable snapshot of the generators and their Hecke data."""
    return {
        "family": pres.family,
        "names": list(pres.names),
        "cyclic_qexp": str(pres.cyclic_qexp),
        "torus": torus_to_json(pres.torus),
        "generators": [
            [[mat.entry(i, j).to_json() for j in range(mat.ncols)]
             for i in range(mat.nrows)]
            for mat in pres.generators
        ],
        "hecke_parameters": [
            [p.to_json() for p in params]
            for params in pres.hecke_parameters
        ],
    }
