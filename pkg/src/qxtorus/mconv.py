"""Convolution pipeline from the rank-2 loop triple to a rank-3 triple.

The three hole loops of the rank-2 family are rescaled to matrices with
integer exponents, stacked into 6x6 block convolution matrices, and then
projected onto the rank-1 eigenmodules of the non-unit eigenvalue.  The
projection is encoded by a 3x3 coefficient matrix whose rows assemble
into pseudo-reflections; a diagonal conjugation clears all denominators,
the product of the conjugated triple factors through a unitriangular /
lower-triangular pair, and a final central rescaling produces a triple
satisfying cubic minimal polynomials with central roots.

Denominators only ever come from central elements (the eigenvalue gaps
1 - t^2 and the conjugator), so the whole computation runs over a ring
of fractions with central denominators; exactness is preserved at every
stage and each identity is machine-checked.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .gdaha import build_d4
from .ncmat import (NCMatrix, PseudoReflectionTriple, TorusRing, hecke_check,
                    invert_triangular, killing_factorize, reflection_from_row)
from .qtorus import Torus, TorusElement

__all__ = [
    "CentralFraction",
    "CentralFractionRing",
    "ConvolutionState",
    "build_state",
    "convolution_C",
    "divide_central",
    "divide_right",
    "eigenbasis",
    "functor_output",
    "idempotent",
    "restricted_triple",
    "rescale_d4",
    "unit_eigenbasis",
    "verify_functor",
]

_F0 = Fraction(0)
_HALF = Fraction(1, 2)
_THIRD = Fraction(1, 3)


# ---------------------------------------------------------------------------
# Fractions with central denominators
# ---------------------------------------------------------------------------

def _qp_divide(num: dict, den: dict) -> dict | None:
    """Exact division of Laurent polynomials in q; None if not exact."""
    if not num:
        return {}
    rem = dict(num)
    eb = max(den)
    cb = den[eb]
    low = min(num) - min(den)
    out: dict = {}
    while rem:
        ea = max(rem)
        e = ea - eb
        if e < low:
            return None
        c = rem[ea] / cb
        out[e] = c
        for e2, c2 in den.items():
            k = e + e2
            v = rem.get(k, _F0) - c * c2
            if v:
                rem[k] = v
            else:
                rem.pop(k, None)
    return out


def divide_right(x: TorusElement, d: TorusElement) -> TorusElement | None:
    """y with y*d == x when the right division is exact, else None.

    Works for an arbitrary nonzero divisor.  Leading terms are peeled in
    monomial-lexicographic order; the reordering q-power of each peeled
    term is accounted for through the merge exponent.
    """
    if d.is_zero():
        raise ZeroDivisionError("division by zero element")
    torus = x.torus
    if x.is_zero():
        return torus.zero()
    md = max(d.terms)
    pd = d.terms[md]
    # an exact quotient cannot reach below the difference of the two
    # lexicographic minima; the iteration cap backstops the lex bound
    low = tuple(a - b for a, b in zip(min(x.terms), min(d.terms)))
    quot: dict = {}
    r = x
    guard = 0
    while not r.is_zero():
        guard += 1
        if guard > 100000:
            return None
        mr = max(r.terms)
        pr = r.terms[mr]
        mq = tuple(a - b for a, b in zip(mr, md))
        if mq < low:
            return None
        shift = torus.phi(mq, md)
        pq = _qp_divide(pr, {e + shift: c for e, c in pd.items()})
        if pq is None:
            return None
        quot[mq] = pq
        r = r - TorusElement(torus, {mq: pq}) * d
    return TorusElement(torus, quot)


def divide_central(x: TorusElement, d: TorusElement) -> TorusElement | None:
    """y with y*d == x when the division is exact, else None.

    Intended for central d, which makes the right quotient two-sided;
    callers that divide by non-central elements should use divide_right
    and mind the side.
    """
    return divide_right(x, d)


class CentralFraction:
    """x * d^{-1} for a central denominator d.

    Central denominators commute with everything, so left and right
    division agree and fractions multiply componentwise.  Single-term
    denominators are folded into the numerator on construction.
    """

    __slots__ = ("numer", "denom")

    def __init__(self, numer: TorusElement, denom: TorusElement | None = None):
        if denom is None:
            denom = numer.torus.one()
        else:
            if denom.is_zero():
                raise ZeroDivisionError("zero denominator")
            if not denom.is_central():
                raise ValueError(f"denominator is not central: {denom}")
            if denom.is_single_term():
                numer = numer * denom.inverse()
                denom = numer.torus.one()
        self.numer = numer
        self.denom = denom

    # -- helpers ------------------------------------------------------------

    def _wrap(self, other) -> "CentralFraction":
        if isinstance(other, CentralFraction):
            return other
        if isinstance(other, TorusElement):
            return CentralFraction(other)
        if isinstance(other, (int, Fraction)):
            return CentralFraction(self.numer.torus.scalar(other))
        return NotImplemented

    def is_zero(self) -> bool:
        return self.numer.is_zero()

    def is_polynomial(self) -> bool:
        return self.denom == self.numer.torus.one()

    def reduce(self) -> "CentralFraction":
        """Cancel the denominator when the division is exact."""
        if self.is_polynomial():
            return self
        q = divide_central(self.numer, self.denom)
        if q is None:
            return self
        return CentralFraction(q)

    def inverse(self) -> "CentralFraction":
        if self.numer.is_single_term():
            return CentralFraction(self.denom * self.numer.inverse())
        if self.numer.is_central() and not self.numer.is_zero():
            return CentralFraction(self.denom, self.numer)
        raise ValueError("fraction is not invertible in this ring")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        if self.denom == other.denom:
            return CentralFraction(self.numer + other.numer, self.denom)
        return CentralFraction(self.numer * other.denom
                               + other.numer * self.denom,
                               self.denom * other.denom)

    __radd__ = __add__

    def __neg__(self):
        return CentralFraction(-self.numer, self.denom)

    def __sub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        # the central denominator of the left factor commutes past the
        # right numerator, so fractions multiply componentwise
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return CentralFraction(self.numer * other.numer,
                               self.denom * other.denom)

    def __rmul__(self, other):
        # central denominators commute, only the numerator order matters
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        return CentralFraction(other.numer * self.numer,
                               other.denom * self.denom)

    def __eq__(self, other) -> bool:
        other = self._wrap(other)
        if other is NotImplemented:
            return NotImplemented
        if self.denom == other.denom:
            return self.numer == other.numer
        return self.numer * other.denom == other.numer * self.denom

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __repr__(self) -> str:
        if self.is_polynomial():
            return repr(self.numer)
        return f"({self.numer}) / ({self.denom})"


class CentralFractionRing:
    """Ring adapter for matrices over central-denominator fractions."""

    __slots__ = ("torus",)

    def __init__(self, torus: Torus):
        self.torus = torus

    @property
    def zero(self) -> CentralFraction:
        return CentralFraction(self.torus.zero())

    @property
    def one(self) -> CentralFraction:
        return CentralFraction(self.torus.one())

    def is_zero(self, x: CentralFraction) -> bool:
        return x.is_zero()

    def invert(self, x: CentralFraction) -> CentralFraction:
        return x.inverse()

    def is_central(self, x: CentralFraction) -> bool:
        return x.numer.is_central()

    def coerce(self, c) -> CentralFraction:
        if isinstance(c, CentralFraction):
            return c
        if isinstance(c, TorusElement):
            return CentralFraction(c)
        return CentralFraction(self.torus.scalar(c))

    def fraction(self, numer: TorusElement, denom: TorusElement) -> CentralFraction:
        return CentralFraction(numer, denom)


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------

def rescale_d4(obar: NCMatrix, bbar: NCMatrix, gbar: NCMatrix) -> tuple:
    """Clear the half-exponent prefactor of each hole loop.

    Each loop is multiplied by the inverse square root of its central
    hole variable; the results have integer exponents only and satisfy
    (K - 1)(K - Z^{-1}) = 0 with the hole variable Z.
    """
    out = []
    for mat, name in ((obar, "O1"), (bbar, "B1"), (gbar, "G1")):
        scale = mat.ring.torus.gen(name).pow_frac(-_HALF)
        out.append(mat.scale_left(scale))
    return tuple(out)


def convolution_C(khat: Sequence[NCMatrix]) -> tuple:
    """Stack a matrix triple into the three block convolution matrices.

    Block row i of the i-th output holds (K_1 - 1, ..., K_i, ..., K_3 - 1);
    every other block row is an identity row.
    """
    ring = khat[0].ring
    d = khat[0].nrows
    ident = NCMatrix.identity(ring, d)
    out = []
    for i in range(3):
        rows = []
        for br in range(3):
            for r in range(d):
                row = []
                for bc in range(3):
                    blk = None
                    if br == i:
                        blk = khat[bc] if bc == i else khat[bc] - ident
                    elif br == bc:
                        blk = ident
                    for c in range(d):
                        row.append(blk.entry(r, c) if blk is not None
                                   else ring.zero)
                rows.append(row)
        out.append(NCMatrix(ring, rows))
    return tuple(out)


def idempotent(khat: NCMatrix, t_sq: TorusElement,
               fractions: CentralFractionRing | None = None) -> NCMatrix:
    """Projector onto the non-unit eigenmodule: t^2/(1-t^2) * (K - 1)."""
    torus = t_sq.torus
    if t_sq == torus.one():
        raise ValueError("eigenvalues coincide: t^2 = 1")
    fr = fractions if fractions is not None else CentralFractionRing(torus)
    km = khat if isinstance(khat.ring, CentralFractionRing) \
        else khat.map_entries(fr.coerce, fr)
    scalar = fr.fraction(t_sq, torus.one() - t_sq)
    return (km - NCMatrix.identity(fr, km.nrows)).scale_left(scalar)


def _column(fr: CentralFractionRing, entries: Sequence) -> NCMatrix:
    return NCMatrix.column(fr, [fr.coerce(e) for e in entries])


def _check_eigen(khat: NCMatrix, v: NCMatrix, value: CentralFraction,
                 what: str) -> None:
    # right-module convention: the eigenvalue multiplies from the right
    if not khat * v == v.scale_right(value):
        raise ValueError(f"{what} generator fails its eigen-equation")


def eigenbasis(khat: Sequence[NCMatrix],
               fractions: CentralFractionRing) -> tuple:
    """Rank-1 generators of the non-unit eigenmodules, verified."""
    t = fractions.torus
    one = t.one()
    cols = (
        _column(fractions, [t.gen("O2", -1), one]),
        _column(fractions, [-one - t.gen("B2"), one]),
        _column(fractions, [-one, one + t.gen("G2", -1)]),
    )
    km = [m if isinstance(m.ring, CentralFractionRing)
          else m.map_entries(fractions.coerce, fractions) for m in khat]
    for i, (m, v, name) in enumerate(zip(km, cols, ("O1", "B1", "G1"))):
        _check_eigen(m, v, fractions.coerce(t.gen(name, -1)),
                     f"eigenmodule {i + 1}")
    return cols


def unit_eigenbasis(khat: Sequence[NCMatrix],
                    fractions: CentralFractionRing) -> tuple:
    """Rank-1 generators of the fixed (eigenvalue 1) modules, verified."""
    t = fractions.torus
    one = t.one()
    cols = (
        _column(fractions, [t.monomial({"O1": -1, "O2": -1}), one]),
        _column(fractions, [-one - t.gen("B1") * t.gen("B2"), one]),
        _column(fractions, [one, -one - t.monomial({"G1": -1, "G2": -1})]),
    )
    km = [m if isinstance(m.ring, CentralFractionRing)
          else m.map_entries(fractions.coerce, fractions) for m in khat]
    for i, (m, v) in enumerate(zip(km, cols)):
        _check_eigen(m, v, fractions.one, f"fixed module {i + 1}")
    return cols


def _module_coefficient(v: NCMatrix, u: NCMatrix) -> CentralFraction:
    """s with u = v*s in the rank-1 right module generated by v."""
    for k in range(v.nrows):
        piv = v.entry(k, 0)
        try:
            inv = piv.inverse()
        except ValueError:
            continue
        s = inv * u.entry(k, 0)
        if all(u.entry(m, 0) == v.entry(m, 0) * s for m in range(v.nrows)):
            return s
        raise ValueError("column does not lie in the rank-1 module")
    raise ValueError("no invertible pivot in the module generator")


def restricted_triple(khat: Sequence[NCMatrix], idempotents: Sequence[NCMatrix],
                      eigen: Sequence[NCMatrix], t_sq: Sequence[TorusElement],
                      fractions: CentralFractionRing):
    """Express the convolution matrices over the three eigen-generators.

    Returns the pseudo-reflection triple and its coefficient matrix A:
    row i of A is the distinguished row of the i-th reflection, with
    A_ii the non-unit eigenvalue and A_ij solving e_i (K_j - 1) v_j
    = v_i A_ij in the right module generated by v_i.
    """
    km = [m if isinstance(m.ring, CentralFractionRing)
          else m.map_entries(fractions.coerce, fractions) for m in khat]
    ident = NCMatrix.identity(fractions, km[0].nrows)
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            if i == j:
                row.append(fractions.coerce(t_sq[i].inverse()))
            else:
                u = idempotents[i] * ((km[j] - ident) * eigen[j])
                row.append(_module_coefficient(eigen[i], u))
        rows.append(row)
    a = NCMatrix(fractions, rows)
    triple = PseudoReflectionTriple(
        *(reflection_from_row(fractions, i, a.rows[i]) for i in range(3)))
    return triple, a


def _conjugator(fractions: CentralFractionRing):
    """The denominator-clearing diagonal and its inverse, as fractions."""
    t = fractions.torus
    one = t.one()
    q1 = t.q_power(1)
    pairs = (
        ((one - t.gen("O1", -1)) * t.gen("O2", -1),
         fractions.fraction(t.gen("O2"), one - t.gen("O1", -1))),
        (-(one - t.gen("B1", -1)) * t.gen("B2"),
         fractions.fraction(-t.gen("B2", -1), one - t.gen("B1", -1))),
        (-q1 * (one - t.gen("G1", -1)) * t.gen("B2"),
         fractions.fraction(-t.q_power(-1) * t.gen("B2", -1),
                            one - t.gen("G1", -1))),
    )
    conj = tuple(fractions.coerce(c) for c, _ in pairs)
    inv = tuple(ci for _, ci in pairs)
    for c, ci in zip(conj, inv):
        if not c * ci == fractions.one:
            raise AssertionError("conjugator inverse pair failed")
    return conj, inv


def _conjugate_reduce(triple: PseudoReflectionTriple, conj, inv,
                      ring: TorusRing) -> PseudoReflectionTriple:
    """Conjugate by the diagonal and clear all denominators exactly."""
    out = []
    for r in triple.matrices:
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                e = (conj[i] * r.entry(i, j) * inv[j]).reduce()
                if not e.is_polynomial():
                    raise ValueError(
                        f"conjugated entry ({i + 1},{j + 1}) kept a "
                        f"denominator: {e}")
                row.append(e.numer)
            rows.append(row)
        out.append(NCMatrix(ring, rows))
    return PseudoReflectionTriple(*out)


def _word(torus: Torus, *factors) -> TorusElement:
    acc = torus.one()
    for name, e in factors:
        acc = acc * torus.gen(name).pow_frac(Fraction(e))
    return acc


def _lhat_parameters(torus: Torus) -> tuple:
    t3 = _THIRD
    return (
        _word(torus, ("O1", -2 * t3), ("B1", t3), ("G1", t3)),
        _word(torus, ("O1", t3), ("B1", -2 * t3), ("G1", t3)),
        _word(torus, ("O1", t3), ("B1", t3), ("G1", -2 * t3)),
    )


def _pihat_parameters(torus: Torus) -> tuple:
    t3 = _THIRD
    return (
        torus.q_power(-2 * t3) * _word(torus, ("O1", -t3), ("B1", -t3),
                                       ("G1", -t3)),
        torus.q_power(4 * t3) * _word(torus, ("O1", 2 * t3), ("B1", 2 * t3),
                                      ("G1", 2 * t3), ("O2", 1), ("B2", 1),
                                      ("G2", 1)),
        torus.q_power(4 * t3) * _word(torus, ("O1", -t3), ("B1", -t3),
                                      ("G1", -t3), ("O2", -1), ("B2", -1),
                                      ("G2", -1)),
    )


@dataclass(frozen=True)
class ConvolutionState:
    """All intermediate data of the convolution pipeline."""

    torus: Torus
    ring: TorusRing
    fractions: CentralFractionRing
    khat: tuple
    khat4: NCMatrix
    t_squares: tuple
    t4: TorusElement
    idempotents: tuple
    eigen: tuple
    unit_eigen: tuple
    a_matrix: NCMatrix
    reflections: PseudoReflectionTriple
    conjugator: tuple
    conjugator_inverse: tuple
    conjugated: PseudoReflectionTriple
    u: NCMatrix
    low: NCMatrix
    pi: NCMatrix
    lhat: NCMatrix
    pihat: NCMatrix
    lhat_parameters: tuple
    pihat_parameters: tuple


def functor_output(state: "ConvolutionState") -> tuple:
    """(unitriangular factor, rescaled lower factor, rescaled inverse)."""
    return state.u, state.lhat, state.pihat


@functools.lru_cache(maxsize=1)
def build_state() -> ConvolutionState:
    pres = build_d4()
    # sixth roots: halves rescale the loops, thirds rescale the factors
    torus = pres.torus.root_extend(3)
    ring = TorusRing(torus)
    fractions = CentralFractionRing(torus)

    def lift(name: str) -> NCMatrix:
        return pres.generator(name).map_entries(torus.include, ring)

    obar, bbar, gbar, pbar = (lift(n) for n in "OBGP")
    khat = rescale_d4(obar, bbar, gbar)
    t123 = _word(torus, ("O1", _HALF), ("B1", _HALF), ("G1", _HALF))
    khat4 = pbar.scale_left(t123)
    t_squares = tuple(torus.gen(n) for n in ("O1", "B1", "G1"))
    # the larger minimal-polynomial root of khat4 is t123 * t4; the
    # extra central half-power commutes freely, so t4 is the loop root
    t4 = torus.include(pres.hecke_parameters[3][0])

    idem = tuple(idempotent(k, t, fractions)
                 for k, t in zip(khat, t_squares))
    eigen = eigenbasis(khat, fractions)
    unit = unit_eigenbasis(khat, fractions)
    reflections, a = restricted_triple(khat, idem, eigen, t_squares, fractions)
    conj, inv = _conjugator(fractions)
    conjugated = _conjugate_reduce(reflections, conj, inv, ring)

    u, low = killing_factorize(conjugated)
    pi = invert_triangular(low, side="lower") * invert_triangular(u, side="upper")
    scale = _word(torus, ("O1", _THIRD), ("B1", _THIRD), ("G1", _THIRD))
    lhat = low.scale_left(scale)
    pihat = pi.scale_left(torus.q_power(Fraction(-2, 3)) * scale.inverse())

    return ConvolutionState(
        torus=torus, ring=ring, fractions=fractions,
        khat=khat, khat4=khat4, t_squares=t_squares, t4=t4,
        idempotents=idem, eigen=eigen, unit_eigen=unit,
        a_matrix=a, reflections=reflections,
        conjugator=conj, conjugator_inverse=inv, conjugated=conjugated,
        u=u, low=low, pi=pi, lhat=lhat, pihat=pihat,
        lhat_parameters=_lhat_parameters(torus),
        pihat_parameters=_pihat_parameters(torus),
    )


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _specialized_third_parameters(state: ConvolutionState) -> tuple:
    """Cubic roots of the inverse factor induced from the rank-2 data.

    With the abstract deformation parameter equal to the square of the
    torus q, the pattern is (q^-2/3 P^-2/3, q^1/3 P^1/3 t4,
    q^1/3 P^1/3 / t4) for P the product of the three square roots.
    """
    torus = state.torus
    p = _word(torus, ("O1", _HALF), ("B1", _HALF), ("G1", _HALF))
    q13 = torus.q_power(_THIRD)
    return (
        torus.q_power(Fraction(-2, 3)) * p.pow_frac(Fraction(-2, 3)),
        q13 * p.pow_frac(_THIRD) * state.t4,
        q13 * p.pow_frac(_THIRD) * state.t4.inverse(),
    )


def verify_functor(state: ConvolutionState | None = None,
                   negative_control: bool = True) -> dict:
    """Machine-check every identity of the convolution pipeline."""
    if state is None:
        state = build_state()
    torus, ring = state.torus, state.ring
    fr = state.fractions
    checks: list[dict] = []

    def record(name: str, passed: bool) -> None:
        checks.append({"name": name, "passed": bool(passed)})

    one2 = NCMatrix.identity(ring, 2)
    for i, (k, t) in enumerate(zip(state.khat, state.t_squares), start=1):
        prod = (k - one2) * (k - one2.scale_right(t.inverse()))
        record(f"quadratic:K{i}", prod.is_zero())
        prod = (k - one2.scale_right(t.inverse())) * (k - one2)
        record(f"quadratic:K{i}:reversed", prod.is_zero())
    t123 = _word(torus, ("O1", _HALF), ("B1", _HALF), ("G1", _HALF))
    p4 = (t123 * state.t4, t123 * state.t4.inverse())
    record("quadratic:K4", hecke_check(state.khat4, p4))
    cyc = state.khat[0] * state.khat[1] * state.khat[2] * state.khat4
    record("cyclic:K", cyc == one2.scale_left(torus.q_power(-1)))

    onef = NCMatrix.identity(fr, 2)
    for i, (e, k, t) in enumerate(zip(state.idempotents, state.khat,
                                      state.t_squares), start=1):
        kf = k.map_entries(fr.coerce, fr)
        record(f"idempotent:e{i}", e * e == e)
        record(f"projection:e{i}",
               kf * e == e.scale_left(fr.coerce(t.inverse())))
        comp = onef - e
        record(f"complement:e{i}",
               (e * comp).is_zero() and (comp * e).is_zero())
        record(f"span:e{i}", e * state.eigen[i - 1] == state.eigen[i - 1])

    n_blocks = convolution_C(tuple(k.map_entries(fr.coerce, fr)
                                   for k in state.khat))
    for i, w in enumerate(state.unit_eigen, start=1):
        col = NCMatrix.column(fr, [
            w.entry(r, 0) if b == i - 1 else fr.zero
            for b in range(3) for r in range(2)])
        record(f"fixed-space:N{i}",
               all(n * col == col for n in n_blocks))

    prod = state.conjugated.product()
    record("factorization", state.u * state.low == prod)
    nil = state.u - NCMatrix.identity(ring, 3)
    record("unipotent-cubic", (nil * (nil * nil)).is_zero())
    record("lower-cubic",
           hecke_check(state.low, tuple(t.inverse()
                                        for t in state.t_squares)))
    record("rescaled-lower-cubic",
           hecke_check(state.lhat, state.lhat_parameters))
    record("rescaled-lower-cubic:reversed",
           hecke_check(state.lhat, tuple(reversed(state.lhat_parameters))))
    record("rescaled-inverse-cubic",
           hecke_check(state.pihat, state.pihat_parameters))
    record("rescaled-inverse-cubic:reversed",
           hecke_check(state.pihat, tuple(reversed(state.pihat_parameters))))
    cyc = state.u * (state.lhat * state.pihat)
    record("cyclic:ULP",
           cyc == NCMatrix.identity(ring, 3).scale_left(
               torus.q_power(Fraction(-2, 3))))

    spec3 = _specialized_third_parameters(state)
    record("parameter-match:lower", all(
        a == b for a, b in zip(state.lhat_parameters,
                               _lhat_parameters(torus))))
    record("parameter-match:inverse", all(
        a == b for a, b in zip(state.pihat_parameters, spec3)))

    passed = all(c["passed"] for c in checks)
    if negative_control:
        rows = [list(r) for r in state.u.rows]
        rows[0][0] = rows[0][0] + torus.one()
        bad = NCMatrix(ring, rows) - NCMatrix.identity(ring, 3)
        control = not (bad * (bad * bad)).is_zero()
        checks.append({"name": "negative-control", "passed": control})
        passed = passed and control
    return {"pipeline": "middle-convolution", "checks": checks,
            "passed": passed}
