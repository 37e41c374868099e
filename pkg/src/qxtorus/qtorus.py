"""Exact arithmetic in quantum X-tori and their root extensions.

A quiver with half-integer arrow weights encodes the q-commutation
Z_b Z_a = q^(-2 w_ab) Z_a Z_b between generators.  Elements are finite
sums of fractional-exponent monomials with Laurent-polynomial-in-q
coefficients, kept in a canonical normal form: within each monomial the
variables appear in the global (lexicographic) vertex order and every
reordering q-factor is absorbed into the coefficient.  All arithmetic is
over exact rationals; there is no floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

RatLike = int | str | Fraction

_F0 = Fraction(0)
_F1 = Fraction(1)


def rat(x: RatLike) -> Fraction:
    """Coerce an int / string / Fraction into an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


# ---------------------------------------------------------------------------
# QPowerPoly: Laurent polynomials in fractional powers of q.
# Stored as plain dicts {exponent: coefficient}; helpers below keep the
# no-zero-coefficients invariant.  Exponents and coefficients are Fractions.
# ---------------------------------------------------------------------------

QPowerPoly = dict

def qp_single(qexp: Fraction, coeff: Fraction) -> QPowerPoly:
    if coeff == 0:
        return {}
    return {qexp: coeff}


def qp_iadd(acc: QPowerPoly, other: QPowerPoly, shift: Fraction = _F0, scale: Fraction = _F1) -> None:
    """In-place acc += scale * q^shift * other."""
    for e, c in other.items():
        k = e + shift
        v = acc.get(k, _F0) + c * scale
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)


def qp_mul(p: QPowerPoly, r: QPowerPoly, shift: Fraction = _F0) -> QPowerPoly:
    """q^shift * p * r."""
    out: QPowerPoly = {}
    for ea, ca in p.items():
        base = ea + shift
        for eb, cb in r.items():
            k = base + eb
            v = out.get(k, _F0) + ca * cb
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    return out


def qp_neg(p: QPowerPoly) -> QPowerPoly:
    return {e: -c for e, c in p.items()}


def qp_qinvert(p: QPowerPoly) -> QPowerPoly:
    """Substitute q -> 1/q."""
    return {-e: c for e, c in p.items()}


# ---------------------------------------------------------------------------
# Quiver
# ---------------------------------------------------------------------------

class Quiver:
    """Named vertices, frozen flags, and a skew half-integer weight map.

    An arrow a -> b of weight w (1 for a solid arrow, 1/2 for a dashed
    one, summed over parallel arrows) sets w_ab = w = -w_ba.  Weights are
    stored doubled, as integers, to keep exactness.
    """

    __slots__ = ("names", "frozen", "_w2")

    def __init__(self, vertices: Iterable[str],
                 arrows: Iterable[tuple[str, str, RatLike]] = (),
                 frozen: Iterable[str] = ()):
        self.names: tuple[str, ...] = tuple(vertices)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate vertex names")
        self.frozen: frozenset[str] = frozenset(frozen)
        bad = self.frozen - set(self.names)
        if bad:
            raise ValueError(f"frozen flags for unknown vertices: {sorted(bad)}")
        self._w2: dict[tuple[str, str], int] = {}
        for a, b, w in arrows:
            self.add_arrow(a, b, w)

    def add_arrow(self, a: str, b: str, w: RatLike) -> None:
        if a not in self.names or b not in self.names:
            raise ValueError(f"arrow endpoints {a!r}->{b!r} not among vertices")
        if a == b:
            raise ValueError(f"self-arrow at {a!r} not allowed")
        w2 = rat(w) * 2
        if w2.denominator != 1:
            raise ValueError(f"arrow weight {w} is not a half-integer")
        w2 = int(w2)
        key, sgn = ((a, b), 1) if a < b else ((b, a), -1)
        tot = self._w2.get(key, 0) + sgn * w2
        if tot:
            self._w2[key] = tot
        else:
            self._w2.pop(key, None)

    def weight2(self, a: str, b: str) -> int:
        """2*w_ab as an integer."""
        if a == b:
            return 0
        if a < b:
            return self._w2.get((a, b), 0)
        return -self._w2.get((b, a), 0)

    def weight(self, a: str, b: str) -> Fraction:
        return Fraction(self.weight2(a, b), 2)

    def arrows(self) -> Iterator[tuple[str, str, Fraction]]:
        """All arrows in positive orientation, deterministic order."""
        for (a, b), w2 in sorted(self._w2.items()):
            if w2 > 0:
                yield a, b, Fraction(w2, 2)
            else:
                yield b, a, Fraction(-w2, 2)

    def degree_at(self, v: str) -> tuple[Fraction, Fraction]:
        """(in-degree, out-degree) of v, counted with weights."""
        indeg = Fraction(0)
        outdeg = Fraction(0)
        for a, b, w in self.arrows():
            if b == v:
                indeg += w
            if a == v:
                outdeg += w
        return indeg, outdeg

    def reversed(self) -> "Quiver":
        q = Quiver(self.names, frozen=self.frozen)
        q._w2 = {k: -v for k, v in self._w2.items()}
        return q

    def without_vertex(self, v: str) -> "Quiver":
        names = tuple(n for n in self.names if n != v)
        q = Quiver(names, frozen=self.frozen - {v})
        q._w2 = {k: w for k, w in self._w2.items() if v not in k}
        return q

    def same_weights(self, other: "Quiver") -> bool:
        return set(self.names) == set(other.names) and self._w2 == other._w2

    def __repr__(self) -> str:
        arr = ", ".join(f"{a}->{b}:{w}" for a, b, w in self.arrows())
        return f"Quiver({list(self.names)}, [{arr}])"


# ---------------------------------------------------------------------------
# Torus
# ---------------------------------------------------------------------------

class Torus:
    """A quantum X-torus: quiver plus declared root order.

    Monomial exponents live in (1/root_order)*Z and are stored as integer
    multiples of 1/root_order.  The vertex order used for normal forms is
    lexicographic over names, independent of construction order.
    """

    __slots__ = ("quiver", "root_order", "names", "index", "_w2", "_pairs",
                 "_zero_mon", "_ncols")

    def __init__(self, quiver: Quiver, root_order: int = 1):
        if root_order < 1:
            raise ValueError("root order must be a positive integer")
        self.quiver = quiver
        self.root_order = root_order
        self.names: tuple[str, ...] = tuple(sorted(quiver.names))
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.names)}
        n = len(self.names)
        self._ncols = n
        self._w2 = [[0] * n for _ in range(n)]
        for i, a in enumerate(self.names):
            for j, b in enumerate(self.names):
                self._w2[i][j] = quiver.weight2(a, b)
        self._pairs = [(i, j, self._w2[i][j])
                       for i in range(n) for j in range(i + 1, n)
                       if self._w2[i][j]]
        self._zero_mon = (0,) * n

    # -- structural ---------------------------------------------------------

    def compatible(self, other: "Torus") -> bool:
        return (self.names == other.names and self._w2 == other._w2
                and self.root_order == other.root_order)

    def root_extend(self, k: int) -> "Torus":
        """Torus over the same quiver admitting k-times finer exponents."""
        if k < 1:
            raise ValueError("root extension factor must be positive")
        if k == 1:
            return self
        return Torus(self.quiver, self.root_order * k)

    # -- monomial bilinear forms -------------------------------------------
    # Internally monomials are tuples of integers scaled by root_order.

    def phi(self, e: Sequence[int], f: Sequence[int]) -> Fraction:
        """Reordering exponent: M(e)*M(f) = q^phi(e,f)*M(e+f).

        Sorting the concatenated word moves every e-factor at a higher
        vertex index past every f-factor at a lower one; each swap
        contributes -2 w_ij f_i e_j.
        """
        s = 0
        for i, j, w2 in self._pairs:
            fij = f[i]
            ej = e[j]
            if fij and ej:
                s += w2 * ej * fij
        return Fraction(-s, self.root_order * self.root_order)

    def comm_mon(self, e: Sequence[int], f: Sequence[int]) -> Fraction:
        """c with M(f)*M(e) = q^c * M(e)*M(f)."""
        return self.phi(f, e) - self.phi(e, f)

    def weyl_qexp(self, e: Sequence[int]) -> Fraction:
        """W with ord(Z^e) = q^W * M(e); depends only on the multidegree."""
        s = 0
        for i, j, w2 in self._pairs:
            if e[i] and e[j]:
                s += w2 * e[i] * e[j]
        return Fraction(-s, 2 * self.root_order * self.root_order)

    def _scale_exp(self, r: Fraction) -> int:
        v = r * self.root_order
        if v.denominator != 1:
            raise ValueError(
                f"exponent {r} not permitted at root order {self.root_order}")
        return int(v)

    def _mon_from_map(self, exps: Mapping[str, RatLike]) -> tuple[int, ...]:
        m = [0] * self._ncols
        for name, e in exps.items():
            try:
                i = self.index[name]
            except KeyError:
                raise ValueError(f"unknown vertex {name!r}") from None
            m[i] = self._scale_exp(rat(e))
        return tuple(m)

    def exponent_map(self, mon: Sequence[int]) -> dict[str, Fraction]:
        n = self.root_order
        return {self.names[i]: Fraction(mon[i], n)
                for i in range(self._ncols) if mon[i]}

    # -- element constructors ----------------------------------------------

    def zero(self) -> "TorusElement":
        return TorusElement(self, {})

    def one(self) -> "TorusElement":
        return TorusElement(self, {self._zero_mon: {_F0: _F1}})

    def q_power(self, r: RatLike, coeff: RatLike = 1) -> "TorusElement":
        c = rat(coeff)
        if c == 0:
            return self.zero()
        return TorusElement(self, {self._zero_mon: {rat(r): c}})

    def scalar(self, c: RatLike) -> "TorusElement":
        return self.q_power(0, c)

    def gen(self, name: str, e: RatLike = 1) -> "TorusElement":
        return self.monomial({name: e})

    def monomial(self, exps: Mapping[str, RatLike], qexp: RatLike = 0,
                 coeff: RatLike = 1) -> "TorusElement":
        """coeff * q^qexp * M(exps), with M given directly in normal form."""
        c = rat(coeff)
        if c == 0:
            return self.zero()
        return TorusElement(self, {self._mon_from_map(exps): {rat(qexp): c}})

    def from_terms(self, terms: Iterable[tuple[Mapping[str, RatLike], RatLike, RatLike]]) -> "TorusElement":
        """Sum of (exps, qexp, coeff) triples."""
        acc = self.zero()
        for exps, qexp, coeff in terms:
            acc = acc + self.monomial(exps, qexp, coeff)
        return acc

    def include(self, x: "TorusElement") -> "TorusElement":
        """Image of x (same quiver, coarser root order) in this torus."""
        if x.torus is self:
            return x
        if x.torus.names != self.names or x.torus._w2 != self._w2:
            raise ValueError("inclusion requires the same underlying quiver")
        if self.root_order % x.torus.root_order:
            raise ValueError("root order does not refine the element's")
        k = self.root_order // x.torus.root_order
        terms = {tuple(v * k for v in mon): dict(p) for mon, p in x.terms.items()}
        return TorusElement(self, terms)

    def __repr__(self) -> str:
        return f"Torus({len(self.names)} vertices, root_order={self.root_order})"


# ---------------------------------------------------------------------------
# TorusElement
# ---------------------------------------------------------------------------

class TorusElement:
    """A finite sum coeff_m(q) * M(m) in canonical normal form.

    Instances are immutable once constructed and may be shared freely.
    Equality is literal equality of normal forms.
    """

    __slots__ = ("torus", "terms")

    def __init__(self, torus: Torus, terms: dict):
        self.torus = torus
        self.terms = terms

    # -- basic queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(m == self.torus._zero_mon for m in self.terms)

    def is_single_term(self) -> bool:
        """Exactly one monomial with a one-term q-power coefficient."""
        if len(self.terms) != 1:
            return False
        p = next(iter(self.terms.values()))
        return len(p) == 1

    def single_term(self) -> tuple[tuple[int, ...], Fraction, Fraction]:
        """(monomial, qexp, coeff) of a single-term element."""
        if not self.is_single_term():
            raise ValueError(f"not a single-term element: {self}")
        mon, p = next(iter(self.terms.items()))
        qexp, coeff = next(iter(p.items()))
        return mon, qexp, coeff

    def monomials(self) -> list[tuple[int, ...]]:
        return sorted(self.terms)

    def coefficient(self, exps: Mapping[str, RatLike]) -> QPowerPoly:
        mon = self.torus._mon_from_map(exps)
        return dict(self.terms.get(mon, {}))

    def n_terms(self) -> int:
        return sum(len(p) for p in self.terms.values())

    def vertex_degree_range(self, name: str) -> tuple[Fraction, Fraction]:
        """(min, max) exponent of one vertex over the support; (0,0) if absent."""
        i = self.torus.index[name]
        if not self.terms:
            return _F0, _F0
        vals = [m[i] for m in self.terms]
        n = self.torus.root_order
        return Fraction(min(vals), n), Fraction(max(vals), n)

    # -- ring operations ----------------------------------------------------

    def _check_same(self, other: "TorusElement") -> None:
        if self.torus is not other.torus and not self.torus.compatible(other.torus):
            raise ValueError("elements live in different tori")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.torus.scalar(other)
        if not isinstance(other, TorusElement):
            return NotImplemented
        self._check_same(other)
        out = {m: dict(p) for m, p in self.terms.items()}
        for m, p in other.terms.items():
            acc = out.setdefault(m, {})
            qp_iadd(acc, p)
            if not acc:
                del out[m]
        return TorusElement(self.torus, out)

    __radd__ = __add__

    def __neg__(self):
        return TorusElement(self.torus,
                            {m: qp_neg(p) for m, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, TorusElement) else -rat(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = rat(other)
            if c == 0:
                return self.torus.zero()
            return TorusElement(self.torus, {
                m: {e: v * c for e, v in p.items()}
                for m, p in self.terms.items()})
        if not isinstance(other, TorusElement):
            return NotImplemented
        self._check_same(other)
        torus = self.torus
        out: dict = {}
        phi = torus.phi
        for e, p in self.terms.items():
            for f, r in other.terms.items():
                m = tuple(a + b for a, b in zip(e, f))
                acc = out.setdefault(m, {})
                qp_iadd(acc, qp_mul(p, r, phi(e, f)))
                if not acc:
                    del out[m]
        return TorusElement(torus, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("integer power expected; use pow_frac for roots")
        if k < 0:
            return self.inverse() ** (-k)
        result = self.torus.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def inverse(self) -> "TorusElement":
        """Inverse of an invertible (single-term) element."""
        mon, qexp, coeff = self.single_term()
        torus = self.torus
        inv_mon = tuple(-v for v in mon)
        return TorusElement(torus, {
            inv_mon: {-qexp + torus.phi(mon, mon): 1 / coeff}})

    def pow_frac(self, e: RatLike) -> "TorusElement":
        """Fractional power of a single-term element (consistent branch).

        (c q^r M(m))^e = c^e q^(r e + phi(m,m) e(e-1)/2) M(e m); the scalar
        root c^e must be exact.
        """
        e = rat(e)
        if e.denominator == 1:
            return self ** int(e)
        mon, qexp, coeff = self.single_term()
        torus = self.torus
        new_mon = []
        for v in mon:
            s = e * v
            if s.denominator != 1:
                raise ValueError(
                    f"power {e} leaves the declared root order {torus.root_order}")
            new_mon.append(int(s))
        c = _exact_rat_pow(coeff, e)
        s = qexp * e + torus.phi(mon, mon) * e * (e - 1) / 2
        return TorusElement(torus, {tuple(new_mon): {s: c}})

    def root(self, k: int) -> "TorusElement":
        return self.pow_frac(Fraction(1, k))

    # -- structure maps -----------------------------------------------------

    def is_central(self) -> bool:
        """True iff the element commutes with every generator."""
        torus = self.torus
        w2 = torus._w2
        ncols = torus._ncols
        for mon in self.terms:
            for i in range(ncols):
                row = w2[i]
                if sum(row[j] * mon[j] for j in range(ncols) if mon[j]):
                    return False
        return True

    def q_invert(self) -> "TorusElement":
        """Coefficientwise q -> 1/q (an isomorphism onto the reversed-quiver torus)."""
        return TorusElement(self.torus,
                            {m: qp_qinvert(p) for m, p in self.terms.items()})

    def graded_by_vertex(self, name: str) -> dict[Fraction, "TorusElement"]:
        """Split into homogeneous layers by one vertex's exponent."""
        i = self.torus.index[name]
        n = self.torus.root_order
        layers: dict[Fraction, dict] = {}
        for m, p in self.terms.items():
            layers.setdefault(Fraction(m[i], n), {})[m] = dict(p)
        return {d: TorusElement(self.torus, t) for d, t in layers.items()}

    # -- comparison / output -------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.torus.scalar(other)
        if not isinstance(other, TorusElement):
            return NotImplemented
        return self.terms == other.terms

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        return hash(frozenset(
            (m, frozenset(p.items())) for m, p in self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        torus = self.torus
        n = torus.root_order
        parts = []
        for m in sorted(self.terms):
            p = self.terms[m]
            coeff = "+".join(_fmt_qterm(e, c) for e, c in sorted(p.items()))
            if len(p) > 1:
                coeff = f"({coeff})"
            body = "*".join(
                f"{torus.names[i]}^({Fraction(m[i], n)})"
                for i in range(len(m)) if m[i])
            parts.append(coeff + ("*" + body if body else ""))
        return " + ".join(parts)

    def to_json(self) -> list:
        out = []
        for m in sorted(self.terms):
            p = self.terms[m]
            out.append({
                "coeff": [{"qexp": str(e), "c": str(c)}
                          for e, c in sorted(p.items())],
                "monomial": {k: str(v)
                             for k, v in sorted(self.torus.exponent_map(m).items())},
            })
        return out


def _fmt_qterm(e: Fraction, c: Fraction) -> str:
    if e == 0:
        return str(c)
    q = f"q^({e})"
    if c == 1:
        return q
    if c == -1:
        return "-" + q
    return f"{c}*{q}"


def _exact_rat_pow(c: Fraction, e: Fraction) -> Fraction:
    """c**e when the result is an exact rational; raises otherwise."""
    if e.denominator == 1:
        return c ** int(e)
    if c == 1:
        return _F1
    if c < 0:
        raise ValueError(f"no exact rational root: ({c})^({e})")
    num = _exact_int_root(c.numerator, e.denominator)
    den = _exact_int_root(c.denominator, e.denominator)
    if num is None or den is None:
        raise ValueError(f"no exact rational root: ({c})^({e})")
    return Fraction(num, den) ** e.numerator


def _exact_int_root(v: int, k: int) -> int | None:
    r = round(v ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == v:
            return cand
    return None


# ---------------------------------------------------------------------------
# Module-level operation surface
# ---------------------------------------------------------------------------

def commutation_exponent(torus: Torus, a, b) -> Fraction:
    """c with b*a = q^c * a*b, for monomials a, b.

    Accepts single-term TorusElements or {vertex: exponent} mappings.
    One solid arrow alpha -> beta gives c(Z_alpha, Z_beta) = -2.
    """
    ea = _as_monomial(torus, a)
    eb = _as_monomial(torus, b)
    return torus.comm_mon(ea, eb)


def _as_monomial(torus: Torus, x) -> tuple[int, ...]:
    if isinstance(x, TorusElement):
        if x.torus is not torus and not x.torus.compatible(torus):
            raise ValueError("monomial from a different torus")
        if len(x.terms) != 1:
            raise ValueError("not a monomial")
        return next(iter(x.terms))
    if isinstance(x, Mapping):
        return torus._mon_from_map(x)
    raise TypeError(f"cannot read a monomial from {x!r}")


def multiply(x: TorusElement, y: TorusElement) -> TorusElement:
    return x * y


def weyl_order(torus: Torus, word: Sequence) -> TorusElement:
    """Weyl quantum ordering of a word of torus factors.

    The word is a sequence of (vertex, exponent) pairs or of single-term
    elements; the result q^W * (product in the given order) is invariant
    under permutations of the word and fixes single factors.
    """
    factors: list[TorusElement] = []
    for item in word:
        if isinstance(item, TorusElement):
            factors.append(item)
        else:
            name, e = item
            factors.append(torus.gen(name, e))
    if not factors:
        return torus.one()
    mons = []
    for f in factors:
        mon, qexp, coeff = f.single_term()
        if qexp != 0 or coeff != 1:
            raise ValueError("Weyl ordering expects bare monomial factors")
        mons.append(mon)
    w = _F0
    for j in range(len(mons)):
        for k in range(j + 1, len(mons)):
            w += torus.comm_mon(mons[j], mons[k])
    prod = factors[0]
    for f in factors[1:]:
        prod = prod * f
    return torus.q_power(w / 2) * prod


def is_central(x: TorusElement) -> bool:
    return x.is_central()


def root_extend(torus: Torus, n: int) -> Torus:
    return torus.root_extend(n)


# ---------------------------------------------------------------------------
# Substitution homomorphisms
# ---------------------------------------------------------------------------

def check_substitution(source: Torus, target: Torus,
                       images: Mapping[str, TorusElement]) -> None:
    """Verify a per-vertex assignment preserves all q-commutations.

    Each image must be a single-term element of the target; the offending
    pair is named on failure.
    """
    missing = [v for v in source.names if v not in images]
    if missing:
        raise ValueError(f"no image for vertices {missing}")
    mons = {}
    for v in source.names:
        img = images[v]
        if img.torus is not target and not img.torus.compatible(target):
            raise ValueError(f"image of {v!r} lives in the wrong torus")
        mon, _, coeff = img.single_term()
        if coeff == 0:
            raise ValueError(f"image of {v!r} is zero")
        mons[v] = mon
    names = source.names
    for i, va in enumerate(names):
        for vb in names[i + 1:]:
            c_src = source.comm_mon(source._mon_from_map({va: 1}),
                                    source._mon_from_map({vb: 1}))
            c_tgt = target.comm_mon(mons[va], mons[vb])
            if c_src != c_tgt:
                raise ValueError(
                    f"substitution breaks q-commutation on ({va!r}, {vb!r}): "
                    f"source exponent {c_src}, image exponent {c_tgt}")


def substitute(images: Mapping[str, TorusElement], x: TorusElement,
               target: Torus, check: bool = True) -> TorusElement:
    """Apply the algebra homomorphism defined by per-vertex images to x.

    Images must be single-term (scalar times monomial) elements of the
    target torus; fractional exponents in x are pushed through via exact
    monomial roots.
    """
    source = x.torus
    if check:
        check_substitution(source, target, images)
    cache: dict[tuple[int, Fraction], tuple[tuple[int, ...], Fraction, Fraction]] = {}
    n = source.root_order
    img_parts = [images[name].single_term() for name in source.names]
    out: dict = {}
    for mon, p in x.terms.items():
        acc_mon = target._zero_mon
        acc_q = _F0
        acc_c = _F1
        for i, mi in enumerate(mon):
            if not mi:
                continue
            e = Fraction(mi, n)
            key = (i, e)
            pow_term = cache.get(key)
            if pow_term is None:
                im, iq, ic = img_parts[i]
                pm = tuple(_int_frac(e * v) for v in im)
                pq = iq * e + target.phi(im, im) * e * (e - 1) / 2
                pc = _exact_rat_pow(ic, e)
                pow_term = (pm, pq, pc)
                cache[key] = pow_term
            pm, pq, pc = pow_term
            acc_q += pq + target.phi(acc_mon, pm)
            acc_c *= pc
            acc_mon = tuple(a + b for a, b in zip(acc_mon, pm))
        acc = out.setdefault(acc_mon, {})
        qp_iadd(acc, p, acc_q, acc_c)
        if not acc:
            del out[acc_mon]
    return TorusElement(target, out)


def _int_frac(v: Fraction) -> int:
    if v.denominator != 1:
        raise ValueError(f"image exponent {v} is not integral at this root order")
    return int(v)


def reexpress(x: TorusElement, images: Mapping[str, TorusElement],
              small: Torus) -> TorusElement:
    """Rewrite x through generator images, inverting a substitution.

    `images` sends each generator of `small` to a single-term element of
    x's torus, with every big-torus vertex occurring in at most one image
    (the amalgamation situation).  Fails loudly if x is not in the image
    subalgebra.
    """
    big = x.torus
    img_terms = {v: images[v].single_term() for v in small.names}
    owner: dict[int, tuple[str, int]] = {}
    for v, (mon, _, _) in img_terms.items():
        for i, mi in enumerate(mon):
            if mi:
                if i in owner:
                    raise ValueError(
                        f"vertex {big.names[i]!r} occurs in two images "
                        f"({owner[i][0]!r} and {v!r}); cannot invert")
                owner[i] = (v, mi)
    img_elems = {v: TorusElement(big, {m: {q: c}})
                 for v, (m, q, c) in img_terms.items()}
    out: dict = {}
    for mon, p in x.terms.items():
        fmap: dict[str, Fraction] = {}
        for i, mi in enumerate(mon):
            if not mi:
                continue
            if i not in owner:
                raise ValueError(
                    f"{big.names[i]!r} carries no amalgamated variable but "
                    f"appears in the element")
            v, ref = owner[i]
            f = Fraction(mi, ref)
            prev = fmap.get(v)
            if prev is None:
                fmap[v] = f
            elif prev != f:
                raise ValueError(
                    f"inconsistent exponents for amalgamated variable {v!r}")
        # consistency: the proposed small monomial must hit mon exactly
        cand = small.monomial(fmap)
        img = substitute(img_elems, cand, big, check=False)
        imon, iq, ic = img.single_term()
        if imon != mon:
            raise ValueError("exponent solve failed; element not in subalgebra")
        smon = next(iter(cand.terms))
        acc = out.setdefault(smon, {})
        qp_iadd(acc, p, -iq, 1 / ic)
        if not acc:
            out.pop(smon)
    return TorusElement(small, out)


# ---------------------------------------------------------------------------
# JSON round-trip for (quiver, root order)
# ---------------------------------------------------------------------------

def torus_to_json(torus: Torus) -> dict:
    q = torus.quiver
    return {
        "root_order": torus.root_order,
        "vertices": [{"name": n, "frozen": n in q.frozen}
                     for n in torus.names],
        "arrows": [{"from": a, "to": b, "weight": str(w)}
                   for a, b, w in q.arrows()],
    }


def torus_from_json(obj: Mapping) -> Torus:
    names = [v["name"] for v in obj["vertices"]]
    frozen = [v["name"] for v in obj["vertices"] if v.get("frozen")]
    arrows = [(a["from"], a["to"], rat(a["weight"])) for a in obj["arrows"]]
    return Torus(Quiver(names, arrows, frozen), int(obj.get("root_order", 1)))


def element_from_json(torus: Torus, data: Sequence[Mapping]) -> TorusElement:
    acc = torus.zero()
    for term in data:
        mono = {k: rat(v) for k, v in term["monomial"].items()}
        for cq in term["coeff"]:
            acc = acc + torus.monomial(mono, rat(cq["qexp"]), rat(cq["c"]))
    return acc
