"""Matrices over noncommutative kernel rings.

The same matrix code runs over torus elements, central-denominator
fractions, localized elements and polynomial operators; a ring adapter
only has to provide `zero`, `one`, `is_zero`, and (for triangular
inversion) `invert`.  Entry products keep the ordering induced by matrix
multiplication; nothing here assumes commutativity.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .qtorus import Torus, TorusElement


class TorusRing:
    """Ring adapter for TorusElement scalars."""

    __slots__ = ("torus",)

    def __init__(self, torus: Torus):
        self.torus = torus

    @property
    def zero(self):
        return self.torus.zero()

    @property
    def one(self):
        return self.torus.one()

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def invert(self, x):
        return x.inverse()

    def is_central(self, x) -> bool:
        return x.is_central()

    def coerce(self, c):
        if isinstance(c, TorusElement):
            return c
        return self.torus.scalar(c)


class NCMatrix:
    """A rectangular matrix over a kernel ring; columns of width 1 double
    as vectors (right-module convention: coefficients act on the right)."""

    __slots__ = ("ring", "rows")

    def __init__(self, ring, rows: Sequence[Sequence]):
        self.ring = ring
        self.rows = tuple(tuple(r) for r in rows)
        w = {len(r) for r in self.rows}
        if len(w) > 1:
            raise ValueError("ragged matrix rows")

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, ring, d: int) -> "NCMatrix":
        z, o = ring.zero, ring.one
        return cls(ring, [[o if i == j else z for j in range(d)]
                          for i in range(d)])

    @classmethod
    def zeros(cls, ring, nrows: int, ncols: int | None = None) -> "NCMatrix":
        ncols = nrows if ncols is None else ncols
        z = ring.zero
        return cls(ring, [[z] * ncols for _ in range(nrows)])

    @classmethod
    def diagonal(cls, ring, entries: Sequence) -> "NCMatrix":
        d = len(entries)
        z = ring.zero
        return cls(ring, [[entries[i] if i == j else z for j in range(d)]
                          for i in range(d)])

    @classmethod
    def column(cls, ring, entries: Sequence) -> "NCMatrix":
        return cls(ring, [[e] for e in entries])

    # -- shape --------------------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def entry(self, i: int, j: int):
        return self.rows[i][j]

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "NCMatrix") -> "NCMatrix":
        self._shape_match(other)
        return NCMatrix(self.ring, [
            [a + b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "NCMatrix") -> "NCMatrix":
        self._shape_match(other)
        return NCMatrix(self.ring, [
            [a - b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> "NCMatrix":
        return NCMatrix(self.ring, [[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, NCMatrix):
            if self.ncols != other.nrows:
                raise ValueError(
                    f"dimension mismatch: {self.nrows}x{self.ncols} times "
                    f"{other.nrows}x{other.ncols}")
            cols = other.ncols
            out = []
            for ra in self.rows:
                row = []
                for j in range(cols):
                    acc = None
                    for k, a in enumerate(ra):
                        term = a * other.rows[k][j]
                        acc = term if acc is None else acc + term
                    row.append(acc)
                out.append(row)
            return NCMatrix(self.ring, out)
        return self.scale_right(other)

    def __rmul__(self, other):
        return self.scale_left(other)

    def scale_left(self, s) -> "NCMatrix":
        s = self._coerce(s)
        return NCMatrix(self.ring, [[s * a for a in r] for r in self.rows])

    def scale_right(self, s) -> "NCMatrix":
        s = self._coerce(s)
        return NCMatrix(self.ring, [[a * s for a in r] for r in self.rows])

    def __pow__(self, k: int) -> "NCMatrix":
        if k < 0:
            raise ValueError("negative matrix powers go through invert_triangular")
        acc = NCMatrix.identity(self.ring, self.nrows)
        for _ in range(k):
            acc = acc * self
        return acc

    def _coerce(self, s):
        if isinstance(s, (int, Fraction)):
            coerce = getattr(self.ring, "coerce", None)
            if coerce is None:
                raise TypeError("ring cannot coerce plain scalars")
            return coerce(s)
        return s

    def _shape_match(self, other: "NCMatrix") -> None:
        if self.nrows != other.nrows or self.ncols != other.ncols:
            raise ValueError("matrix shape mismatch")

    # -- predicates ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCMatrix):
            return NotImplemented
        if self.nrows != other.nrows or self.ncols != other.ncols:
            return False
        return all(a == b for ra, rb in zip(self.rows, other.rows)
                   for a, b in zip(ra, rb))

    def __hash__(self):
        return hash(self.rows)

    def is_zero(self) -> bool:
        iz = self.ring.is_zero
        return all(iz(a) for r in self.rows for a in r)

    def is_identity(self) -> bool:
        return self == NCMatrix.identity(self.ring, self.nrows)

    def map_entries(self, fn: Callable, ring=None) -> "NCMatrix":
        return NCMatrix(ring if ring is not None else self.ring,
                        [[fn(a) for a in r] for r in self.rows])

    def __repr__(self) -> str:
        body = ",\n ".join("[" + ", ".join(repr(a) for a in r) + "]"
                           for r in self.rows)
        return f"[{body}]"


def mat_multiply(a: NCMatrix, b: NCMatrix) -> NCMatrix:
    return a * b


def mat_add(a: NCMatrix, b: NCMatrix) -> NCMatrix:
    return a + b


def identity(ring, d: int) -> NCMatrix:
    return NCMatrix.identity(ring, d)


def scalar_multiply(s, m: NCMatrix) -> NCMatrix:
    return m.scale_left(s)


# ---------------------------------------------------------------------------
# Triangular inversion
# ---------------------------------------------------------------------------

def invert_triangular(m: NCMatrix, side: str | None = None) -> NCMatrix:
    """Exact two-sided inverse of a triangular matrix.

    Writes M = D(1 + X) with X strictly triangular and expands the finite
    Neumann series of (1+X)^-1; diagonal entries are inverted through the
    ring and the failing entry is named if one is not invertible.
    """
    if not m.is_square():
        raise ValueError("cannot invert a non-square matrix")
    d = m.nrows
    ring = m.ring
    iz = ring.is_zero
    upper_ok = all(iz(m.rows[i][j]) for i in range(d) for j in range(i))
    lower_ok = all(iz(m.rows[i][j]) for i in range(d) for j in range(i + 1, d))
    if side == "upper" and not upper_ok:
        raise ValueError("matrix is not upper triangular")
    if side == "lower" and not lower_ok:
        raise ValueError("matrix is not lower triangular")
    if side is None and not (upper_ok or lower_ok):
        raise ValueError("matrix is not triangular")
    dinv = []
    for i in range(d):
        try:
            dinv.append(ring.invert(m.rows[i][i]))
        except Exception as exc:
            raise ValueError(
                f"diagonal entry ({i + 1},{i + 1}) is not invertible: "
                f"{m.rows[i][i]!r}") from exc
    dinv_mat = NCMatrix.diagonal(ring, dinv)
    x = dinv_mat * m - NCMatrix.identity(ring, d)
    acc = NCMatrix.identity(ring, d)
    power = NCMatrix.identity(ring, d)
    for k in range(1, d):
        power = power * x
        acc = acc - power if k % 2 else acc + power
    return acc * dinv_mat


# ---------------------------------------------------------------------------
# Pseudo-reflection triples and the Killing factorization
# ---------------------------------------------------------------------------

class PseudoReflectionTriple:
    """Three square matrices R_i, each differing from the identity in
    exactly one row (row i); off-pattern entries must be exactly 0 / 1."""

    __slots__ = ("matrices",)

    def __init__(self, r1: NCMatrix, r2: NCMatrix, r3: NCMatrix):
        self.matrices = (r1, r2, r3)
        ring = r1.ring
        z, o = ring.zero, ring.one
        for idx, r in enumerate(self.matrices):
            if r.nrows != 3 or r.ncols != 3:
                raise ValueError("pseudo-reflection triple must be 3x3")
            for i in range(3):
                if i == idx:
                    continue
                for j in range(3):
                    want = o if i == j else z
                    if not r.rows[i][j] == want:
                        raise ValueError(
                            f"R_{idx + 1} is not a pseudo-reflection: entry "
                            f"({i + 1},{j + 1}) is {r.rows[i][j]!r}")

    def a_matrix(self) -> NCMatrix:
        """Row i of A is the distinguished row of R_i."""
        ring = self.matrices[0].ring
        return NCMatrix(ring, [self.matrices[i].rows[i] for i in range(3)])

    def product(self) -> NCMatrix:
        r1, r2, r3 = self.matrices
        return r1 * r2 * r3


def reflection_from_row(ring, i: int, row: Sequence) -> NCMatrix:
    """The 3x3 pseudo-reflection with the given row in position i (0-based)."""
    m = [list(r) for r in NCMatrix.identity(ring, 3).rows]
    m[i] = list(row)
    return NCMatrix(ring, m)


def killing_factorize(triple: PseudoReflectionTriple) -> tuple[NCMatrix, NCMatrix]:
    """Unique factorization R1 R2 R3 = U L.

    U is upper unitriangular with entries read off the A matrix
    (U^-1 = 1 - strict upper part of A), L is the lower triangle of A
    including the diagonal.  The factorization is verified by
    back-multiplication before returning.
    """
    a = triple.a_matrix()
    ring = a.ring
    z, o = ring.zero, ring.one
    a12, a13, a23 = a.rows[0][1], a.rows[0][2], a.rows[1][2]
    u = NCMatrix(ring, [
        [o, a12, a13 + a12 * a23],
        [z, o, a23],
        [z, z, o]])
    low = NCMatrix(ring, [
        [a.rows[0][0], z, z],
        [a.rows[1][0], a.rows[1][1], z],
        [a.rows[2][0], a.rows[2][1], a.rows[2][2]]])
    if not (u * low == triple.product()):
        raise ValueError("Killing factorization failed back-multiplication")
    return u, low


def hecke_check(m: NCMatrix, params: Sequence) -> bool:
    """True iff prod_i (M - p_i * 1) = 0 exactly, with central p_i.

    Parameters must be central where the ring can decide centrality;
    non-central parameters are rejected.
    """
    ring = m.ring
    central = getattr(ring, "is_central", None)
    for p in params:
        if central is not None and not central(p):
            raise ValueError(f"Hecke parameter is not central: {p!r}")
    acc = NCMatrix.identity(ring, m.nrows)
    ident = NCMatrix.identity(ring, m.nrows)
    for p in params:
        acc = acc * (m - ident.scale_right(p))
    return acc.is_zero()
