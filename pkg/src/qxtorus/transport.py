"""Snake calculus on n-triangulated surfaces.

A triangle chart carries the barycentric vertex lattice of an
n-triangulation, the quiver built from the tile-orientation rule (upward
tiles clockwise, downward tiles counterclockwise, side arrows dashed),
and the torus of its coordinates.  Transport matrices across a triangle
are assembled from the elementary blocks L_k, H_k(t), S; quantization
multiplies the entrywise Weyl ordering by a diagonal q-correction.
Charts glue along sides into a surface, side variables amalgamate into
products, and loops around punctures compose to matrices over the
amalgamated torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .qtorus import (Quiver, RatLike, Torus, TorusElement, rat, reexpress,
                     check_substitution, weyl_order)
from .ncmat import NCMatrix, TorusRing

Triple = tuple[int, int, int]


# ---------------------------------------------------------------------------
# Tessellation combinatorics
# ---------------------------------------------------------------------------

def barycentric_vertices(n: int) -> list[Triple]:
    """Coordinate vertices (a,b,c), a+b+c = n, with the three corners removed."""
    out = []
    for a in range(n, -1, -1):
        for b in range(n - a, -1, -1):
            c = n - a - b
            if max(a, b, c) == n:
                continue
            out.append((a, b, c))
    return out


def vertex_name(label: str, t: Triple) -> str:
    body = "".join(str(v) for v in t)
    return f"{label}:{body}" if label else body


def side_vertices(n: int, side: int) -> list[Triple]:
    """Vertices on one side, in the canonical traversal order.

    Side s consists of the vertices whose s-th coordinate vanishes; the
    traversal runs from corner s+1 toward corner s+2 (cyclically), which
    makes the (s+1)-th coordinate descend.
    """
    if side not in (1, 2, 3):
        raise ValueError(f"side must be 1, 2 or 3, got {side}")
    out = []
    for k in range(n - 1, 0, -1):
        t = [0, 0, 0]
        t[side - 1] = 0
        t[side % 3] = k
        t[(side + 1) % 3] = n - k
        out.append(tuple(t))
    return out


def _up_tiles(n: int) -> list[Triple]:
    return [(a, b, n - 1 - a - b)
            for a in range(n) for b in range(n - a)]


def _down_tiles(n: int) -> list[Triple]:
    return [(a, b, n - 2 - a - b)
            for a in range(n - 1) for b in range(n - 1 - a)]


def triangle_quiver(n: int, label: str = "") -> Quiver:
    """Quiver of the n-triangulated triangle.

    Upward tiles contribute clockwise 3-cycles, downward tiles
    counterclockwise ones; the two contributions agree on shared edges
    and are deduplicated.  An arrow both of whose endpoints lie on one
    side is dashed (weight 1/2); arrows touching a corner are dropped.
    """
    if n < 2:
        raise ValueError("triangulation rank must be at least 2")
    verts = barycentric_vertices(n)
    vset = set(verts)
    q = Quiver([vertex_name(label, t) for t in verts])
    seen: set[tuple[Triple, Triple]] = set()

    def put(src: Triple, dst: Triple) -> None:
        if src not in vset or dst not in vset:
            return
        if (src, dst) in seen:
            return
        seen.add((src, dst))
        shared_zero = any(src[i] == 0 and dst[i] == 0 for i in range(3))
        q.add_arrow(vertex_name(label, src), vertex_name(label, dst),
                    Fraction(1, 2) if shared_zero else 1)

    for a, b, c in _up_tiles(n):
        va, vb, vc = (a + 1, b, c), (a, b + 1, c), (a, b, c + 1)
        put(va, vb)
        put(vb, vc)
        put(vc, va)
    for a, b, c in _down_tiles(n):
        p, r, s = (a, b + 1, c + 1), (a + 1, b + 1, c), (a + 1, b, c + 1)
        put(p, r)
        put(r, s)
        put(s, p)
    return q


class TriangleChart:
    """One ideal triangle of rank n: tessellation, quiver, and tori.

    The quantum torus is declared at root order n so that the transport
    entries (exponents in (1/n)Z) exist without further extension; the
    classical torus shares the vertex names with all weights zero.
    """

    __slots__ = ("n", "label", "quiver", "torus", "classical_torus")

    def __init__(self, n: int, label: str = ""):
        self.n = n
        self.label = label
        self.quiver = triangle_quiver(n, label)
        self.torus = Torus(self.quiver, root_order=n)
        self.classical_torus = Torus(Quiver(self.quiver.names), root_order=n)

    def name(self, t: Triple) -> str:
        return vertex_name(self.label, t)

    def __repr__(self) -> str:
        return f"TriangleChart(n={self.n}, label={self.label!r})"


# ---------------------------------------------------------------------------
# Elementary blocks
# ---------------------------------------------------------------------------

def block_L(ring: TorusRing, n: int, k: int) -> NCMatrix:
    """Unipotent block 1 + E_{k+1,k}."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"L_{k} undefined at rank {n}")
    m = [list(r) for r in NCMatrix.identity(ring, n).rows]
    m[k][k - 1] = ring.one
    return NCMatrix(ring, m)


def block_H(ring: TorusRing, n: int, k: int, t: TorusElement) -> NCMatrix:
    """Diagonal block with k entries t^{-(n-k)/n} followed by n-k entries t^{k/n}."""
    if not 1 <= k <= n:
        raise ValueError(f"H_{k} undefined at rank {n}")
    lo = t.pow_frac(Fraction(-(n - k), n))
    hi = t.pow_frac(Fraction(k, n))
    return NCMatrix.diagonal(ring, [lo] * k + [hi] * (n - k))


def block_S(ring: TorusRing, n: int) -> NCMatrix:
    """Antidiagonal block (S)_{ij} = (-1)^{n-i} delta_{i,n+1-j}."""
    z = ring.zero
    rows = [[z] * n for _ in range(n)]
    for i in range(1, n + 1):
        rows[i - 1][n - i] = ring.coerce((-1) ** (n - i))
    return NCMatrix(ring, rows)


def quantum_correction(ring: TorusRing, n: int) -> NCMatrix:
    """Diagonal Q with (Q)_{ii} = q^{(2-i) - (n+1)/n^2}."""
    shift = Fraction(n + 1, n * n)
    return NCMatrix.diagonal(ring, [
        ring.torus.q_power(Fraction(2 - i) - shift) for i in range(1, n + 1)])


# ---------------------------------------------------------------------------
# Transport matrices
# ---------------------------------------------------------------------------

def _rot(t: Triple, r: int) -> Triple:
    for _ in range(r % 3):
        t = (t[2], t[0], t[1])
    return t


def _t1_blocks(n: int) -> list[tuple]:
    """Block word of the first transport matrix, left to right.

    S, then the H's of the entry side, a sawtooth of L/H factors through
    the interior, and the H's of the exit side.
    """
    word: list[tuple] = [("S",)]
    for k in range(1, n):
        word.append(("H", n - k, (k, 0, n - k)))
    word.append(("L", n - 1))
    for j in range(1, n - 1):
        for i in range(1, n - j):
            word.append(("L", n - i - 1))
            word.append(("H", n - i, (n - j - i, i, j)))
        word.append(("L", n - 1))
    for k in range(1, n):
        word.append(("H", k, (n - k, k, 0)))
    return word


def transport_blocks(n: int, index: int) -> list[tuple]:
    """Block word of T_index; higher indices cyclically rotate the labels."""
    if index not in (1, 2, 3):
        raise ValueError(f"transport index must be 1, 2 or 3, got {index}")
    word = _t1_blocks(n)
    if index == 1:
        return word
    return [b if b[0] != "H" else ("H", b[1], _rot(b[2], index - 1))
            for b in word]


def _assemble(ring: TorusRing, n: int, word: Sequence[tuple],
              var) -> NCMatrix:
    acc = NCMatrix.identity(ring, n)
    for b in word:
        if b[0] == "S":
            acc = acc * block_S(ring, n)
        elif b[0] == "L":
            acc = acc * block_L(ring, n, b[1])
        else:
            acc = acc * block_H(ring, n, b[1], var(b[2]))
    return acc


def transport_classical(chart: TriangleChart, index: int) -> NCMatrix:
    """The PSL_n transport matrix across the triangle, in its SL-lift."""
    torus = chart.classical_torus
    ring = TorusRing(torus)
    word = transport_blocks(chart.n, index)
    return _assemble(ring, chart.n, word, lambda t: torus.gen(chart.name(t)))


def quantize_element(x: TorusElement, quantum: Torus) -> TorusElement:
    """Entrywise quantization: each classical monomial becomes its Weyl
    ordering q^{W(m)} M(m) in the quantum torus."""
    if sorted(x.torus.names) != sorted(quantum.names) \
            or x.torus.root_order != quantum.root_order:
        raise ValueError("classical and quantum tori do not share coordinates")
    out: dict = {}
    for mon, poly in x.terms.items():
        w = quantum.weyl_qexp(mon)
        acc = out.setdefault(mon, {})
        for e, c in poly.items():
            if e != 0:
                raise ValueError("input is not classical: q-power present")
            acc[w] = acc.get(w, Fraction(0)) + c
    return TorusElement(quantum, out)


def transport_quantum(chart: TriangleChart, index: int) -> NCMatrix:
    """Q times the entrywise Weyl ordering of the classical transport."""
    cl = transport_classical(chart, index)
    ring = TorusRing(chart.torus)
    ordered = cl.map_entries(lambda e: quantize_element(e, chart.torus), ring)
    return quantum_correction(ring, chart.n) * ordered


def variables_used(m: NCMatrix) -> set[str]:
    """Names of all torus variables occurring in the matrix entries."""
    out: set[str] = set()
    for row in m.rows:
        for e in row:
            torus = e.torus
            for mon in e.terms:
                out.update(torus.names[i] for i, v in enumerate(mon) if v)
    return out


# ---------------------------------------------------------------------------
# Surfaces, gluing, amalgamation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gluing:
    """Identification of two triangle sides, antiparallel.

    `names` gives the amalgamated variable names in the traversal order
    of the first side; the k-th vertex of the first side is identified
    with the k-th-from-last vertex of the second.  Self-gluings must opt
    in to Weyl ordering of the merged variable.
    """

    first: tuple[str, int]
    second: tuple[str, int]
    names: tuple[str, ...]
    weyl: bool = True


@dataclass
class Surface:
    """Charts of a common rank plus side gluings and frozen flags."""

    n: int
    labels: tuple[str, ...]
    gluings: tuple[Gluing, ...]
    frozen: tuple[str, ...] = ()
    charts: dict[str, TriangleChart] = field(init=False)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate chart labels")
        self.charts = {lab: TriangleChart(self.n, lab) for lab in self.labels}
        used: set[tuple[str, int]] = set()
        for g in self.gluings:
            for end in (g.first, g.second):
                lab, side = end
                if lab not in self.charts:
                    raise ValueError(f"gluing refers to unknown chart {lab!r}")
                if side not in (1, 2, 3):
                    raise ValueError(f"bad side {side} in gluing")
                if end in used:
                    raise ValueError(f"side {end} glued twice")
                used.add(end)
            if len(g.names) != self.n - 1:
                raise ValueError(
                    f"gluing {g.first}~{g.second} needs {self.n - 1} names")
            if g.first[0] == g.second[0] and not g.weyl:
                raise ValueError(
                    f"self-gluing {g.first}~{g.second} requires Weyl ordering")


def surface_torus(surface: Surface) -> Torus:
    """Tensor torus of all charts (no cross-chart arrows)."""
    names: list[str] = []
    arrows: list[tuple[str, str, Fraction]] = []
    for lab in surface.labels:
        q = surface.charts[lab].quiver
        names.extend(q.names)
        arrows.extend(q.arrows())
    return Torus(Quiver(names, arrows), root_order=surface.n)


def gluing_pairs(surface: Surface, g: Gluing) -> list[tuple[str, str, str]]:
    """(amalgamated name, first vertex, second vertex) for one gluing."""
    lab1, s1 = g.first
    lab2, s2 = g.second
    v1 = side_vertices(surface.n, s1)
    v2 = side_vertices(surface.n, s2)
    out = []
    for k, name in enumerate(g.names):
        a = vertex_name(lab1, v1[k])
        b = vertex_name(lab2, v2[len(v2) - 1 - k])
        out.append((name, a, b))
    return out


class Amalgamation:
    """Result of gluing: the merged quiver/torus and the inclusion of its
    generators into the tensor torus of the charts."""

    __slots__ = ("surface", "big", "torus", "images")

    def __init__(self, surface: Surface, big: Torus, torus: Torus,
                 images: dict[str, TorusElement]):
        self.surface = surface
        self.big = big
        self.torus = torus
        self.images = images


def amalgamate(surface: Surface) -> Amalgamation:
    """Merge glued side variables into products (Weyl-ordered products for
    self-gluings) and induce the quiver weights from q-commutation."""
    big = surface_torus(surface)
    images: dict[str, TorusElement] = {}
    consumed: set[str] = set()
    for g in surface.gluings:
        for name, a, b in gluing_pairs(surface, g):
            if name in images:
                raise ValueError(f"amalgamated name {name!r} used twice")
            images[name] = weyl_order(big, [big.gen(a), big.gen(b)])
            consumed.update((a, b))
    for v in big.names:
        if v not in consumed:
            if v in images:
                raise ValueError(f"name collision on unglued vertex {v!r}")
            images[v] = big.gen(v)
    names = sorted(images)
    mons = {v: next(iter(images[v].terms)) for v in names}
    quiver = Quiver(names, frozen=[f for f in surface.frozen if f in images])
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            c = big.comm_mon(mons[a], mons[b])
            w = -c / 2
            if w > 0:
                quiver.add_arrow(a, b, w)
            elif w < 0:
                quiver.add_arrow(b, a, -w)
    torus = Torus(quiver, root_order=surface.n)
    check_substitution(torus, big, images)
    return Amalgamation(surface, big, torus, images)


# ---------------------------------------------------------------------------
# Path composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    """A loop word in transport and S tokens, with a scalar prefactor.

    Tokens: ("S",) inserts the quantum S block; ("T", label, index, p)
    with p = +-1 inserts a chart transport or its inverse.  Inverses are
    expanded through the groupoid relation T_i^{-1} = T_{i+1} T_{i+2}.
    """

    steps: tuple[tuple, ...]
    qexp: Fraction = Fraction(0)
    coeff: Fraction = Fraction(1)
    name: str = ""


def _expand_steps(steps: Iterable[tuple]) -> list[tuple]:
    out: list[tuple] = []
    for tok in steps:
        if tok[0] == "S":
            out.append(("S",))
            continue
        _, lab, idx, p = tok
        if p == 1:
            out.append(("T", lab, idx))
        elif p == -1:
            out.append(("T", lab, idx % 3 + 1))
            out.append(("T", lab, (idx + 1) % 3 + 1))
        else:
            raise ValueError(f"unsupported transport power {p}")
    return out


def include_element(x: TorusElement, big: Torus) -> TorusElement:
    """Reindex an element of a chart torus into the tensor torus."""
    src = x.torus
    if src.root_order != big.root_order:
        raise ValueError("root orders differ")
    idx = [big.index[n] for n in src.names]
    width = len(big.names)
    out: dict = {}
    for mon, poly in x.terms.items():
        m = [0] * width
        for i, v in enumerate(mon):
            if v:
                m[idx[i]] = v
        out[tuple(m)] = dict(poly)
    return TorusElement(big, out)


def compose_path(amalg: Amalgamation, spec: PathSpec,
                 conjugator: Sequence[TorusElement] | None = None) -> NCMatrix:
    """Multiply the loop word in the tensor torus, conjugate, and rewrite
    every entry over the amalgamated torus.

    The optional conjugator is a diagonal (list of invertible tensor-torus
    elements); rewriting fails loudly if any entry involves a variable
    combination outside the amalgamated subalgebra.
    """
    surface = amalg.surface
    n = surface.n
    big_ring = TorusRing(amalg.big)
    sq = quantum_correction(big_ring, n) * block_S(big_ring, n)
    cache: dict[tuple[str, int], NCMatrix] = {}

    def transport(lab: str, idx: int) -> NCMatrix:
        mat = cache.get((lab, idx))
        if mat is None:
            raw = transport_quantum(surface.charts[lab], idx)
            mat = raw.map_entries(lambda e: include_element(e, amalg.big),
                                  big_ring)
            cache[(lab, idx)] = mat
        return mat

    acc = NCMatrix.identity(big_ring, n)
    for tok in _expand_steps(spec.steps):
        acc = acc * (sq if tok[0] == "S" else transport(tok[1], tok[2]))
    if spec.coeff != 1 or spec.qexp != 0:
        acc = acc.scale_left(amalg.big.q_power(spec.qexp, spec.coeff))
    if conjugator is not None:
        cinv = [c.inverse() for c in conjugator]
        acc = NCMatrix(big_ring, [
            [conjugator[i] * acc.rows[i][j] * cinv[j] for j in range(n)]
            for i in range(n)])
    small_ring = TorusRing(amalg.torus)
    return acc.map_entries(
        lambda e: reexpress(e, amalg.images, amalg.torus), small_ring)


# ---------------------------------------------------------------------------
# Moduli dimension count
# ---------------------------------------------------------------------------

def moduli_dimensions(g: int, s: int, m: int, n: int) -> tuple[int, int]:
    """Dimension of the pinned character variety computed two ways.

    Both counts are exact integers and coincide for every hyperbolic
    (g, s, m); non-hyperbolic input is rejected.
    """
    if 4 * g - 4 + 2 * s + m <= 0:
        raise ValueError(f"no hyperbolic structure for g={g}, s={s}, m={m}")
    dim_p = ((4 * g - 4 + 2 * s + m) * (n + 4) * (n - 1)) // 2 \
        - (6 * g - 6 + 3 * s + m) * (n - 1)
    dim_t = (2 * g + s - 2 + m) * (n * n - 1) - (m * n * (n - 1)) // 2
    return dim_p, dim_t


# ---------------------------------------------------------------------------
# Surface / path JSON
# ---------------------------------------------------------------------------

def surface_to_json(surface: Surface) -> dict:
    return {
        "n": surface.n,
        "charts": list(surface.labels),
        "gluings": [{
            "first": [g.first[0], g.first[1]],
            "second": [g.second[0], g.second[1]],
            "names": list(g.names),
        } for g in surface.gluings],
        "frozen": list(surface.frozen),
    }


def surface_from_json(obj: Mapping) -> Surface:
    gluings = tuple(
        Gluing((g["first"][0], int(g["first"][1])),
               (g["second"][0], int(g["second"][1])),
               tuple(g["names"]))
        for g in obj["gluings"])
    return Surface(int(obj["n"]), tuple(obj["charts"]), gluings,
                   tuple(obj.get("frozen", ())))


def path_to_json(spec: PathSpec) -> dict:
    return {
        "name": spec.name,
        "qexp": str(spec.qexp),
        "coeff": str(spec.coeff),
        "steps": [list(t) for t in spec.steps],
    }


def path_from_json(obj: Mapping) -> PathSpec:
    steps = []
    for t in obj["steps"]:
        if t[0] == "S":
            steps.append(("S",))
        else:
            steps.append(("T", t[1], int(t[2]), int(t[3])))
    return PathSpec(tuple(steps), rat(obj.get("qexp", 0)),
                    rat(obj.get("coeff", 1)), obj.get("name", ""))
