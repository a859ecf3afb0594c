"""Exact rational linear algebra and small-dimensional lattice geometry.

Vectors are plain tuples of ``int`` (lattice vectors) or ``Fraction``
(rational vectors).  Everything here is exact; floating point never enters.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    DegenerateHull,
    DegeneratePolygon,
    DependentGenerators,
    EmptyRegion,
    UnboundedRegion,
    ZeroVector,
)

Vector = tuple


def as_fractions(v) -> tuple:
    return tuple(Fraction(x) for x in v)


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def sub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def add(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def scale(c, a) -> tuple:
    return tuple(c * x for x in a)


def is_integral(v) -> bool:
    return all(Fraction(x).denominator == 1 for x in v)


def to_int_vector(v) -> tuple:
    if not is_integral(v):
        raise ValueError(f"vector {v} is not integral")
    return tuple(int(Fraction(x)) for x in v)


def primitive_of(v: Sequence[int]) -> tuple[tuple, int]:
    """Split ``v`` as ``m * v'`` with ``v'`` primitive and ``m >= 1``."""
    v = tuple(int(x) for x in v)
    m = math.gcd(*v) if v else 0
    if m == 0:
        raise ZeroVector("cannot take the primitive vector of zero")
    return tuple(x // m for x in v), m


def primitive_integer(v) -> tuple:
    """Scale a nonzero rational vector to the primitive integral vector on its ray."""
    v = as_fractions(v)
    den = math.lcm(*(x.denominator for x in v))
    return primitive_of(tuple(int(x * den) for x in v))[0]


# ---------------------------------------------------------------------------
# Gaussian elimination over Q


def rref(rows):
    """Reduced row echelon form over Q.  Returns (matrix, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def _int_rank(rows) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    m = [list(r) for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r]
        for i in range(r + 1, len(m)):
            if m[i][c]:
                a, b = piv[c], m[i][c]
                m[i] = [a * x - b * y for x, y in zip(m[i], piv)]
        r += 1
        if r == len(m):
            break
    return r


def rank(rows) -> int:
    if all(type(x) is int for row in rows for x in row):
        return _int_rank(rows)
    return len(rref(rows)[1])


def nullspace(rows, ncols: int | None = None) -> list[tuple]:
    """Basis of {x : rows @ x = 0} as primitive integer vectors."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -m[i][f]
        basis.append(primitive_integer(x))
    return basis


def solve(a, b) -> tuple | None:
    """Unique solution of the square system ``a x = b``, or None if singular."""
    n = len(a)
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return tuple(m[i][n] for i in range(n))


def det(a):
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = [list(row) for row in a]
    n = len(m)
    if n == 0:
        return 1
    if all(isinstance(x, int) for row in m for x in row):
        sign, prev = 1, 1
        for k in range(n - 1):
            if m[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
                if swap is None:
                    return 0
                m[k], m[swap] = m[swap], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]
    m = [list(map(Fraction, row)) for row in m]
    result = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if m[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            m[k], m[p] = m[p], m[k]
            result = -result
        result *= m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return result


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def inverse(a):
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in m]


# ---------------------------------------------------------------------------
# Lattices


def lattice_index(generators: Sequence[Sequence[int]]) -> int:
    """Index of the Z-span of ``generators`` inside the lattice points of their R-span.

    This is the gcd of the maximal minors; 1 means the generators form part of
    a lattice basis.
    """
    gens = [tuple(int(x) for x in g) for g in generators]
    if not gens:
        return 1
    k, n = len(gens), len(gens[0])
    if k > n:
        raise DependentGenerators(f"{k} vectors in dimension {n} are dependent")
    g = 0
    for cols in itertools.combinations(range(n), k):
        g = math.gcd(g, det([[v[c] for c in cols] for v in gens]))
        if g == 1:
            return 1
    if g == 0:
        raise DependentGenerators("generators are linearly dependent")
    return abs(g)


def unimodular_last_column(gamma: Sequence[int]):
    """Integer matrix U with det ±1 and ``gamma @ U = (0, ..., 0, g)``, g = gcd(gamma).

    Column operations only, processed right to left, so a ``gamma`` that is
    already a multiple of the last basis vector yields the identity.
    """
    gamma = [int(x) for x in gamma]
    n = len(gamma)
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    row = list(gamma)

    def colop(i, j, a, b, c, d):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for r in range(n):
            x, y = u[r][i], u[r][j]
            u[r][i], u[r][j] = a * x + b * y, c * x + d * y
        x, y = row[i], row[j]
        row[i], row[j] = a * x + b * y, c * x + d * y

    last = n - 1
    for i in range(n - 2, -1, -1):
        if row[i] == 0:
            continue
        x, y = row[i], row[last]
        g, s, t = _xgcd(x, y)
        # new last = s*col_i + t*col_last (value g); new i = (y/g) col_i - (x/g) col_last (value 0)
        colop(i, last, y // g, -(x // g), s, t)
    if row[last] < 0:
        for r in range(n):
            u[r][last] = -u[r][last]
        row[last] = -row[last]
    return u, row[last]


def _xgcd(a: int, b: int):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hermite_basis(generators: Sequence[Sequence[int]]) -> list[tuple]:
    """Row-style Hermite normal form basis of the lattice spanned by integer rows."""
    m = [list(map(int, g)) for g in generators if any(g)]
    if not m:
        return []
    n = len(m[0])
    r = 0
    for c in range(n):
        if r >= len(m):
            break
        rows = [i for i in range(r, len(m)) if m[i][c] != 0]
        if not rows:
            continue
        # gcd-reduce column c into row r
        while True:
            rows = [i for i in range(r, len(m)) if m[i][c] != 0]
            if len(rows) <= 1:
                break
            piv = min(rows, key=lambda i: abs(m[i][c]))
            for i in rows:
                if i != piv:
                    q = m[i][c] // m[piv][c]
                    m[i] = [a - q * b for a, b in zip(m[i], m[piv])]
        piv = rows[0]
        m[r], m[piv] = m[piv], m[r]
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            m[i] = [a - q * b for a, b in zip(m[i], m[r])]
        r += 1
    return [tuple(row) for row in m[:r]]


# ---------------------------------------------------------------------------
# Lattice polygons


def cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class LatticePolygon:
    """Convex lattice polygon, vertices counterclockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(int(c) for c in v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3 or len(set(verts)) != len(verts):
            raise DegeneratePolygon(f"need at least 3 distinct vertices, got {verts}")
        k = len(verts)
        for i in range(k):
            if cross2(verts[i], verts[(i + 1) % k], verts[(i + 2) % k]) <= 0:
                raise DegeneratePolygon(
                    f"vertices {verts} are not strictly convex counterclockwise")
        if self.doubled_area() <= 0:
            raise DegeneratePolygon("zero area")

    @classmethod
    def from_points(cls, points) -> "LatticePolygon":
        """Convex hull of lattice points, starting at the lexicographically smallest vertex."""
        pts = sorted(set(tuple(int(c) for c in p) for p in points))
        if len(pts) < 3:
            raise DegeneratePolygon(f"too few points: {pts}")

        def half(seq):
            out = []
            for p in seq:
                while len(out) >= 2 and cross2(out[-2], out[-1], p) <= 0:
                    out.pop()
                out.append(p)
            return out

        lower = half(pts)
        upper = half(reversed(pts))
        hull = lower[:-1] + upper[:-1]
        if len(hull) < 3:
            raise DegeneratePolygon(f"points {pts} are collinear")
        return cls(tuple(hull))

    def edges(self):
        k = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % k]) for i in range(k)]

    def doubled_area(self) -> int:
        return sum(a[0] * b[1] - a[1] * b[0] for a, b in self.edges())

    def contains(self, p, strict: bool = False) -> bool:
        for a, b in self.edges():
            c = cross2(a, b, p)
            if c < 0 or (strict and c == 0):
                return False
        return True

    def lattice_points(self) -> tuple[list, list]:
        """(interior, boundary) lattice points, each sorted lexicographically."""
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        interior, boundary = [], []
        for x in range(min(xs), max(xs) + 1):
            for y in range(min(ys), max(ys) + 1):
                p = (x, y)
                if self.contains(p, strict=True):
                    interior.append(p)
                elif self.contains(p):
                    boundary.append(p)
        return interior, boundary


def pick_counts(poly: LatticePolygon) -> tuple[int, int, int]:
    """(doubled area, boundary points, interior points), Pick cross-checked by enumeration."""
    a2 = poly.doubled_area()
    if a2 <= 0:
        raise DegeneratePolygon("zero area")
    b = sum(math.gcd(q[0] - p[0], q[1] - p[1]) for p, q in poly.edges())
    i_pick = (a2 - b + 2) // 2
    interior, boundary = poly.lattice_points()
    if (a2 - b + 2) % 2 or i_pick != len(interior) or b != len(boundary):
        raise AssertionError(
            f"Pick mismatch on {poly.vertices}: formula ({i_pick}, {b}), "
            f"enumeration ({len(interior)}, {len(boundary)})")
    return a2, b, i_pick


# ---------------------------------------------------------------------------
# Polytopes given by halfspaces or by vertices


def halfspace_vertices(normals, offsets) -> list[tuple]:
    """Vertices of {y : <normals[j], y> >= offsets[j] for all j}, sorted lexicographically.

    Each vertex is the unique solution of some ``dim``-subset of active
    constraints that satisfies every other constraint.
    """
    a = [as_fractions(n) for n in normals]
    b = [Fraction(x) for x in offsets]
    if not a:
        raise UnboundedRegion("no constraints")
    dim = len(a[0])
    if dim > 4:
        raise ValueError("halfspace_vertices supports dimension <= 4 only")
    if _has_recession_direction(a):
        raise UnboundedRegion("region contains a ray")
    found = set()
    for idx in itertools.combinations(range(len(a)), dim):
        y = solve([a[i] for i in idx], [b[i] for i in idx])
        if y is None or y in found:
            continue
        if all(dot(aj, y) >= bj for aj, bj in zip(a, b)):
            found.add(y)
    if not found:
        raise EmptyRegion("constraints are infeasible")
    return sorted(found)


def _has_recession_direction(a) -> bool:
    """True if some nonzero y has a @ y >= 0 componentwise."""
    dim = len(a[0])
    if rank(a) < dim:
        return True
    for idx in itertools.combinations(range(len(a)), dim - 1):
        ker = nullspace([a[i] for i in idx], dim) if dim > 1 else [(1,)]
        if len(ker) != 1:
            continue
        for sign in (1, -1):
            y = scale(sign, ker[0])
            if all(dot(row, y) >= 0 for row in a):
                return True
    return False


def _affine_coordinates(points):
    """Express points in an affine frame of their hull.  Returns (coords, dimension)."""
    origin = points[0]
    diffs = [sub(p, origin) for p in points]
    basis = []
    for d in diffs:
        if rank(basis + [d]) > len(basis):
            basis.append(d)
    k = len(basis)
    if k == len(origin):
        return [tuple(d) for d in diffs], k
    # coordinates c with sum c_i basis_i = d; use the pivot columns of the basis
    _, piv = rref(basis)
    square = [[basis[i][c] for i in range(k)] for c in piv]
    coords = [solve(square, [d[c] for c in piv]) for d in diffs]
    return coords, k


def _facets(pts, k):
    """Facets of a full-dimensional point configuration in Q^k, as index frozensets."""
    if k == 1:
        lo = min(range(len(pts)), key=lambda i: pts[i][0])
        hi = max(range(len(pts)), key=lambda i: pts[i][0])
        return [frozenset([lo]), frozenset([hi])]
    facets = set()
    for idx in itertools.combinations(range(len(pts)), k):
        rows = [sub(pts[i], pts[idx[0]]) for i in idx[1:]]
        ker = nullspace(rows, k)
        if len(ker) != 1:
            continue
        nrm = ker[0]
        c = dot(nrm, pts[idx[0]])
        vals = [dot(nrm, p) - c for p in pts]
        if all(v >= 0 for v in vals) or all(v <= 0 for v in vals):
            facets.add(frozenset(i for i, v in enumerate(vals) if v == 0))
    return list(facets)


def _pulling_triangulation(pts, k):
    """Triangulate a full-dimensional configuration by coning from point 0 over facets."""
    if k == 0:
        return [(0,)]
    if len(pts) == k + 1:
        return [tuple(range(k + 1))]
    simplices = []
    for facet in sorted(_facets(pts, k), key=sorted):
        if 0 in facet:
            continue
        members = sorted(facet)
        sub_pts, sub_k = _affine_coordinates([pts[i] for i in members])
        if sub_k != k - 1:
            continue
        for s in _pulling_triangulation(sub_pts, sub_k):
            simplices.append((0,) + tuple(members[i] for i in s))
    return simplices


def polytope_volume(vertices) -> Fraction:
    """Exact Euclidean volume of the convex hull of ``vertices``."""
    pts = []
    for v in vertices:
        v = as_fractions(v)
        if v not in pts:
            pts.append(v)
    if not pts:
        raise DegenerateHull("no vertices")
    n = len(pts[0])
    coords, k = _affine_coordinates(pts)
    if k < n:
        raise DegenerateHull(f"vertices span an affine space of dimension {k} < {n}")
    total = Fraction(0)
    for s in _pulling_triangulation(pts, n):
        total += abs(det([sub(pts[i], pts[s[0]]) for i in s[1:]]))
    return total / math.factorial(n)
