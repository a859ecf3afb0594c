"""Cones, fans, Gorenstein certificates, section polytopes and support functions."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import exactgeom as eg
from .errors import (
    GeneratorOffHyperplane,
    InconsistentSupportFunction,
    InvalidFan,
    MissingBoundaryRays,
    NotFullDimensional,
    NotStronglyConvex,
)


def contains_line(generators) -> bool:
    """True if the cone spanned by ``generators`` contains a line.

    By Gordan's alternative the cone is pointed unless some nontrivial
    nonnegative combination of generators vanishes; by Caratheodory such a
    relation can be taken on a minimally dependent subset.
    """
    gens = [tuple(g) for g in generators]
    if not gens:
        return False
    if len(gens) <= len(gens[0]) and eg.rank(gens) == len(gens):
        return False
    k = eg.rank(gens)
    for size in range(2, min(len(gens), k + 1) + 1):
        for idx in itertools.combinations(range(len(gens)), size):
            cols = [gens[i] for i in idx]
            ker = eg.nullspace(eg.transpose(cols), size)
            if len(ker) != 1:
                continue
            rel = ker[0]
            if all(c > 0 for c in rel) or all(c < 0 for c in rel):
                return True
    return False


def _is_basis(gens) -> bool:
    return len(gens) == len(gens[0]) and eg.det([list(g) for g in gens]) != 0


def simplicial_coordinates(v, gens) -> list[Fraction]:
    """Coordinates of ``v`` in a basis of integer generators, by Cramer's rule."""
    m = [list(g) for g in gens]
    d = eg.det(eg.transpose(m))
    out = []
    for i in range(len(gens)):
        mi = [list(g) for g in gens]
        mi[i] = list(v)
        out.append(Fraction(eg.det(eg.transpose(mi)), d))
    return out


def in_cone(v, generators) -> bool:
    """Exact membership test ``v in cone(generators)`` for a pointed cone."""
    gens = [tuple(g) for g in generators]
    if not any(v):
        return True
    if _is_basis(gens) and all(isinstance(x, int) for g in gens for x in g) \
            and all(isinstance(x, int) for x in v):
        return all(c >= 0 for c in simplicial_coordinates(v, gens))
    k = eg.rank(gens)
    if eg.rank(gens + [tuple(v)]) > k:
        return False
    for idx in itertools.combinations(range(len(gens)), k):
        basis = [gens[i] for i in idx]
        if eg.rank(basis) < k:
            continue
        _, piv = eg.rref(basis)
        square = [[b[c] for b in basis] for c in piv]
        coeffs = eg.solve(square, [v[c] for c in piv])
        if coeffs is not None and all(x >= 0 for x in coeffs):
            return True
    return False


def facet_normals(generators) -> list[tuple]:
    """Primitive inward facet normals of a full-dimensional cone, sorted."""
    gens = [tuple(g) for g in generators]
    n = len(gens[0])
    if eg.rank(gens) < n:
        raise NotFullDimensional(f"cone spanned by {gens} is not full-dimensional")
    if n == 1:
        return [(1,)] if all(g[0] > 0 for g in gens) else [(-1,)]
    normals = set()
    for idx in itertools.combinations(range(len(gens)), n - 1):
        ker = eg.nullspace([gens[i] for i in idx], n)
        if len(ker) != 1:
            continue
        nrm = ker[0]
        vals = [eg.dot(nrm, g) for g in gens]
        if all(x >= 0 for x in vals):
            pass
        elif all(x <= 0 for x in vals):
            nrm = eg.scale(-1, nrm)
        else:
            continue
        on = [g for g in gens if eg.dot(nrm, g) == 0]
        if eg.rank(on) == n - 1:
            normals.add(nrm)
    return sorted(normals)


@dataclass(frozen=True)
class Cone:
    """Strongly convex rational polyhedral cone given by primitive generators."""

    generators: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        gens = sorted({eg.primitive_of(g)[0] for g in self.generators})
        if not gens:
            raise ValueError("a cone needs at least one generator")
        if contains_line(gens):
            raise NotStronglyConvex(f"cone spanned by {gens} contains a line")
        minimal = [g for i, g in enumerate(gens) if not in_cone(g, gens[:i] + gens[i + 1:])]
        object.__setattr__(self, "generators", tuple(minimal))
        object.__setattr__(self, "dim", eg.rank(minimal))

    @property
    def ambient_dim(self) -> int:
        return len(self.generators[0])

    def contains(self, v) -> bool:
        return in_cone(v, self.generators)


def dual_cone(c: Cone) -> Cone:
    """The dual cone {x : <x, y> >= 0 for all y in c}."""
    if c.dim < c.ambient_dim:
        raise NotFullDimensional("dual_cone needs a full-dimensional cone")
    return Cone(tuple(facet_normals(c.generators)))


# ---------------------------------------------------------------------------
# Fans


@dataclass(frozen=True)
class Fan:
    """A fan stored by its rays and maximal cones (sorted ray-index tuples).

    ``boundary_rays`` marks the rays spanning the original cone when the fan is
    a refinement; it is required for the compactness check of support functions.
    """

    lattice_dim: int
    rays: tuple
    cones: tuple
    boundary_rays: tuple | None = None

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        for r in rays:
            if len(r) != self.lattice_dim:
                raise InvalidFan(f"ray {r} has wrong dimension")
            if eg.primitive_of(r)[1] != 1:
                raise InvalidFan(f"ray {r} is not primitive")
        if len(set(rays)) != len(rays):
            raise InvalidFan("duplicate rays")
        cones = tuple(tuple(sorted(set(int(i) for i in c))) for c in self.cones)
        for c in cones:
            if not c or any(i < 0 or i >= len(rays) for i in c):
                raise InvalidFan(f"cone {c} references unknown rays")
            if contains_line([rays[i] for i in c]):
                raise InvalidFan(f"cone {c} is not strongly convex")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "cones", cones)
        if self.boundary_rays is not None:
            object.__setattr__(self, "boundary_rays",
                               tuple(sorted(set(int(i) for i in self.boundary_rays))))

    @classmethod
    def from_cone(cls, generators: Sequence[Sequence[int]]) -> "Fan":
        """Fan of a single cone and its faces; all generators marked as boundary rays."""
        gens = [eg.primitive_of(g)[0] for g in generators]
        cone = Cone(tuple(gens))
        if set(cone.generators) != set(gens):
            raise InvalidFan(f"generators {gens} are not minimal")
        return cls(len(gens[0]), tuple(gens), (tuple(range(len(gens))),),
                   tuple(range(len(gens))))

    def cone_rays(self, i: int) -> list[tuple]:
        return [self.rays[j] for j in self.cones[i]]

    def is_simplicial(self) -> bool:
        return all(len(c) == eg.rank([self.rays[j] for j in c]) for c in self.cones)

    def is_single_cone(self) -> bool:
        return len(self.cones) == 1

    def to_dict(self) -> dict:
        d = {"dim": self.lattice_dim,
             "rays": [list(r) for r in self.rays],
             "cones": [list(c) for c in self.cones]}
        if self.boundary_rays is not None:
            d["boundary_rays"] = list(self.boundary_rays)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Fan":
        try:
            return cls(int(d["dim"]), tuple(tuple(r) for r in d["rays"]),
                       tuple(tuple(c) for c in d["cones"]),
                       tuple(d["boundary_rays"]) if d.get("boundary_rays") is not None else None)
        except KeyError as exc:
            raise InvalidFan(f"fan document is missing field {exc}") from None


def load_fan(path) -> Fan:
    with open(path) as fh:
        return Fan.from_dict(json.load(fh))


def save_fan(fan: Fan, path) -> None:
    with open(path, "w") as fh:
        json.dump(fan.to_dict(), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Gorenstein condition and the section polytope


@dataclass(frozen=True)
class GorensteinCertificate:
    gamma: tuple | None
    holds: bool


def gorenstein_gamma(f: Fan) -> GorensteinCertificate:
    """Solve <gamma, u_j> = -1 on every ray of ``f``.

    ``holds`` is true iff the solution exists, is unique and is integral.
    """
    rays = list(f.rays)
    n = f.lattice_dim
    basis = []
    for r in rays:
        if eg.rank(basis + [r]) > len(basis):
            basis.append(r)
    if len(basis) < n:
        return GorensteinCertificate(None, False)
    gamma = eg.solve(basis, [-1] * n)
    if any(eg.dot(gamma, r) != -1 for r in rays):
        return GorensteinCertificate(None, False)
    return GorensteinCertificate(gamma, eg.is_integral(gamma))


@dataclass(frozen=True)
class SectionPolytope:
    """Lattice polytope P = {x in |f| : <gamma, x> = -1} with a unimodular chart.

    ``chart`` rows map ambient x to coordinates whose last entry is <gamma, x>;
    the remaining entries are the chart image in Z^{n-1}.
    """

    gamma: tuple
    chart: tuple
    chart_inverse: tuple
    ambient_points: tuple
    polygon: eg.LatticePolygon | None
    interval: tuple | None = None

    def to_chart(self, x) -> tuple:
        c = [eg.dot(row, x) for row in self.chart]
        return tuple(int(v) for v in c[:-1])

    def from_chart(self, c) -> tuple:
        full = tuple(c) + (-1,)
        return tuple(int(eg.dot(row, full)) for row in self.chart_inverse)

    def lattice_points(self) -> tuple[list, list]:
        """(interior, boundary) lattice points in chart coordinates, lexicographic."""
        if self.polygon is not None:
            return self.polygon.lattice_points()
        lo, hi = self.interval
        return [(x,) for x in range(lo + 1, hi)], [(lo,), (hi,)]

    def interior_points(self) -> list[tuple]:
        return [self.from_chart(p) for p in self.lattice_points()[0]]

    def boundary_points(self) -> list[tuple]:
        return [self.from_chart(p) for p in self.lattice_points()[1]]

    def doubled_area(self) -> int:
        """Normalized volume: number of unimodular simplices in a basic triangulation."""
        if self.polygon is not None:
            return self.polygon.doubled_area()
        return self.interval[1] - self.interval[0]


def hyperplane_chart(gamma) -> tuple[list, list]:
    """Unimodular chart of Z^n whose last coordinate is <gamma, x>."""
    g = eg.to_int_vector(gamma)
    u, content = eg.unimodular_last_column(g)
    if content != 1:
        raise GeneratorOffHyperplane(f"gamma {g} is not primitive")
    # x = U c  and  gamma U = e_last, so the chart is U^{-1}
    uinv = [[int(x) for x in row] for row in eg.inverse(u)]
    return uinv, u


def section_polytope(f: Fan, cert: GorensteinCertificate | None = None) -> SectionPolytope:
    """Section of the support of ``f`` by the Gorenstein hyperplane, in a lattice chart."""
    if cert is None:
        cert = gorenstein_gamma(f)
    if not cert.holds:
        raise GeneratorOffHyperplane("fan is not Gorenstein: no integral gamma")
    for r in f.rays:
        if eg.dot(cert.gamma, r) != -1:
            raise GeneratorOffHyperplane(f"ray {r} is off the hyperplane <gamma, x> = -1")
    chart, chart_inv = hyperplane_chart(cert.gamma)
    to_chart = [tuple(int(eg.dot(row, r)) for row in chart[:-1]) for r in f.rays]
    n = f.lattice_dim
    if n == 3:
        poly = eg.LatticePolygon.from_points(to_chart)
        section = SectionPolytope(cert.gamma, tuple(map(tuple, chart)),
                                  tuple(map(tuple, chart_inv)), (), poly)
    elif n == 2:
        xs = [p[0] for p in to_chart]
        section = SectionPolytope(cert.gamma, tuple(map(tuple, chart)),
                                  tuple(map(tuple, chart_inv)), (), None, (min(xs), max(xs)))
    else:
        raise NotFullDimensional("section polytopes are implemented for n = 2, 3")
    interior, boundary = section.lattice_points()
    pts = sorted(section.from_chart(p) for p in interior + boundary)
    return SectionPolytope(section.gamma, section.chart, section.chart_inverse,
                           tuple(pts), section.polygon, section.interval)


def is_terminal(f: Fan) -> bool:
    """True iff the section polytope has no lattice points besides its vertices."""
    sec = section_polytope(f)
    interior, boundary = sec.lattice_points()
    if sec.polygon is not None:
        return not interior and len(boundary) == len(sec.polygon.vertices)
    return not interior


# ---------------------------------------------------------------------------
# Support functions


@dataclass(frozen=True)
class SupportFunction:
    """One linear functional per maximal cone, parallel to ``Fan.cones``."""

    functionals: tuple

    def __post_init__(self):
        object.__setattr__(self, "functionals",
                           tuple(eg.as_fractions(l) for l in self.functionals))

    @classmethod
    def zero(cls, f: Fan) -> "SupportFunction":
        return cls(tuple((0,) * f.lattice_dim for _ in f.cones))

    def ray_values(self, f: Fan) -> list[Fraction]:
        """h(u) for every ray u, checking agreement on shared rays."""
        if len(self.functionals) != len(f.cones):
            raise InconsistentSupportFunction(
                f"{len(self.functionals)} functionals for {len(f.cones)} cones")
        values: list = [None] * len(f.rays)
        for l, cone in zip(self.functionals, f.cones):
            den = math.lcm(*(x.denominator for x in l))
            lint = [int(x * den) for x in l]
            for j in cone:
                num = sum(a * b for a, b in zip(lint, f.rays[j]))
                if values[j] is None:
                    values[j] = (num, den)
                elif values[j][0] * den != num * values[j][1]:
                    raise InconsistentSupportFunction(
                        f"functionals disagree on ray {f.rays[j]}: "
                        f"{Fraction(*values[j])} vs {Fraction(num, den)}")
        return [Fraction(*v) if v is not None else None for v in values]

    def shifted(self, m) -> "SupportFunction":
        return SupportFunction(tuple(eg.add(l, eg.as_fractions(m)) for l in self.functionals))


@dataclass(frozen=True)
class SFProperties:
    convex: bool
    strictly_convex: bool
    compact: bool


def sf_properties(f: Fan, h: SupportFunction) -> SFProperties:
    """Convexity, strict convexity and compactness of ``h``, tested on rays exactly.

    Convex: <l_sigma, u> >= h(u) for every maximal sigma and ray u.  Strict:
    additionally > whenever u is not a ray of sigma.  Compact: h vanishes on
    the boundary rays.
    """
    values = h.ray_values(f)
    # clear denominators once so the comparisons below are integer arithmetic
    den = math.lcm(*(x.denominator for l in h.functionals for x in l),
                   *(Fraction(v).denominator for v in values))
    ivalues = [int(v * den) for v in values]
    convex = strict = True
    for l, cone in zip(h.functionals, f.cones):
        members = set(cone)
        lint = [int(x * den) for x in l]
        for j, u in enumerate(f.rays):
            diff = sum(a * b for a, b in zip(lint, u)) - ivalues[j]
            if diff < 0:
                convex = strict = False
            elif diff == 0 and j not in members:
                strict = False
    if f.boundary_rays is None:
        raise MissingBoundaryRays(
            "fan has no marked boundary rays; compactness is undefined")
    compact = all(values[j] == 0 for j in f.boundary_rays)
    return SFProperties(convex, strict, compact)
