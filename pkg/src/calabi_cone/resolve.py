"""Crepant resolutions of 3-dimensional Gorenstein toric cones.

The driver refines the cone by successive star subdivisions at the lattice
points of the section polytope, carrying along a compact strictly convex
support function.  Each step takes the functional of the subdivided cone and
adds a correction vanishing on the untouched facet and equal to ``eps`` at the
new ray; ``eps`` starts at 1 and is halved until strict convexity is verified.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import exactgeom as eg
from .errors import (
    AmbiguousLocation,
    BadParameters,
    GeneratorOffHyperplane,
    InvalidFan,
    NonIsolated,
    NotGorenstein,
    NotGorensteinGroup,
    NotInSupport,
    RayAlreadyPresent,
    TerminalSingularity,
    UnsupportedDimension,
)
from .fan import (
    Fan,
    SectionPolytope,
    SupportFunction,
    facet_normals,
    gorenstein_gamma,
    in_cone,
    section_polytope,
    sf_properties,
)

MAX_HALVINGS = 64


@dataclass(frozen=True)
class ResolutionResult:
    refined_fan: Fan
    support_fn: SupportFunction
    epsilons: tuple
    inserted_rays: tuple
    c_X: int
    euler: int
    gamma: tuple
    compact_class_exists: bool = True
    small_resolution: bool = False

    def flags(self) -> dict:
        props = sf_properties(self.refined_fan, self.support_fn)
        return {
            "smooth": all(eg.lattice_index(self.refined_fan.cone_rays(i)) == 1
                          for i in range(len(self.refined_fan.cones))),
            "convex": props.convex,
            "strictly_convex": props.strictly_convex,
            "compact": props.compact,
            "compact_class_exists": self.compact_class_exists,
            "small_resolution": self.small_resolution,
        }

    def to_dict(self) -> dict:
        return {
            "rays": [list(r) for r in self.refined_fan.rays],
            "cones": [list(c) for c in self.refined_fan.cones],
            "boundary_rays": list(self.refined_fan.boundary_rays or ()),
            "support_fn": [[str(x) for x in l] for l in self.support_fn.functionals],
            "epsilons": [str(e) for e in self.epsilons],
            "inserted_rays": [list(r) for r in self.inserted_rays],
            "c_X": self.c_X,
            "euler": self.euler,
            "flags": self.flags(),
        }


# ---------------------------------------------------------------------------
# Star subdivision


def _cone_facets(rays: list[tuple]) -> list[tuple[tuple, list[int]]]:
    """(inward normal, member positions) for each facet of a full-dimensional cone."""
    out = []
    for nrm in facet_normals(rays):
        members = [i for i, r in enumerate(rays) if eg.dot(nrm, r) == 0]
        out.append((nrm, members))
    return out


def _face_dimension(u, rays: list[tuple]) -> int:
    """Dimension of the face of cone(rays) containing ``u`` in its relative interior."""
    face = list(rays)
    for nrm in facet_normals(rays):
        if eg.dot(nrm, u) == 0:
            face = [r for r in face if eg.dot(nrm, r) == 0]
    return eg.rank(face)


def star_subdivide(f: Fan, h: SupportFunction, u: Sequence[int], eps,
                   crepant: bool = True) -> tuple[Fan, SupportFunction]:
    """Star subdivision of ``f`` at the ray through ``u`` with support-function update.

    Every maximal cone containing ``u`` is replaced by the cones spanned by
    ``u`` and those of its facets that miss ``u``.  On each new cone the
    functional is the old one plus a correction vanishing on the facet and
    taking the value ``eps`` at ``u``.
    """
    u = tuple(int(x) for x in u)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if len(u) != f.lattice_dim:
        raise ValueError(f"vector {u} has wrong dimension")
    prim, mult = eg.primitive_of(u)
    if u in f.rays:
        raise RayAlreadyPresent(f"{u} is already a ray")
    if mult != 1:
        if prim in f.rays:
            raise AmbiguousLocation(f"{u} lies on the ray through {prim}")
        raise ValueError(f"{u} is not primitive")
    if crepant:
        cert = gorenstein_gamma(f)
        if not cert.holds:
            raise NotGorenstein("crepant insertion needs a Gorenstein fan")
        if eg.dot(cert.gamma, u) != -1:
            raise GeneratorOffHyperplane(
                f"<gamma, u> = {eg.dot(cert.gamma, u)} != -1 for u = {u}")

    containing = [i for i in range(len(f.cones)) if in_cone(u, f.cone_rays(i))]
    if not containing:
        raise NotInSupport(f"{u} is not in the support of the fan")
    if _face_dimension(u, f.cone_rays(containing[0])) <= 1:
        raise AmbiguousLocation(f"{u} lies on a ray of the fan")

    values = h.ray_values(f)
    new_index = len(f.rays)
    rays = f.rays + (u,)
    cones, functionals = [], []
    for i, cone in enumerate(f.cones):
        l_old = h.functionals[i]
        if i not in containing:
            cones.append(cone)
            functionals.append(l_old)
            continue
        cone_rays = f.cone_rays(i)
        for nrm, members in _cone_facets(cone_rays):
            if eg.dot(nrm, u) == 0:
                continue
            facet = [cone[m] for m in members]
            basis = []
            for j in facet:
                if eg.rank([f.rays[b] for b in basis] + [f.rays[j]]) > len(basis):
                    basis.append(j)
            a = [f.rays[j] for j in basis] + [u]
            b = [values[j] for j in basis] + [eg.dot(l_old, u) + eps]
            l_new = eg.solve(a, b)
            if any(eg.dot(l_new, f.rays[j]) != values[j] for j in facet):
                raise InvalidFan("non-simplicial facet with inconsistent values")
            cones.append(tuple(sorted(facet)) + (new_index,))
            functionals.append(l_new)
    new_fan = Fan(f.lattice_dim, rays, tuple(cones), f.boundary_rays)
    return new_fan, SupportFunction(tuple(functionals))


# ---------------------------------------------------------------------------
# Resolution driver


def _eps_bound(f2, h1, h_half):
    """Supremum of the eps keeping the subdivided support function strictly convex.

    The new functionals are affine in eps, so every condition
    <l_sigma, v> > h(v) reads a + b eps > 0 with a >= 0.  Returns None if some
    condition fails for every eps and ``math.inf`` if nothing bounds eps.
    """
    slope = [eg.scale(2, eg.sub(a, b)) for a, b in zip(h1.functionals, h_half.functionals)]
    base = [eg.sub(a, s) for a, s in zip(h1.functionals, slope)]
    v1, v_half = h1.ray_values(f2), h_half.ray_values(f2)
    vslope = [2 * (a - b) for a, b in zip(v1, v_half)]
    vbase = [a - s for a, s in zip(v1, vslope)]
    bound = math.inf
    new_ray = len(f2.rays) - 1
    for l0, ls, cone in zip(base, slope, f2.cones):
        members = set(cone)
        # conditions between untouched cones and old rays do not involve eps
        rows = range(len(f2.rays)) if any(ls) else (new_ray,)
        for j in rows:
            if j in members:
                continue
            u = f2.rays[j]
            a = eg.dot(l0, u) - vbase[j]
            b = eg.dot(ls, u) - vslope[j]
            if a <= 0 and b <= 0:
                return None
            if a <= 0:
                continue
            if b < 0:
                bound = min(bound, -a / b)
    return bound


def _insert_strictly_convex(f, h, u):
    f2, h1 = star_subdivide(f, h, u, 1)
    _, h_half = star_subdivide(f, h, u, Fraction(1, 2))
    bound = _eps_bound(f2, h1, h_half)
    if bound is not None:
        # same eps as trying 1, 1/2, 1/4, ... in turn
        eps = Fraction(1)
        for _ in range(MAX_HALVINGS):
            if eps < bound:
                lin = [eg.add(eg.scale(2 * eps - 1, a), eg.scale(2 - 2 * eps, b))
                       for a, b in zip(h1.functionals, h_half.functionals)]
                h2 = SupportFunction(tuple(lin))
                props = sf_properties(f2, h2)
                if props.strictly_convex and props.compact:
                    return f2, h2, eps
                break
            eps /= 2
    raise AssertionError(f"no admissible eps found when inserting {u}")


def crepant_resolve(f: Fan, allow_small: bool = False) -> ResolutionResult:
    """Crepant resolution of a Gorenstein cone by a basic triangulation of its section.

    Interior lattice points of the section are inserted first (lexicographic
    in the chart), then the remaining non-vertex boundary lattice points.
    Terminal non-smooth inputs raise :class:`TerminalSingularity` unless
    ``allow_small`` is set, in which case a small resolution without a compact
    Kahler class is returned.
    """
    if f.lattice_dim not in (2, 3):
        raise UnsupportedDimension(f"crepant_resolve handles n = 2, 3, not {f.lattice_dim}")
    if not f.is_single_cone():
        raise InvalidFan("crepant_resolve expects the fan of a single cone")
    cert = gorenstein_gamma(f)
    if not cert.holds:
        raise NotGorenstein(f"no integral gamma with <gamma, u> = -1 for rays {f.rays}")
    sec = section_polytope(f, cert)
    interior, boundary = sec.lattice_points()
    vertex_charts = {sec.to_chart(r) for r in f.rays}
    edge_points = [p for p in boundary if p not in vertex_charts]
    h = SupportFunction.zero(f)

    if not interior and not edge_points:
        if sec.doubled_area() == 1:
            result = ResolutionResult(f, h, (), (), 0, 1, cert.gamma)
            verify_resolution(f, result, sec)
            return result
        if not allow_small:
            raise TerminalSingularity(
                "terminal singular cone: no crepant resolution with a compact "
                "strictly convex support function")
        return _small_resolution(f, sec, cert.gamma)

    eps_list, inserted = [], []
    refined = f
    for p in interior + edge_points:
        u = sec.from_chart(p)
        refined, h, eps = _insert_strictly_convex(refined, h, u)
        eps_list.append(eps)
        inserted.append(u)
    result = ResolutionResult(refined, h, tuple(eps_list), tuple(inserted),
                              len(interior), len(refined.cones), cert.gamma)
    verify_resolution(f, result, sec)
    return result


def _small_resolution(f: Fan, sec: SectionPolytope, gamma) -> ResolutionResult:
    """Split the terminal quadrilateral along a diagonal."""
    order = [sec.from_chart(v) for v in sec.polygon.vertices]
    if len(order) != 4:
        raise TerminalSingularity("small resolution implemented for quadrilateral sections only")
    idx = [f.rays.index(r) for r in order]
    cones = ((idx[0], idx[1], idx[2]), (idx[0], idx[2], idx[3]))
    refined = Fan(f.lattice_dim, f.rays, cones, f.boundary_rays)
    # zero on the first triangle; on the second, vanish on the diagonal and -1 at the far vertex
    l2 = eg.solve([order[0], order[2], order[3]], [0, 0, -1])
    h = SupportFunction(((0,) * f.lattice_dim, l2))
    result = ResolutionResult(refined, h, (), (), 0, 2, gamma,
                              compact_class_exists=False, small_resolution=True)
    verify_resolution(f, result, sec, require_compact=False)
    return result


def verify_resolution(original: Fan, result: ResolutionResult, sec: SectionPolytope,
                      require_compact: bool = True) -> None:
    """Exact a-posteriori checks; raises AssertionError on failure."""
    fan = result.refined_fan
    for r in result.inserted_rays:
        if eg.dot(result.gamma, r) != -1:
            raise AssertionError(f"inserted ray {r} is not crepant")
    for i in range(len(fan.cones)):
        if eg.lattice_index(fan.cone_rays(i)) != 1:
            raise AssertionError(f"cone {fan.cones[i]} is not unimodular")
    props = sf_properties(fan, result.support_fn)
    if not props.strictly_convex or (require_compact and not props.compact):
        raise AssertionError(f"support function fails: {props}")
    if not all(r in fan.rays for r in original.rays):
        raise AssertionError("original generators lost")
    check_section_triangulation(fan, sec)


def check_section_triangulation(fan: Fan, sec: SectionPolytope) -> None:
    """Certify that the maximal cones cut a triangulation of the section polytope.

    All simplices must be positively oriented after sorting, their normalized
    volumes must add up to that of the section, and the directed boundary
    edges that do not cancel must chain exactly around the section boundary.
    """
    charts = [sec.to_chart(r) for r in fan.rays]
    if sec.polygon is None:
        segs = sorted(tuple(sorted(charts[j][0] for j in c)) for c in fan.cones)
        lo, hi = sec.interval
        pos = lo
        for a, b in segs:
            if a != pos or b <= a:
                raise AssertionError(f"segments {segs} do not tile [{lo}, {hi}]")
            pos = b
        if pos != hi:
            raise AssertionError(f"segments {segs} do not tile [{lo}, {hi}]")
        return
    directed = defaultdict(int)
    total = 0
    for c in fan.cones:
        if len(c) != 3:
            raise AssertionError(f"cone {c} is not a triangle")
        a, b, d = (charts[j] for j in c)
        area = eg.cross2(a, b, d)
        if area == 0:
            raise AssertionError(f"degenerate triangle {c}")
        if area < 0:
            b, d = d, b
        total += abs(area)
        for p, q in ((a, b), (b, d), (d, a)):
            directed[(p, q)] += 1
    if total != sec.doubled_area():
        raise AssertionError(f"triangle areas {total} != section area {sec.doubled_area()}")
    remaining = []
    for (p, q), k in directed.items():
        back = directed.get((q, p), 0)
        if k > 1 or back > 1:
            raise AssertionError(f"edge {p}-{q} used more than twice")
        if back == 0:
            remaining.append((p, q))
    for a, b in sec.polygon.edges():
        on_edge = sorted((p, q) for p, q in remaining
                         if eg.cross2(a, b, p) == 0 and eg.cross2(a, b, q) == 0)
        nxt = {p: q for p, q in on_edge}
        pos, steps = a, 0
        while pos != b and pos in nxt and steps <= len(on_edge):
            pos, steps = nxt[pos], steps + 1
        if pos != b or steps != len(on_edge):
            raise AssertionError(f"boundary edge {a}-{b} is not tiled")
    n_boundary = sum(1 for p, q in remaining
                     if any(eg.cross2(a, b, p) == 0 and eg.cross2(a, b, q) == 0
                            for a, b in sec.polygon.edges()))
    if n_boundary != len(remaining):
        raise AssertionError("uncancelled edges inside the section")


# ---------------------------------------------------------------------------
# Invariants


def toric_invariants(original: Fan, result: ResolutionResult) -> dict:
    """Betti numbers of the resolution and its link.

    For an isolated singularity (no lattice points in the relative interior
    of section edges) b2 = (d - 3) + c and b4 = c.  Edge points add
    non-compact divisors, so in general b2 = (d - 3) + c + e.  Both are
    cross-checked against the refined fan (b2 = #rays - n, chi = #maximal
    cones).
    """
    n = original.lattice_dim
    d = len(original.rays)
    c = result.c_X
    fan = result.refined_fan
    chi = len(fan.cones)
    if n != 3:
        return {"c_X": c, "euler": chi, "b2_S": None, "b2_Y": len(fan.rays) - n}
    e = len(result.inserted_rays) - c
    b2_link = d - 3
    b2 = b2_link + c + e
    b4 = c
    b2_fan = len(fan.rays) - n
    b4_fan = chi - 1 - b2_fan
    return {
        "c_X": c,
        "euler": chi,
        "edge_points": e,
        "isolated": e == 0,
        "b2_S": b2_link if e == 0 else None,
        "b2_Y": b2,
        "b4_Y": b4,
        "b2_Y_from_fan": b2_fan,
        "b4_Y_from_fan": b4_fan,
        "betti_relation_holds": e == 0 and b2 == b2_link + b4,
        "consistent": (b2, b4, 1 + b2 + b4) == (b2_fan, b4_fan, chi),
    }


# ---------------------------------------------------------------------------
# Fan builders


@dataclass(frozen=True)
class QuotientSpec:
    """Abelian G acting diagonally on C^n, given by generators of Z_T / Z^n."""

    n: int
    group_order: int
    weight_vectors: tuple
    isolated: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weight_vectors",
                           tuple(eg.as_fractions(w) for w in self.weight_vectors))

    @classmethod
    def cyclic(cls, m: int, weights: Sequence[int], isolated: bool = True) -> "QuotientSpec":
        """Z_m acting with weights (a_1, ..., a_n) / m."""
        return cls(len(weights), m, (tuple(Fraction(a, m) for a in weights),), isolated)


def _group_elements(weights, n) -> set:
    zero = (Fraction(0),) * n
    seen = {zero}
    frontier = [zero]
    while frontier:
        g = frontier.pop()
        for w in weights:
            h = tuple((a + b) % 1 for a, b in zip(g, w))
            if h not in seen:
                seen.add(h)
                frontier.append(h)
    return seen


def quotient_fan(q: QuotientSpec) -> Fan:
    """Fan of C^n / G in the lattice Z_T = Z^n + sum Z w_i."""
    if q.n not in (2, 3):
        raise UnsupportedDimension("quotient_fan supports n = 2, 3")
    for w in q.weight_vectors:
        if len(w) != q.n:
            raise BadParameters(f"weight vector {w} has wrong length")
        if sum(w).denominator != 1:
            raise NotGorensteinGroup(f"weights {w} do not sum to an integer")
    elements = _group_elements(q.weight_vectors, q.n)
    if len(elements) != q.group_order:
        raise BadParameters(
            f"weights generate a group of order {len(elements)}, not {q.group_order}")
    if q.isolated:
        for g in elements:
            if any(g) and any(x == 0 for x in g):
                raise NonIsolated(f"element {g} fixes a coordinate subspace")
    den = math.lcm(1, *(x.denominator for w in q.weight_vectors for x in w))
    gens = [tuple(den * int(i == j) for j in range(q.n)) for i in range(q.n)]
    gens += [tuple(int(den * x) for x in w) for w in q.weight_vectors]
    basis = eg.hermite_basis(gens)
    inv = eg.inverse(basis)
    # e_k has coordinates den * (row k of B^{-1}) in the basis B / den of Z_T
    rays = [eg.primitive_of(eg.to_int_vector(eg.scale(den, row)))[0] for row in inv]
    return Fan.from_cone(rays)


def spq_fan(p: int, q: int) -> Fan:
    """The four-ray cone over S^{p,q}."""
    if not (isinstance(p, int) and isinstance(q, int)) or not (p > q > 0) or math.gcd(p, q) != 1:
        raise BadParameters(f"need p > q > 0 coprime, got p={p}, q={q}")
    return Fan.from_cone([(0, 0, 1), (1, 0, 1), (p, p, 1), (p - q - 1, p - q, 1)])


def spq_quasi_regular(p: int, q: int) -> int | None:
    """r with 4p^2 - 3q^2 = r^2 if it exists (quasi-regular), else None."""
    disc = 4 * p * p - 3 * q * q
    r = math.isqrt(disc)
    return r if r * r == disc else None
