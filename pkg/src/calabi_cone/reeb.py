"""Canonical symplectic potential, characteristic-polytope volume and Reeb vector search.

The objective minimized over Reeb vectors is the Euclidean volume of
``{y in C : <xi, y> <= 1/2}``, where ``C`` is the moment cone (the dual of the
cone spanned by the fan's generators).  Normalizing constants are dropped;
they do not move the minimizer.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import exactgeom as eg
from .errors import BoundaryPoint, NonConvergence, NotGorenstein, UnboundedRegion, UnsupportedDimension
from .fan import Cone, Fan, dual_cone, gorenstein_gamma

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ReebVector:
    xi: tuple
    normalized: bool = False


@dataclass(frozen=True)
class PotentialEvaluation:
    y: tuple
    hessian: tuple
    l_values: dict


@dataclass(frozen=True)
class VolumeMinimum:
    reeb: ReebVector
    volume: float
    grad_norm: float
    iterations: int
    evaluations: int


class Irregular:
    """Returned when no bounded-denominator rational vector reproduces xi."""

    def __init__(self, max_denominator: int):
        self.max_denominator = max_denominator

    def __repr__(self):
        return f"Irregular(max_denominator={self.max_denominator})"

    def __bool__(self):
        return False


def _xi_of(xi) -> tuple:
    return tuple(xi.xi) if isinstance(xi, ReebVector) else tuple(xi)


def _generators(f: Fan) -> list[tuple]:
    if f.boundary_rays is not None and not f.is_single_cone():
        return [f.rays[j] for j in f.boundary_rays]
    return list(f.rays)


# ---------------------------------------------------------------------------
# Symplectic potential


def canonical_hessian(f: Fan, xi, y) -> PotentialEvaluation:
    """Exact Hessian of the canonical potential G^can + G_xi at an interior point."""
    gens = _generators(f)
    xi = eg.as_fractions(_xi_of(xi))
    y = eg.as_fractions(y)
    n = len(y)
    lk = [eg.dot(u, y) for u in gens]
    if any(v <= 0 for v in lk):
        raise BoundaryPoint(f"y = {y} is not interior: l_k(y) = {lk}")
    l_xi = eg.dot(xi, y)
    if l_xi <= 0:
        raise BoundaryPoint(f"l_xi(y) = {l_xi} <= 0")
    usum = [sum(u[i] for u in gens) for i in range(n)]
    l_inf = sum(lk)
    hess = tuple(
        tuple(
            sum(Fraction(u[i] * u[j]) / l for u, l in zip(gens, lk)) / 2
            + xi[i] * xi[j] / l_xi / 2
            - Fraction(usum[i] * usum[j]) / l_inf / 2
            for j in range(n))
        for i in range(n))
    for k in range(1, n + 1):
        if eg.det([row[:k] for row in hess[:k]]) <= 0:
            raise AssertionError(f"Hessian not positive definite at y = {y}")
    return PotentialEvaluation(y, hess, {"l_k": tuple(lk), "l_xi": l_xi, "l_inf": l_inf})


def canonical_potential(f: Fan, xi, y) -> float:
    """Float value of G^can + G_xi, for finite-difference checks."""
    gens = _generators(f)
    xi = _xi_of(xi)
    y = [float(v) for v in y]

    def xlogx(t):
        return t * math.log(t)

    lk = [sum(a * b for a, b in zip(u, y)) for u in gens]
    l_xi = sum(float(a) * b for a, b in zip(xi, y))
    return 0.5 * sum(xlogx(l) for l in lk) + 0.5 * xlogx(l_xi) - 0.5 * xlogx(sum(lk))


def reeb_identity_check(f: Fan, xi, y) -> tuple:
    """Residual 2 H y - xi; identically zero for the canonical potential."""
    ev = canonical_hessian(f, xi, y)
    xi = eg.as_fractions(_xi_of(xi))
    return tuple(2 * eg.dot(row, ev.y) - x for row, x in zip(ev.hessian, xi))


# ---------------------------------------------------------------------------
# Characteristic polytope volume


@functools.lru_cache(maxsize=256)
def moment_cone_rays(gens: tuple) -> tuple:
    """Extremal rays of the moment cone, in cyclic order when n = 3."""
    rays = list(dual_cone(Cone(gens)).generators)
    if len(gens[0]) != 3:
        return tuple(rays)
    # consecutive rays share a facet, i.e. both annihilate a common generator
    order = [rays[0]]
    remaining = rays[1:]
    while remaining:
        last = order[-1]
        nxt = next(r for r in remaining
                   if any(eg.dot(u, r) == 0 and eg.dot(u, last) == 0 for u in gens))
        order.append(nxt)
        remaining.remove(nxt)
    return tuple(order)


def _check_interior(gens, xi) -> None:
    for r in moment_cone_rays(tuple(gens)):
        if eg.dot(r, xi) <= 0:
            raise UnboundedRegion(f"xi = {tuple(xi)} is not in the interior of the dual cone")


def char_volume(f: Fan, xi, check: bool = True):
    """Volume of the moment cone truncated by <xi, y> <= 1/2.

    Rational input gives an exact ``Fraction`` via vertex enumeration; float
    input is evaluated in floating point and, with ``check``, confirmed against
    an interval-arithmetic enclosure.
    """
    gens = tuple(_generators(f))
    xi = _xi_of(xi)
    if all(isinstance(x, (int, Fraction)) for x in xi):
        xi = eg.as_fractions(xi)
        _check_interior(gens, xi)
        normals = list(gens) + [eg.scale(-1, xi)]
        offsets = [0] * len(gens) + [Fraction(-1, 2)]
        return eg.polytope_volume(eg.halfspace_vertices(normals, offsets))
    xi = tuple(float(x) for x in xi)
    _check_interior(gens, xi)
    vol = _volume_float(gens, xi)
    if check:
        lo, hi = _volume_interval(gens, xi)
        if not (lo - 1e-15 * abs(hi) <= vol <= hi + 1e-15 * abs(hi)):
            raise AssertionError(f"float volume {vol} outside enclosure [{lo}, {hi}]")
    return vol


def _volume_float(gens, xi) -> float:
    """Pyramid from the origin over the cyclic polygon of scaled moment rays."""
    rays = moment_cone_rays(gens)
    if len(gens[0]) != 3:
        raise UnsupportedDimension("float volume implemented for n = 3")
    v = [np.asarray(r, dtype=float) / (2.0 * float(np.dot(r, xi))) for r in rays]
    total = 0.0
    for i in range(1, len(v) - 1):
        total += abs(np.linalg.det(np.array([v[0], v[i], v[i + 1]])))
    return total / 6.0


def volume_derivatives(gens, xi) -> tuple[float, np.ndarray, np.ndarray]:
    """Volume, gradient and Hessian in xi, in closed form (n = 3).

    The truncated cone is a pyramid over the polygon with vertices
    r / (2 <r, xi>), so the volume is a sum of terms D / (48 a b c) with
    a, b, c the pairings of three moment rays with xi.  For such a term
    grad = -T s and Hess = T (s s^T + sum r r^T / a^2), where s = sum r / a.
    """
    rays = [np.asarray(r, dtype=float) for r in moment_cone_rays(tuple(gens))]
    x = np.asarray(xi, dtype=float)
    vol, grad, hess = 0.0, np.zeros(3), np.zeros((3, 3))
    r0 = rays[0]
    for i in range(1, len(rays) - 1):
        tri = (r0, rays[i], rays[i + 1])
        dets = abs(np.linalg.det(np.array(tri)))
        pair = [float(r @ x) for r in tri]
        term = dets / (48.0 * pair[0] * pair[1] * pair[2])
        svec = sum(r / a for r, a in zip(tri, pair))
        vol += term
        grad -= term * svec
        hess += term * (np.outer(svec, svec) + sum(np.outer(r, r) / a ** 2 for r, a in zip(tri, pair)))
    return vol, grad, hess


def _volume_interval(gens, xi) -> tuple[float, float]:
    iv = mpmath.iv
    rays = moment_cone_rays(gens)
    x = [iv.mpf(c) for c in xi]
    verts = []
    for r in rays:
        s = 2 * sum(x[i] * r[i] for i in range(3))
        verts.append([r[i] / s for i in range(3)])
    total = iv.mpf(0)
    a = verts[0]
    for i in range(1, len(verts) - 1):
        b, c = verts[i], verts[i + 1]
        d = (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
             + a[2] * (b[0] * c[1] - b[1] * c[0]))
        total += abs(d)
    total /= 6
    return float(total.a), float(total.b)


# ---------------------------------------------------------------------------
# Minimization


def _golden_section(fn, lo, hi, xtol):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return (a + b) / 2


def _gauss_reduce(a, b):
    """Lagrange-Gauss reduction of a rank-2 integer basis (keeps the lattice it spans)."""
    if eg.dot(a, a) > eg.dot(b, b):
        a, b = b, a
    while True:
        k = round(Fraction(eg.dot(a, b), eg.dot(a, a)))
        b = eg.sub(b, eg.scale(k, a))
        if eg.dot(b, b) >= eg.dot(a, a):
            return [a, b]
        a, b = b, a


class _Reduced:
    """Volume as a function of two coordinates on the hyperplane <gamma, xi> = -n."""

    def __init__(self, f: Fan, threads: int = 1):
        gens = tuple(_generators(f))
        cert = gorenstein_gamma(f)
        if not cert.holds:
            raise NotGorenstein("volume minimization needs a Gorenstein cone")
        n = len(gens[0])
        if n != 3:
            raise UnsupportedDimension("volume minimization is implemented for n = 3")
        self.gens = gens
        # barycenter of the generators, rescaled onto <gamma, xi> = -n
        base = eg.scale(Fraction(n, len(gens)), tuple(sum(c) for c in zip(*gens)))
        self.base = tuple(float(x) for x in base)
        u, _ = eg.unimodular_last_column(eg.to_int_vector(cert.gamma))
        self.directions = _gauss_reduce(*(tuple(u[i][k] for i in range(n)) for k in range(n - 1)))
        self.rays = moment_cone_rays(gens)
        self.evaluations = 0
        self.threads = threads
        # work with V / V(base) so that tolerances are scale free
        self.scale = 1.0 / _volume_float(gens, self.base)

    def xi(self, p) -> tuple:
        return tuple(float(b + sum(c * d[i] for c, d in zip(p, self.directions)))
                     for i, b in enumerate(self.base))

    def feasible(self, p) -> bool:
        x = self.xi(p)
        return all(sum(a * b for a, b in zip(r, x)) > 0 for r in self.rays)

    def __call__(self, p) -> float:
        self.evaluations += 1
        if not self.feasible(p):
            return math.inf
        return self.scale * _volume_float(self.gens, self.xi(p))

    def many(self, points) -> list[float]:
        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                return list(pool.map(self, points))
        return [self(p) for p in points]

    def line_bounds(self, p, k) -> tuple[float, float]:
        """Open interval of t for which p + t e_k stays feasible."""
        x = self.xi(p)
        d = self.directions[k]
        lo, hi = -math.inf, math.inf
        for r in self.rays:
            c0 = sum(a * b for a, b in zip(r, x))
            c1 = sum(a * b for a, b in zip(r, d))
            if c1 > 0:
                lo = max(lo, -c0 / c1)
            elif c1 < 0:
                hi = min(hi, -c0 / c1)
        return lo, hi

    def grad_hess(self, p):
        """Closed-form reduced gradient and Hessian."""
        self.evaluations += 1
        _, g, h = volume_derivatives(self.gens, self.xi(p))
        d = np.array(self.directions, dtype=float).T
        return self.scale * (d.T @ g), self.scale * (d.T @ h @ d)

    def fd_grad_hess(self, p, h_g=1e-5, h_h=1e-4):
        """Central finite-difference gradient and Hessian (stencil evaluated via ``many``)."""
        e = [(1.0, 0.0), (0.0, 1.0)]
        pts = []
        for k in range(2):
            pts.append(tuple(p[i] + h_g * e[k][i] for i in range(2)))
            pts.append(tuple(p[i] - h_g * e[k][i] for i in range(2)))
        for k in range(2):
            pts.append(tuple(p[i] + h_h * e[k][i] for i in range(2)))
            pts.append(tuple(p[i] - h_h * e[k][i] for i in range(2)))
        pts.append((p[0] + h_h, p[1] + h_h))
        pts.append((p[0] + h_h, p[1] - h_h))
        pts.append((p[0] - h_h, p[1] + h_h))
        pts.append((p[0] - h_h, p[1] - h_h))
        vals = self.many(pts)
        f0 = self(p)
        g = np.array([(vals[0] - vals[1]) / (2 * h_g), (vals[2] - vals[3]) / (2 * h_g)])
        hxx = (vals[4] - 2 * f0 + vals[5]) / h_h ** 2
        hyy = (vals[6] - 2 * f0 + vals[7]) / h_h ** 2
        hxy = (vals[8] - vals[9] - vals[10] + vals[11]) / (4 * h_h ** 2)
        return g, np.array([[hxx, hxy], [hxy, hyy]])


def _backtrack(obj, p, step):
    f0 = obj(p)
    t = 1.0
    while t > 1e-12:
        q = [p[0] + t * step[0], p[1] + t * step[1]]
        if obj(q) <= f0 + 1e-15 * abs(f0):
            return q
        t /= 2
    return None


def minimize_volume(f: Fan, tol: float = 1e-10, max_iter: int = 100,
                    sweeps: int = 8, threads: int = 1,
                    derivatives: str = "analytic") -> VolumeMinimum:
    """Reeb vector minimizing the characteristic volume subject to <gamma, xi> = -3.

    Starts at the barycenter of the generators, runs coordinate descent with
    golden-section line searches and finishes with Newton steps until the
    reduced gradient of V / V(start) is below ``tol``.  ``derivatives`` picks
    closed-form ("analytic") or finite-difference ("fd") Newton derivatives;
    the latter is limited to roughly 1e-8 accuracy in xi.
    """
    if derivatives not in ("analytic", "fd"):
        raise ValueError(f"derivatives must be 'analytic' or 'fd', got {derivatives!r}")
    obj = _Reduced(f, threads=threads)
    p = [0.0, 0.0]
    for _ in range(sweeps):
        for k in range(2):
            lo, hi = obj.line_bounds(p, k)
            width = hi - lo
            if not math.isfinite(width):
                raise UnboundedRegion("reduced domain is unbounded")
            a, b = lo + 1e-9 * width, hi - 1e-9 * width

            def along(t, k=k):
                q = list(p)
                q[k] = t
                return obj(q)

            p[k] = _golden_section(along, a, b, 1e-7 * width)
    best = (obj(p), tuple(p))
    grad_norm = math.inf
    for it in range(1, max_iter + 1):
        g, hmat = obj.grad_hess(p) if derivatives == "analytic" else obj.fd_grad_hess(p)
        grad_norm = float(np.linalg.norm(g))
        if grad_norm < tol:
            xi = obj.xi(p)
            return VolumeMinimum(ReebVector(xi, True), obj(p) / obj.scale, grad_norm, it,
                                 obj.evaluations)
        try:
            step = -np.linalg.solve(hmat, g)
        except np.linalg.LinAlgError:
            step = -g
        full = [p[0] + step[0], p[1] + step[1]]
        if -float(g @ step) < 1e-12 and obj.feasible(full):
            # quadratic regime: the predicted decrease is too small for value comparisons
            q = full
        else:
            q = _backtrack(obj, p, step)
            if q is None:
                break
        p = q
        if obj(p) < best[0]:
            best = (obj(p), tuple(p))
    raise NonConvergence(
        f"reduced gradient norm {grad_norm:.3e} >= {tol:.1e} after {max_iter} iterations",
        best=ReebVector(obj.xi(best[1]), True))


def quasi_regularity(xi, max_denominator: int = 10 ** 4, tol: float = 1e-11):
    """Rational vector with common denominator <= max_denominator within 10*tol of xi.

    Returns a tuple of Fractions, or an :class:`Irregular` instance.  Failure
    only means no such approximation exists; irrationality is never claimed.
    """
    x = np.asarray([float(v) for v in _xi_of(xi)])
    window = 10 * tol
    qs = np.arange(1, max_denominator + 1, dtype=float)
    num = np.rint(np.outer(qs, x))
    err = np.max(np.abs(num / qs[:, None] - x[None, :]), axis=1)
    hits = np.nonzero(err <= window)[0]
    if hits.size == 0:
        return Irregular(max_denominator)
    q = int(qs[hits[0]])
    return tuple(Fraction(int(v), q) for v in num[hits[0]])
