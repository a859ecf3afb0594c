"""Topology of links of quasi-homogeneous hypersurface singularities.

Covers the graded Milnor algebra of a weighted homogeneous polynomial,
Steenbrink's primitive Hodge numbers, Kollár's cohomology table for smooth
Seifert circle bundles over surfaces, weighted blow-up discrepancies and the
bookkeeping for the Brieskorn-Pham families whose iterated crepant blow-ups
terminate in a smooth resolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

from .errors import (BadParameters, BadResidue, NotIsolatedSingularity, NotQuasiHomogeneous,
                     UnknownFamily, UnresolvedResidual)


def _lcm(values) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


@dataclass(frozen=True)
class WeightedHypersurface:
    """Weighted homogeneous hypersurface ``f(l^w x) = l^d f(x)``.

    ``exponents`` is given for a Brieskorn-Pham polynomial ``sum x_i^{a_i}``.
    """

    weights: tuple
    degree: int
    exponents: Optional[tuple] = None

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w or any(x <= 0 for x in w):
            raise NotQuasiHomogeneous(f"weights must be positive, got {w}")
        if reduce(math.gcd, w) != 1:
            raise NotQuasiHomogeneous(f"weights {w} are not normalized (gcd != 1)")
        if self.degree <= 0:
            raise NotQuasiHomogeneous(f"degree must be positive, got {self.degree}")
        if self.exponents is not None:
            a = tuple(int(x) for x in self.exponents)
            object.__setattr__(self, "exponents", a)
            if len(a) != len(w):
                raise NotQuasiHomogeneous("exponents and weights differ in length")
            bad = [i for i in range(len(w)) if a[i] * w[i] != self.degree]
            if bad:
                raise NotQuasiHomogeneous(
                    f"a_i w_i != d at positions {bad}: a={a}, w={w}, d={self.degree}")

    @classmethod
    def brieskorn_pham(cls, exponents: Sequence[int]) -> "WeightedHypersurface":
        """Normalized weights of ``sum x_i^{a_i}``: d = lcm(a), w_i = d / a_i."""
        if any(a < 2 for a in exponents):
            raise NotQuasiHomogeneous(f"exponents must be at least 2, got {tuple(exponents)}")
        d = _lcm(exponents)
        return cls(tuple(d // a for a in exponents), d, tuple(exponents))

    @property
    def nvars(self) -> int:
        return len(self.weights)

    @property
    def weight_sum(self) -> int:
        return sum(self.weights)

    @property
    def is_canonical(self) -> bool:
        """|w| > d: the singularity is rational (canonical)."""
        return self.weight_sum > self.degree

    def milnor_number(self) -> int:
        return math.prod(Fraction(self.degree - w, w) for w in self.weights).numerator


@dataclass(frozen=True)
class PoincareSeries:
    coefficients: tuple

    def __getitem__(self, j: int) -> int:
        if j < 0 or j >= len(self.coefficients):
            return 0
        return self.coefficients[j]

    @property
    def total(self) -> int:
        return sum(self.coefficients)

    @property
    def top_degree(self) -> int:
        return len(self.coefficients) - 1

    def is_palindromic(self) -> bool:
        return self.coefficients == self.coefficients[::-1]


def _polymul(p: list, q: list) -> list:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _divide_by_binomial(p: list, w: int) -> list:
    """Exact quotient of p by (t^w - 1); raises if the remainder is nonzero."""
    p = list(p)
    deg = len(p) - 1
    if deg < w:
        raise NotIsolatedSingularity("product formula does not give a polynomial")
    quot = [0] * (deg - w + 1)
    for j in range(deg, w - 1, -1):
        c = p[j]
        quot[j - w] = c
        p[j] -= c
        p[j - w] += c
    if any(p):
        raise NotIsolatedSingularity("product formula does not give a polynomial")
    return quot


def milnor_poincare(h: WeightedHypersurface, product_formula: bool = False) -> PoincareSeries:
    """Graded dimensions of the Milnor algebra.

    For Brieskorn-Pham data the Jacobian ideal is monomial, and the series is
    the product of truncated geometric series.  With ``product_formula`` the
    series is ``prod (t^{d-w_i} - 1)/(t^{w_i} - 1)``, valid for any weighted
    homogeneous isolated singularity (the caller vouches for isolatedness).
    """
    if not product_formula:
        if h.exponents is None:
            raise NotIsolatedSingularity(
                "no exponents given; pass product_formula=True for general weights")
        series = [1]
        for w, a in zip(h.weights, h.exponents):
            factor = [0] * (w * (a - 2) + 1)
            for e in range(a - 1):
                factor[w * e] = 1
            series = _polymul(series, factor)
        return PoincareSeries(tuple(series))
    d = h.degree
    if any(d <= w for w in h.weights):
        raise NotIsolatedSingularity(f"a weight reaches the degree: w={h.weights}, d={d}")
    num = [1]
    for w in h.weights:
        factor = [0] * (d - w + 1)
        factor[0], factor[-1] = -1, 1
        num = _polymul(num, factor)
    for w in h.weights:
        num = _divide_by_binomial(num, w)
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    if any(c < 0 for c in num):
        raise NotIsolatedSingularity("product formula has negative coefficients")
    return PoincareSeries(tuple(num))


def steenbrink_hodge(h: WeightedHypersurface, n: int, product_formula: bool = False) -> list[int]:
    """Primitive Hodge numbers ``h_0^{i, n-i}`` for i = 0..n.

    ``n`` is the dimension of the projective hypersurface in weighted
    projective space, so ``h.nvars == n + 2``.
    """
    series = milnor_poincare(h, product_formula=product_formula)
    return [series[(i + 1) * h.degree - h.weight_sum] for i in range(n + 1)]


def base_rank(h: WeightedHypersurface, product_formula: bool = False) -> int:
    """Rank of H^2 of the surface leaf space: hyperplane class plus primitive part."""
    if h.nvars != 4:
        raise BadParameters("base_rank needs a surface in a 3-dimensional weighted projective space")
    return 1 + sum(steenbrink_hodge(h, 2, product_formula=product_formula))


# ---------------------------------------------------------------------------
# Finitely generated abelian groups and Seifert bundles


@dataclass(frozen=True)
class AbelianGroup:
    """``Z^rank`` plus cyclic torsion, stored as sorted (order, multiplicity) pairs."""

    rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        counts: dict[int, int] = {}
        for order, mult in self.torsion:
            if order < 1 or mult < 0:
                raise BadParameters(f"bad torsion summand Z_{order}^{mult}")
            if order > 1 and mult > 0:
                counts[order] = counts.get(order, 0) + mult
        object.__setattr__(self, "torsion", tuple(sorted(counts.items())))

    def __add__(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup(self.rank + other.rank, self.torsion + other.torsion)

    @property
    def torsion_order(self) -> int:
        return math.prod(m ** e for m, e in self.torsion)

    def __str__(self):
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        for m, e in self.torsion:
            parts.append(f"Z_{m}" if e == 1 else f"Z_{m}^{e}")
        return "⊕".join(parts) if parts else "0"

    def to_dict(self) -> dict:
        return {"rank": self.rank, "torsion": [list(t) for t in self.torsion], "text": str(self)}


@dataclass(frozen=True)
class SeifertData:
    s: int
    d_div: int = 1
    branch: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "branch", tuple((int(m), int(g)) for m, g in self.branch))
        if self.s < 1 or self.d_div < 1:
            raise BadParameters(f"need s >= 1 and d >= 1, got s={self.s}, d={self.d_div}")
        for m, g in self.branch:
            if m < 2 or g < 0:
                raise BadParameters(f"branch divisor needs m >= 2 and g >= 0, got ({m}, {g})")


def seifert_cohomology(sd: SeifertData) -> dict:
    """Integral cohomology H^0..H^5 of a smooth Seifert bundle over a surface orbifold.

    The returned dict also carries ``"H_2"``, equal to ``H^3`` by Poincaré
    duality on the closed oriented 5-manifold.
    """
    free = sd.s - 1
    h2 = AbelianGroup(free, ((sd.d_div, 1),))
    h3 = AbelianGroup(free, tuple((m, 2 * g) for m, g in sd.branch))
    table = {
        "H^0": AbelianGroup(1),
        "H^1": AbelianGroup(0),
        "H^2": h2,
        "H^3": h3,
        "H^4": AbelianGroup(0, ((sd.d_div, 1),)),
        "H^5": AbelianGroup(1),
    }
    table["H_2"] = h3
    return table


# ---------------------------------------------------------------------------
# Blow-ups and families


def weighted_degree(weights: Sequence[int], exponents: Sequence[int]) -> int:
    """Minimal weighted degree of the terms x_i^{a_i}."""
    return min(w * a for w, a in zip(weights, exponents))


def blowup_discrepancy(blowup_weights: Sequence[int], f_degree: int) -> int:
    """Coefficient of the exceptional divisor: |w| - w(f) - 1 (zero means crepant)."""
    if any(w <= 0 for w in blowup_weights):
        raise BadParameters(f"blow-up weights must be positive, got {tuple(blowup_weights)}")
    return sum(blowup_weights) - f_degree - 1


@dataclass(frozen=True)
class _Family:
    name: str
    fixed: tuple          # exponents of x_0..x_{n-1}
    blowup: tuple         # weights of the repeated blow-up
    step: int
    genus: int            # genus of the branch curve {x_n = 0}
    status: dict          # residue -> "yes" | "no" | "unknown"


FAMILIES = {
    "cubic": _Family("cubic", (3, 3, 3), (1, 1, 1, 1), 3, 1,
                     {0: "yes", 1: "yes", 2: "no"}),
    "quartic": _Family("quartic", (2, 4, 4), (2, 1, 1, 1), 4, 1,
                       {0: "yes", 1: "yes", 2: "unknown", 3: "no"}),
    "sextic": _Family("sextic", (2, 3, 6), (3, 2, 1, 1), 6, 1,
                      {0: "yes", 1: "yes", 2: "unknown", 3: "unknown", 4: "unknown", 5: "no"}),
}


@dataclass
class FamilyReport:
    family: str
    k: int
    c_X: Optional[int]
    b3: Optional[int]
    H2: Optional[AbelianGroup]
    blowup_sequence: list = field(default_factory=list)
    smooth: bool = False
    crepant_resolution: str = "yes"
    euler: Optional[int] = None
    n: int = 3
    middle_homology: Optional[dict] = None
    notes: list = field(default_factory=list)

    @property
    def H2_description(self) -> str:
        return str(self.H2) if self.H2 is not None else "unknown"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "k": self.k,
            "c_X": self.c_X,
            "b3": self.b3,
            "b3_source": "table formula",
            "H2": self.H2.to_dict() if self.H2 is not None else None,
            "H2_description": self.H2_description,
            "smooth": self.smooth,
            "crepant_resolution": self.crepant_resolution,
            "euler": self.euler,
            "middle_homology": self.middle_homology,
            "blowup_sequence": [
                {"weights": list(w) if w is not None else None, "discrepancy": disc, "residual": res}
                for w, disc, res in self.blowup_sequence],
            "notes": list(self.notes),
        }


def branch_divisors(h: WeightedHypersurface, genera: dict) -> list[tuple[int, int]]:
    """Branch data (m, g) from coordinate hyperplanes whose complementary weights share a factor.

    ``genera`` maps a coordinate index to the genus of the curve cut out by
    that hyperplane; it must be supplied by the caller for every index with
    a nontrivial multiplicity.
    """
    out = []
    for i in range(h.nvars):
        m = reduce(math.gcd, (w for j, w in enumerate(h.weights) if j != i))
        if m >= 2:
            if i not in genera:
                raise BadParameters(f"genus of the branch curve x_{i} = 0 is not known")
            out.append((m, genera[i]))
    return out


def link_homology(h: WeightedHypersurface, genera: dict, d_div: int = 1) -> AbelianGroup:
    """H_2 of the link via Steenbrink's Hodge numbers and the Seifert table."""
    sd = SeifertData(base_rank(h), d_div, tuple(branch_divisors(h, genera)))
    return seifert_cohomology(sd)["H_2"]


def _blowup_chain(exponents: tuple, blowup: tuple, step: int) -> tuple[list, int]:
    """Repeat the crepant blow-up while the last exponent is at least ``step``."""
    k = exponents[-1]
    seq = []
    while k >= step:
        current = exponents[:-1] + (k,)
        disc = blowup_discrepancy(blowup, weighted_degree(blowup, current))
        k -= step
        seq.append((blowup, disc, _residual_text(exponents[:-1], k, step)))
    return seq, k


def _residual_text(fixed: tuple, k: int, step: int) -> str:
    if k in (0, 1):
        return "smooth"
    terms = " + ".join(f"x_{i}^{a}" for i, a in enumerate(fixed))
    return f"{terms} + x_{len(fixed)}^{k}"


def euler_characteristic_family(n: int, k: int, c: Optional[int] = None) -> int:
    """Euler characteristic of the resolved ``x_0^n + ... + x_{n-1}^n + x_n^k``."""
    if c is None:
        c = k // n
    r = k % n
    if r not in (0, 1):
        raise BadResidue(f"k = {k} is {r} mod {n}; only residues 0 and 1 resolve")
    base = Fraction(c, n) * ((1 - n) ** n - 1) + c * n + 1
    if r == 0:
        base -= (1 - n) ** n
    return int(base)


def terminalize_family(family: str, k: int = 0, n: int = 3) -> FamilyReport:
    """Iterate the family's crepant blow-up and assemble the table data.

    Families: ``cubic``, ``quartic``, ``sextic``, ``quartic-cubic`` and
    ``general`` (``x_0^n + ... + x_{n-1}^n + x_n^k``).  Residues with no
    smooth crepant resolution raise :class:`UnresolvedResidual` carrying the
    partial report.
    """
    if family == "quartic-cubic":
        return _quartic_cubic()
    if family == "general":
        if n == 3:
            try:
                rep = terminalize_family("cubic", k)
            except UnresolvedResidual as exc:
                exc.report.family = "general"
                raise
            rep.family = "general"
            return rep
        return _general_family(n, k)
    if family not in FAMILIES:
        raise UnknownFamily(f"unknown family {family!r}")
    fam = FAMILIES[family]
    if k < fam.step:
        raise BadParameters(f"{family} family needs k >= {fam.step}, got {k}")
    exps = fam.fixed + (k,)
    h = WeightedHypersurface.brieskorn_pham(exps)
    h2 = link_homology(h, {3: fam.genus})
    seq, residual = _blowup_chain(exps, fam.blowup, fam.step)
    r = k % fam.step
    q = k // fam.step
    status = fam.status[r]
    rep = FamilyReport(family, k, None, None, h2, seq, smooth=False, crepant_resolution=status)
    if status != "yes":
        rep.notes.append(f"k = {r} mod {fam.step}: crepant resolution '{status}'; "
                         f"stops at terminal residual {seq[-1][2] if seq else exps}")
        raise UnresolvedResidual(
            f"{family} family with k = {k} ({r} mod {fam.step}) leaves the residual "
            f"singularity x_3^{residual} ({status})", report=rep)
    rep.c_X = q
    rep.b3 = 2 * (q - 1) if r == 0 else 2 * q
    rep.smooth = True
    if family == "cubic":
        rep.euler = euler_characteristic_family(3, k, q)
    return rep


def _quartic_cubic() -> FamilyReport:
    h = WeightedHypersurface.brieskorn_pham((3, 4, 4, 4))
    h2 = link_homology(h, {0: 3})
    blow = (1, 1, 1, 1)
    disc = blowup_discrepancy(blow, weighted_degree(blow, h.exponents))
    seq = [(blow, disc, "smooth genus 3 curve of A_2 singularities"),
           (None, 0, "smooth")]
    return FamilyReport("quartic-cubic", 0, 3, 12, h2, seq, smooth=True,
                        notes=["second step blows up the curve of A_2 singularities"])


def _general_family(n: int, k: int) -> FamilyReport:
    if n < 3:
        raise BadParameters(f"general family needs n >= 3, got {n}")
    if k < n:
        raise BadParameters(f"general family needs k >= n, got k={k}, n={n}")
    exps = (n,) * n + (k,)
    seq, residual = _blowup_chain(exps, (1,) * (n + 1), n)
    r = k % n
    rep = FamilyReport("general", k, None, None, None, seq, n=n,
                       crepant_resolution="yes" if r in (0, 1) else "no")
    if r not in (0, 1):
        raise UnresolvedResidual(
            f"general family n={n}, k={k} leaves the residual exponent {residual}", report=rep)
    rep.c_X = k // n
    rep.smooth = True
    rep.euler = euler_characteristic_family(n, k, rep.c_X)
    rep.middle_homology = milnor_orlik_betti(n, r, k)
    if r == 0:
        rep.notes.append(f"H_{n - 1}(S) has rank {rep.middle_homology['b']}")
    else:
        rep.notes.append(f"H_{n - 1}(S) is finite of order {rep.middle_homology['order']}")
    return rep


def milnor_orlik_betti(n: int, residue: int, k: Optional[int] = None) -> dict:
    """Middle homology of the link of ``x_0^n + ... + x_{n-1}^n + x_n^k``.

    Residue 0 gives the Betti number ``b_{n-1}(S)``; residue 1 gives
    ``b_{n-2}`` of the Calabi-Yau link and, when ``k`` is known, the order
    ``k^{b_{n-2}}`` of the finite group ``H_{n-1}(S)``.
    """
    if n < 3:
        raise BadParameters(f"need n >= 3, got {n}")
    if residue not in (0, 1):
        raise BadResidue(f"residue must be 0 or 1, got {residue}")
    if k is not None and k % n != residue:
        raise BadResidue(f"k = {k} is not {residue} mod {n}")
    if residue == 0:
        num = (1 - n) ** (n + 1) - 1
        assert num % n == 0
        return {"n": n, "residue": 0, "b": (-1) ** (n + 1) * (1 + num // n)}
    num = (1 - n) ** n - 1
    assert num % n == 0
    b = (-1) ** n * (1 + num // n)
    out = {"n": n, "residue": 1, "b_n_minus_2": b}
    if k is not None:
        out["order"] = k ** b
    return out


# ---------------------------------------------------------------------------
# Sporadic log del Pezzo hypersurfaces with b_3(Y) = 0, kept for display only.

SPORADIC_B3_ZERO = (
    ((1, 2, 3, 5), 10, 2, 8),
    ((1, 3, 5, 7), 15, 4, 8),
    ((1, 3, 5, 8), 16, 4, 9),
    ((2, 3, 5, 9), 18, 3, 6),
    ((3, 3, 5, 5), 15, 12, 4),
    ((3, 5, 7, 11), 25, 10, 4),
    ((3, 5, 7, 14), 28, 10, 5),
    ((3, 5, 11, 18), 36, 10, 5),
    ((5, 14, 17, 21), 56, 24, 3),
    ((5, 19, 27, 31), 81, 27, 2),
    ((5, 19, 27, 50), 100, 25, 3),
    ((7, 11, 27, 37), 81, 27, 2),
    ((7, 11, 27, 44), 88, 27, 3),
    ((9, 15, 17, 20), 60, 14, 2),
    ((9, 15, 23, 23), 69, 46, 4),
    ((11, 29, 39, 49), 127, 44, 2),
    ((11, 49, 69, 128), 256, 64, 1),
    ((13, 23, 35, 57), 127, 63, 2),
    ((13, 35, 81, 128), 256, 64, 1),
)
"""Rows (weights, degree, c(X), number of S^2 x S^3 summands in the link)."""


def sporadic_rows() -> list[dict]:
    rows = [{"weights": [2, "2k+1", "2k+1", "4k+1"], "degree": "8k+4", "c_X": "6k+1",
             "link": "#7(S^2xS^3)"}]
    for w, d, c, r in SPORADIC_B3_ZERO:
        rows.append({"weights": list(w), "degree": d, "c_X": c,
                     "link": "S^2xS^3" if r == 1 else f"#{r}(S^2xS^3)"})
    return rows


def monomials_of_degree(weights: Sequence[int], d: int) -> int:
    """Number of monomials of weighted degree d (brute force)."""
    ranges = [range(d // w + 1) for w in weights]
    return sum(1 for e in itertools.product(*ranges)
               if sum(a * w for a, w in zip(e, weights)) == d)
