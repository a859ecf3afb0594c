import math
import random
from fractions import Fraction

import pytest

from calabi_cone import exactgeom as eg
from calabi_cone.errors import (AmbiguousLocation, BadParameters, GeneratorOffHyperplane,
                                NonIsolated, NotGorenstein, NotGorensteinGroup, NotInSupport,
                                RayAlreadyPresent, TerminalSingularity)
from calabi_cone.fan import (Fan, SupportFunction, gorenstein_gamma, section_polytope,
                             sf_properties)
from calabi_cone.resolve import (QuotientSpec, crepant_resolve, quotient_fan, spq_fan,
                                 spq_quasi_regular, star_subdivide, toric_invariants)

from conftest import CUBIC_CONE, DP1_CONE, TWO_POINTS, apply, random_gorenstein_cone, random_unimodular


def _unimodular_cones(fan):
    return all(eg.lattice_index(fan.cone_rays(i)) == 1 for i in range(len(fan.cones)))


# star subdivision

def test_star_c3_barycenter(c3):
    # (1,1,1) is off the Gorenstein hyperplane, so this is a non-crepant blow-up
    f2, h2 = star_subdivide(c3, SupportFunction.zero(c3), (1, 1, 1), Fraction(1, 3), crepant=False)
    assert len(f2.cones) == 3
    assert _unimodular_cones(f2)
    props = sf_properties(f2, h2)
    assert props.strictly_convex and props.compact


def test_star_refuses_off_hyperplane(quadric):
    with pytest.raises(GeneratorOffHyperplane):
        star_subdivide(quadric, SupportFunction.zero(quadric), (1, 1, 2), 1)


def test_star_two_points_interior(two_points):
    f2, h2 = star_subdivide(two_points, SupportFunction.zero(two_points), (1, 1, 1), 1)
    assert len(f2.cones) == 5
    assert _unimodular_cones(f2)
    props = sf_properties(f2, h2)
    assert props.strictly_convex and props.compact


def test_star_on_shared_two_cone():
    # diamond split along its horizontal diagonal; (0,0,1) is interior to the shared 2-cone
    rays = ((-1, 0, 1), (1, 0, 1), (0, 1, 1), (0, -1, 1))
    f = Fan(3, rays, ((0, 1, 2), (0, 1, 3)), (0, 1, 2, 3))
    h = SupportFunction(((0, 0, 0), (0, 1, 0)))
    assert sf_properties(f, h).strictly_convex
    f2, h2 = star_subdivide(f, h, (0, 0, 1), Fraction(1, 4))
    assert len(f2.cones) == 4
    assert all(len(c) == 3 and 4 in c for c in f2.cones)
    assert _unimodular_cones(f2)
    assert sf_properties(f2, h2).strictly_convex
    # agreement with h away from the modified cones: values on old rays are unchanged
    assert h2.ray_values(f2)[:4] == h.ray_values(f)


def test_star_errors(two_points, c3):
    h = SupportFunction.zero(two_points)
    with pytest.raises(RayAlreadyPresent):
        star_subdivide(two_points, h, (0, 1, 1), 1)
    with pytest.raises(NotInSupport):
        star_subdivide(two_points, h, (3, 3, 1), 1)
    with pytest.raises(AmbiguousLocation):
        star_subdivide(c3, SupportFunction.zero(c3), (2, 0, 0), 1, crepant=False)


def test_star_edge_point_of_single_cone():
    f = Fan.from_cone([(0, 0, 1), (2, 0, 1), (0, 1, 1)])
    f2, h2 = star_subdivide(f, SupportFunction.zero(f), (1, 0, 1), 1)
    assert len(f2.cones) == 2
    assert _unimodular_cones(f2)
    assert sf_properties(f2, h2).strictly_convex


# crepant resolution

def test_resolve_spq_5_3():
    res = crepant_resolve(spq_fan(5, 3))
    assert res.c_X == 4
    assert res.euler == 10 == section_polytope(spq_fan(5, 3)).doubled_area()
    flags = res.flags()
    assert flags["smooth"] and flags["strictly_convex"] and flags["compact"]


def test_resolve_two_points(two_points):
    res = crepant_resolve(two_points)
    assert (res.c_X, res.euler) == (1, 5)
    assert res.epsilons == (1,)
    assert toric_invariants(two_points, res)["b2_Y"] == 3


def test_resolve_quadric(quadric):
    with pytest.raises(TerminalSingularity):
        crepant_resolve(quadric)
    res = crepant_resolve(quadric, allow_small=True)
    flags = res.flags()
    assert res.small_resolution and not res.compact_class_exists
    assert len(res.refined_fan.cones) == 2 and flags["smooth"]
    assert flags["strictly_convex"] and not flags["compact"]


def test_resolve_smooth_cone_is_trivial(c3):
    res = crepant_resolve(c3)
    assert (res.c_X, res.euler, res.inserted_rays) == (0, 1, ())


def test_resolve_not_gorenstein():
    with pytest.raises(NotGorenstein):
        crepant_resolve(Fan.from_cone([(1, 0, 0), (0, 1, 0), (1, 1, 2)]))


def test_resolve_with_edge_points():
    # triangle (0,0),(2,0),(0,2): no interior points, three edge midpoints
    f = Fan.from_cone([(0, 0, 1), (2, 0, 1), (0, 2, 1)])
    res = crepant_resolve(f)
    assert res.c_X == 0
    assert len(res.inserted_rays) == 3
    assert res.euler == 4
    assert res.flags()["strictly_convex"] and res.flags()["compact"]


def test_resolution_properties_random(rng):
    for _ in range(25):
        f = random_gorenstein_cone(rng, box=3, npts=rng.randint(3, 6))
        sec = section_polytope(f)
        interior, boundary = sec.lattice_points()
        if not interior and len(boundary) == len(sec.polygon.vertices) and sec.doubled_area() > 1:
            continue  # terminal singular: quadric-type
        res = crepant_resolve(f)
        gamma = gorenstein_gamma(f).gamma
        assert all(eg.dot(gamma, r) == -1 for r in res.inserted_rays)
        assert _unimodular_cones(res.refined_fan)
        assert res.euler == sec.doubled_area()
        assert res.c_X == len(interior)
        props = sf_properties(res.refined_fan, res.support_fn)
        assert props.strictly_convex and props.compact
        assert set(f.rays) <= set(res.refined_fan.rays)


def test_invariants_are_order_independent(rng):
    for _ in range(10):
        f = random_gorenstein_cone(rng, box=4, npts=6, transform=False)
        if not section_polytope(f).interior_points():
            continue
        base = toric_invariants(f, crepant_resolve(f))
        m = random_unimodular(rng)
        g = Fan.from_cone([apply(m, r) for r in f.rays])
        moved = toric_invariants(g, crepant_resolve(g))
        assert base == moved


def test_resolution_is_deterministic():
    a = crepant_resolve(spq_fan(7, 4))
    b = crepant_resolve(spq_fan(7, 4))
    assert a.refined_fan == b.refined_fan and a.epsilons == b.epsilons
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("gens", [TWO_POINTS, DP1_CONE])
def test_toric_invariants_consistent(gens):
    f = Fan.from_cone(gens)
    inv = toric_invariants(f, crepant_resolve(f))
    assert inv["isolated"]
    assert inv["consistent"] and inv["betti_relation_holds"]
    assert inv["b2_Y"] == len(gens) - 3 + inv["c_X"]
    assert inv["b4_Y"] == inv["c_X"]


def test_toric_invariants_with_edge_points():
    f = Fan.from_cone(CUBIC_CONE)
    inv = toric_invariants(f, crepant_resolve(f))
    assert not inv["isolated"] and inv["edge_points"] == 6
    assert (inv["b2_Y"], inv["b4_Y"], inv["euler"]) == (7, 1, 9)
    assert inv["consistent"] and not inv["betti_relation_holds"]


def test_cubic_cone_euler_nine():
    res = crepant_resolve(Fan.from_cone(CUBIC_CONE))
    assert (res.c_X, res.euler) == (1, 9)


# quotients

def test_quotient_z3():
    f = quotient_fan(QuotientSpec.cyclic(3, (1, 1, 1)))
    assert len(section_polytope(f).interior_points()) == 1
    assert gorenstein_gamma(f).holds
    assert crepant_resolve(f).euler == 3


def test_quotient_z5():
    assert crepant_resolve(quotient_fan(QuotientSpec.cyclic(5, (1, 2, 2)))).euler == 5


def test_quotient_trivial():
    f = quotient_fan(QuotientSpec.cyclic(1, (0, 0, 0)))
    res = crepant_resolve(f)
    assert res.euler == 1 and res.c_X == 0


def test_quotient_2d():
    assert crepant_resolve(quotient_fan(QuotientSpec.cyclic(5, (1, 4)))).euler == 5


def test_quotient_lattice_contains_group():
    # e_i written in the basis of Z_T: the group element is integral in the new coordinates
    f = quotient_fan(QuotientSpec.cyclic(7, (1, 2, 4)))
    assert abs(eg.det(f.rays)) == 7


def test_quotient_errors():
    with pytest.raises(NotGorensteinGroup):
        quotient_fan(QuotientSpec.cyclic(3, (1, 1, 0)))
    with pytest.raises(NonIsolated):
        quotient_fan(QuotientSpec.cyclic(4, (1, 1, 2)))
    with pytest.raises(BadParameters):
        quotient_fan(QuotientSpec(3, 4, ((Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),)))


# S^{p,q}

def test_spq_fan_examples():
    f = spq_fan(5, 3)
    assert len(f.rays) == 4 and (1, 2, 1) in f.rays
    assert spq_quasi_regular(5, 3) is None
    assert spq_quasi_regular(2, 1) is None
    assert spq_quasi_regular(7, 1) is None
    assert spq_quasi_regular(13, 7) == 23


@pytest.mark.parametrize("p, q", [(3, 3), (4, 2), (2, 3), (0, 0)])
def test_spq_bad_parameters(p, q):
    with pytest.raises(BadParameters):
        spq_fan(p, q)


def test_spq_square_test_oracle():
    for p in range(2, 30):
        for q in range(1, p):
            if math.gcd(p, q) != 1:
                continue
            disc = 4 * p * p - 3 * q * q
            squares = [r for r in range(1, 2 * p + 1) if r * r == disc]
            assert spq_quasi_regular(p, q) == (squares[0] if squares else None)


def test_eps_matches_plain_halving(rng):
    # oracle: try eps = 1, 1/2, 1/4, ... and keep the first admissible value
    for f in [spq_fan(7, 3), quotient_fan(QuotientSpec.cyclic(13, (1, 3, 9)))] + \
            [random_gorenstein_cone(rng, box=4, npts=6) for _ in range(5)]:
        sec = section_polytope(f)
        if not sec.interior_points():
            continue
        res = crepant_resolve(f)
        fan, h = f, SupportFunction.zero(f)
        for u, eps in zip(res.inserted_rays, res.epsilons):
            trial = Fraction(1)
            while True:
                f2, h2 = star_subdivide(fan, h, u, trial)
                props = sf_properties(f2, h2)
                if props.strictly_convex and props.compact:
                    break
                trial /= 2
            assert trial == eps
            fan, h = f2, h2
        assert h == res.support_fn
