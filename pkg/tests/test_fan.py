import json
import random
from fractions import Fraction

import pytest

from calabi_cone import exactgeom as eg
from calabi_cone.errors import (GeneratorOffHyperplane, InconsistentSupportFunction, InvalidFan,
                                MissingBoundaryRays, NotFullDimensional, NotStronglyConvex)
from calabi_cone.fan import (Cone, Fan, SupportFunction, dual_cone, gorenstein_gamma, in_cone,
                             is_terminal, load_fan, save_fan, section_polytope, sf_properties)
from calabi_cone.resolve import crepant_resolve, spq_fan

from conftest import C3, QUADRIC, TWO_POINTS, apply, random_gorenstein_cone, random_unimodular


# cones and duality

def test_cone_rejects_lines():
    with pytest.raises(NotStronglyConvex):
        Cone(((1, 0), (-1, 0), (0, 1)))


def test_cone_generators_are_minimal_and_sorted():
    c = Cone(((1, 1, 3), (0, 0, 1), (1, 0, 1), (0, 1, 1), (2, 2, 2)))
    assert c.generators == tuple(sorted(c.generators))
    assert (2, 2, 2) not in c.generators and (1, 1, 1) in c.generators


def test_dual_orthant():
    assert set(dual_cone(Cone(tuple(C3))).generators) == set(C3)


def test_dual_square_cone():
    d = dual_cone(Cone(tuple(QUADRIC)))
    assert len(d.generators) == 4
    assert all(eg.primitive_of(g)[1] == 1 for g in d.generators)
    assert set(dual_cone(d).generators) == set(QUADRIC)


def test_dual_2d():
    assert set(dual_cone(Cone(((1, 0), (1, 2)))).generators) == {(0, 1), (2, -1)}


def test_dual_not_full_dimensional():
    with pytest.raises(NotFullDimensional):
        dual_cone(Cone(((1, 0, 0), (0, 1, 0))))


def test_double_dual_random():
    rng = random.Random(4)
    for _ in range(100):
        f = random_gorenstein_cone(rng, box=4, npts=rng.randint(3, 7))
        c = Cone(f.rays)
        d = dual_cone(c)
        # every pairing is nonnegative, and the double dual is the cone again
        assert all(eg.dot(u, v) >= 0 for u in c.generators for v in d.generators)
        assert set(dual_cone(d).generators) == set(c.generators)


def test_in_cone():
    gens = [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
    assert in_cone((1, 1, 2), gens)
    assert not in_cone((2, 0, 1), gens)


# Gorenstein certificate

def test_gamma_spq():
    for p, q in [(2, 1), (5, 3), (7, 4)]:
        cert = gorenstein_gamma(spq_fan(p, q))
        assert cert.holds and cert.gamma == (0, 0, -1)


def test_gamma_two_points(two_points):
    cert = gorenstein_gamma(two_points)
    assert cert.holds and cert.gamma == (0, 0, -1)


def test_gamma_fails_off_hyperplane():
    # (1,1,3) lies inside the cone of the other three, so build the fan by hand
    rays = [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 3)]
    with pytest.raises(InvalidFan):
        Fan.from_cone(rays)
    f = Fan(3, tuple(rays), ((0, 1, 2, 3),))
    assert eg.dot((0, 0, -1), (1, 1, 3)) == -3
    assert not gorenstein_gamma(f).holds


def test_gamma_non_integral():
    # the unique solution is (-1, -1, 1/2)
    f = Fan.from_cone([(1, 0, 0), (0, 1, 0), (1, 1, 2)])
    cert = gorenstein_gamma(f)
    assert cert.gamma == (-1, -1, Fraction(1, 2))
    assert not cert.holds


def test_gamma_unique_under_perturbation(rng):
    for _ in range(30):
        f = random_gorenstein_cone(rng, box=3, npts=5)
        assert gorenstein_gamma(f).holds
        rays = list(f.rays)
        k = rng.randrange(len(rays))
        bumped = tuple(x * 2 for x in rays[k])
        bumped = tuple(a + b for a, b in zip(bumped, rays[(k + 1) % len(rays)]))
        new, mult = eg.primitive_of(bumped)
        if mult != 1:
            continue
        rays[k] = new
        try:
            g = Fan.from_cone(rays)
        except (InvalidFan, NotStronglyConvex):
            continue
        old = gorenstein_gamma(f).gamma
        assert eg.dot(old, new) == -3
        cert = gorenstein_gamma(g)
        # the old gamma no longer certifies; a simplicial cone may admit another one
        assert cert.gamma != old
        if len(rays) > 3 and cert.holds:
            assert all(eg.dot(cert.gamma, r) == -1 for r in rays)


# section polytope and terminality

def test_section_examples(c3, quadric):
    sec = section_polytope(c3)
    assert sec.doubled_area() == 1 and not sec.interior_points()
    sec = section_polytope(quadric)
    assert len(sec.polygon.vertices) == 4 and sec.doubled_area() == 2
    assert not sec.interior_points()
    sec = section_polytope(spq_fan(5, 3))
    assert eg.pick_counts(sec.polygon) == (10, 4, 4)
    assert len(sec.interior_points()) == 4


def test_section_chart_is_bijective(two_points):
    sec = section_polytope(two_points)
    assert {sec.from_chart(v) for v in sec.polygon.vertices} == set(TWO_POINTS)
    for p in sec.ambient_points:
        assert eg.dot(sec.gamma, p) == -1
        assert sec.from_chart(sec.to_chart(p)) == p


def test_section_off_hyperplane():
    f = Fan(3, ((0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 3)), ((0, 1, 2, 3),))
    with pytest.raises(GeneratorOffHyperplane):
        section_polytope(f)


def test_is_terminal_examples(quadric, two_points, c3):
    assert is_terminal(quadric)
    assert is_terminal(c3)
    assert not is_terminal(two_points)
    assert not is_terminal(spq_fan(2, 1))


def test_section_interior_count_unimodular_invariance(rng):
    for _ in range(40):
        f = random_gorenstein_cone(rng, box=4, npts=6, transform=False)
        base = len(section_polytope(f).interior_points())
        m = random_unimodular(rng)
        g = Fan.from_cone([apply(m, r) for r in f.rays])
        assert len(section_polytope(g).interior_points()) == base


# support functions

def test_sf_single_cone_zero(c3):
    props = sf_properties(c3, SupportFunction.zero(c3))
    assert props.convex and props.strictly_convex and props.compact


def test_sf_split_square_not_strict():
    f = Fan(3, tuple(QUADRIC), ((0, 1, 3), (0, 2, 3)), (0, 1, 2, 3))
    props = sf_properties(f, SupportFunction.zero(f))
    assert props.convex and not props.strictly_convex and props.compact


def test_sf_resolution_of_spq():
    res = crepant_resolve(spq_fan(5, 3))
    props = sf_properties(res.refined_fan, res.support_fn)
    assert props.convex and props.strictly_convex and props.compact


def test_sf_inconsistent():
    f = Fan(3, tuple(QUADRIC), ((0, 1, 3), (0, 2, 3)), (0, 1, 2, 3))
    with pytest.raises(InconsistentSupportFunction):
        sf_properties(f, SupportFunction(((0, 0, 0), (1, 0, 0))))


def test_sf_needs_boundary_rays():
    f = Fan(3, tuple(QUADRIC), ((0, 1, 3), (0, 2, 3)))
    with pytest.raises(MissingBoundaryRays):
        sf_properties(f, SupportFunction.zero(f))


def test_sf_shift_invariance(rng):
    for fan in (spq_fan(5, 3), spq_fan(4, 1), Fan.from_cone(TWO_POINTS)):
        res = crepant_resolve(fan)
        base = sf_properties(res.refined_fan, res.support_fn)
        for _ in range(5):
            m = tuple(rng.randint(-5, 5) for _ in range(3))
            shifted = sf_properties(res.refined_fan, res.support_fn.shifted(m))
            assert shifted.convex == base.convex
            assert shifted.strictly_convex == base.strictly_convex
            if m != (0, 0, 0):
                values = res.support_fn.shifted(m).ray_values(res.refined_fan)
                expect = all(values[j] == 0 for j in res.refined_fan.boundary_rays)
                assert shifted.compact == expect
            if shifted.strictly_convex:
                assert shifted.convex


# interchange file

def test_fan_roundtrip(tmp_path, two_points):
    res = crepant_resolve(two_points)
    path = tmp_path / "fan.json"
    save_fan(res.refined_fan, path)
    again = load_fan(path)
    assert again == res.refined_fan
    doc = json.loads(path.read_text())
    assert set(doc) == {"dim", "rays", "cones", "boundary_rays"}


def test_fan_from_dict_missing_field():
    with pytest.raises(InvalidFan):
        Fan.from_dict({"dim": 3, "rays": [[1, 0, 0]]})


def test_fan_rejects_non_primitive():
    with pytest.raises(InvalidFan):
        Fan(2, ((2, 0), (0, 1)), ((0, 1),))
