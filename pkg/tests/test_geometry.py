import numpy as np
import pytest

from rainbowfq.field import is_prime, make_field
from rainbowfq.geometry import (
    GeometryError,
    InvalidS,
    NotUnitPair,
    Point,
    Triangle,
    apexes,
    count_triangles,
    count_unit_pairs,
    distance,
    enumerate_triangles,
    first_triangle,
    other_apex,
    sqrt3,
    split_chunks,
    triangle_array,
    triangles_exist,
    unit_circle,
)
from rainbowfq.oracles import triangles_bruteforce, unit_adjacency, unit_circle_bruteforce

SMALL_PRIMES = [p for p in range(5, 200) if is_prime(p)]


def test_distance(f13):
    """Test d(x, y) on a few points of F_13^2."""
    assert distance(Point.of(f13, 0, 0), Point.of(f13, 1, 0)) == f13.one
    assert distance(Point.of(f13, 1, 2), Point.of(f13, 4, 6)).enc == 25 % 13


def test_point_index_round_trip(f13):
    """Test canonical point indices."""
    pt = Point.of(f13, 3, 5)
    assert pt.index == 3 * 13 + 5
    assert Point.from_index(f13, pt.index) == pt
    assert pt.rotate() == Point.of(f13, -5, 3)


@pytest.mark.parametrize("q, size", [(13, 12), (11, 12), (7, 8), (5, 4)])
def test_unit_circle_sizes(q, size):
    """Test |C| = q - 1 when -1 is a square and q + 1 otherwise."""
    assert len(unit_circle(make_field(q))) == size


def test_unit_circle_matches_bruteforce():
    """Test the circle equals the O(q^2) solution set for small primes and prime powers."""
    fields = [make_field(p) for p in SMALL_PRIMES] + [make_field(5, 2), make_field(7, 2), make_field(11, 2)]
    for field in fields:
        fast = [v.index for v in unit_circle(field)]
        slow = sorted(v.index for v in unit_circle_bruteforce(field))
        assert fast == slow, field


@pytest.mark.parametrize("q, pairs", [(13, 2028), (11, 1452), (7, 392)])
def test_count_unit_pairs(q, pairs):
    """Test ordered unit pairs equal q^2 * |C|."""
    assert count_unit_pairs(make_field(q)) == pairs


def test_pair_count_ratio():
    """Test |pairs / q^3 - 1| <= 2 / q."""
    for field in [make_field(p) for p in SMALL_PRIMES] + [make_field(5, 2), make_field(7, 2), make_field(11, 2)]:
        ratio = count_unit_pairs(field) / field.q ** 3
        assert abs(ratio - 1) <= 2 / field.q


def test_pair_count_matches_adjacency(f11):
    """Test the pair count against the brute-force adjacency matrix."""
    assert int(unit_adjacency(f11).sum()) == count_unit_pairs(f11)


def test_sqrt3(f5, f7, f11, f13):
    """Test the smaller root of 3, or None when 3 is a non-residue."""
    assert sqrt3(f13).enc == 4
    assert sqrt3(f11).enc == 5
    assert sqrt3(f7) is None
    assert not triangles_exist(f5)
    assert triangles_exist(f13)


def test_apexes_example(f13):
    """Test the apexes of (0, 0), (1, 0) in F_13^2 with s = 4."""
    first, second = apexes(Point.of(f13, 0, 0), Point.of(f13, 1, 0), f13.element(4))
    assert {first, second} == {Point.of(f13, 7, 2), Point.of(f13, 7, 11)}


@pytest.mark.parametrize("q", [11, 13])
def test_apexes_exhaustive(q):
    """Test every unit pair has two distinct apexes at distance 1 from both endpoints."""
    field = make_field(q)
    s = sqrt3(field)
    circle = list(unit_circle(field))
    for idx in range(field.q ** 2):
        x = Point.from_index(field, idx)
        for v in circle:
            y = x + v
            a, b = apexes(x, y, s)
            assert len({a, b, x, y}) == 4
            for apex in (a, b):
                assert distance(apex, x) == field.one
                assert distance(apex, y) == field.one


def test_apexes_errors(f13):
    """Test non-unit pairs and bad roots of 3 are rejected."""
    origin = Point.of(f13, 0, 0)
    with pytest.raises(NotUnitPair):
        apexes(origin, Point.of(f13, 2, 0), f13.element(4))
    with pytest.raises(InvalidS):
        apexes(origin, Point.of(f13, 1, 0), f13.element(5))


def test_other_apex(f13):
    """Test other_apex returns the apex not given."""
    s = f13.element(4)
    x, y = Point.of(f13, 0, 0), Point.of(f13, 1, 0)
    assert other_apex(x, y, Point.of(f13, 7, 2), s) == Point.of(f13, 7, 11)
    assert other_apex(x, y, Point.of(f13, 7, 11), s) == Point.of(f13, 7, 2)


@pytest.mark.parametrize("q, total", [(13, 676), (11, 484), (7, 0), (5, 0)])
def test_count_triangles(q, total):
    """Test the triangle counts (0 when 3 is a non-residue)."""
    assert count_triangles(make_field(q)) == total


@pytest.mark.parametrize("q", [5, 7, 11, 13])
def test_triangles_match_bruteforce(q):
    """Test the enumeration equals the brute-force triple oracle exactly."""
    field = make_field(q)
    fast = [tuple(row) for row in triangle_array(field).tolist()]
    assert fast == triangles_bruteforce(field)


def test_triangle_count_identity_f25(f25):
    """Test 3 * triangles = 2 * unordered pairs over F_25."""
    assert 3 * count_triangles(f25) == count_unit_pairs(f25)
    assert count_triangles(f25) == 5000


def test_threaded_enumeration_is_deterministic(f13):
    """Test thread count does not change counts or order."""
    assert count_triangles(f13, threads=4) == count_triangles(f13, threads=1)
    assert np.array_equal(triangle_array(f13, threads=4), triangle_array(f13, threads=1))
    assert np.array_equal(triangle_array(f13, threads=0), triangle_array(f13, threads=1))


def test_threaded_count_q503():
    """Test 1 and 4 threads agree at q = 503 and match 3 * triangles = 2 * unordered pairs."""
    field = make_field(503)
    assert sqrt3(field) is not None
    single = count_triangles(field, threads=1)
    assert count_triangles(field, threads=4) == single
    assert 3 * single == count_unit_pairs(field)
    assert single == 503 ** 2 * 504 // 3


def test_first_triangle(f7, f13):
    """Test the canonically least triangle starts at the origin."""
    first = first_triangle(f13)
    assert first.indices == tuple(triangle_array(f13)[0].tolist())
    assert first.indices[0] == 0
    assert first_triangle(f7) is None


def test_enumerate_triangles_yields_valid_triangles(f11):
    """Test every enumerated triangle passes validation and is sorted."""
    triangles = list(enumerate_triangles(f11))
    assert len(triangles) == 484
    assert all(t.indices[0] < t.indices[1] < t.indices[2] for t in triangles)


def test_triangle_validation(f13):
    """Test Triangle rejects repeated vertices and non-unit triples."""
    with pytest.raises(GeometryError):
        Triangle.from_indices(f13, (0, 0, 1))
    with pytest.raises(NotUnitPair):
        Triangle.from_indices(f13, (0, 1, 2))
    tri = Triangle((Point.of(f13, 7, 2), Point.of(f13, 1, 0), Point.of(f13, 0, 0)))
    assert tri.indices == (0, 13, 7 * 13 + 2)


def test_split_chunks():
    """Test chunks are contiguous, non-empty and cover the input."""
    items = list(range(10))
    chunks = split_chunks(items, 3)
    assert [len(c) for c in chunks] == [4, 3, 3]
    assert sum(chunks, []) == items
    assert split_chunks(items[:2], 8) == [[0], [1]]
