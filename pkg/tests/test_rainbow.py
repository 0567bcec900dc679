from fractions import Fraction

import numpy as np
import pytest

from rainbowfq.coloring import Coloring, refines
from rainbowfq.field import make_field
from rainbowfq.generators import generate
from rainbowfq.geometry import first_triangle, triangle_array
from rainbowfq.kinds import GeneratorKind, SearchMode
from rainbowfq.models import GeneratorSpec
from rainbowfq.rainbow import (
    ClassTooLarge,
    IncompleteColoring,
    NoTriangles,
    RainbowService,
    default_u,
)


def brute_rainbow_count(c):
    """Count rainbow triangles straight from the triangle list."""
    triples = triangle_array(c.field)
    colors = c.assignment[triples]
    return int(np.count_nonzero((colors[:, 0] != colors[:, 1]) & (colors[:, 1] != colors[:, 2])
                                & (colors[:, 0] != colors[:, 2])))


def test_monochrome(f13, service, make_coloring):
    """Test a monochrome coloring: no rainbow, T = 1014 and the bound holds."""
    c = make_coloring(f13, "monochrome")
    report = service.find_rainbow(c)
    assert report.total_triangles == 676
    assert report.rainbow_count == 0
    assert report.witness is None
    assert report.mono_pair_count == 1014
    assert service.no_rainbow_bound_check(c).bound_holds


def test_all_distinct(f13, service, make_coloring):
    """Test every triangle is rainbow when all colors differ."""
    c = make_coloring(f13, "all-distinct")
    report = service.find_rainbow(c)
    assert report.rainbow_count == 676
    assert report.mono_pair_count == 0
    assert report.witness == first_triangle(f13)
    assert report.witness_colors == report.witness.indices


@pytest.mark.parametrize("seed", range(5))
def test_count_all_matches_bruteforce(f11, service, make_coloring, seed):
    """Test rainbow counts and totals against the triangle list on random colorings."""
    c = make_coloring(f11, "uniform-random", colors=3, seed=seed)
    report = service.find_rainbow(c)
    assert report.total_triangles == 484
    assert report.rainbow_count == brute_rainbow_count(c)
    if report.witness is not None:
        assert RainbowService.verify_witness(c, report.witness)
    assert report.rainbow_count > 0 or 2 * report.mono_pair_count >= report.total_triangles


@pytest.mark.parametrize("colors", [2, 3, 20])
def test_modes_agree(f13, service, make_coloring, colors):
    """Test first-witness finds the same least witness as count-all."""
    c = make_coloring(f13, "uniform-random", colors=colors, seed=colors)
    full = service.find_rainbow(c, SearchMode.COUNT_ALL)
    first = service.find_rainbow(c, SearchMode.FIRST_WITNESS)
    assert (full.rainbow_count > 0) == (first.rainbow_count > 0)
    assert first.witness == full.witness
    assert first.total_triangles == full.total_triangles
    assert first.rainbow_count in (0, 1)


def test_thread_count_does_not_change_results(f13, make_coloring):
    """Test reports are identical for 1 and 4 threads and any block size."""
    c = make_coloring(f13, "uniform-random", colors=4, seed=11)
    single = RainbowService(threads=1)
    parallel = RainbowService(threads=4, block_size=7)
    for mode in SearchMode:
        assert single.find_rainbow(c, mode) == parallel.find_rainbow(c, mode)
    assert single.mono_unit_pairs(c) == parallel.mono_unit_pairs(c)


def test_no_triangles_field(f7, service, make_coloring):
    """Test a field without sqrt(3) reports zero triangles."""
    report = service.find_rainbow(make_coloring(f7, "all-distinct"))
    assert report.total_triangles == 0
    assert report.rainbow_count == 0


def test_incomplete_coloring(service):
    """Test a coloring not bound to F_q^2 is refused."""
    with pytest.raises(IncompleteColoring):
        service.find_rainbow(Coloring([0, 1, 2]))


@pytest.mark.parametrize("q", [11, 13, 17, 97])
def test_degenerate_example_has_no_rainbow(q, service, make_coloring):
    """Test the axis/blue coloring admits no rainbow triangle and satisfies the bound."""
    c = make_coloring(make_field(q), "degenerate-example")
    bound = service.no_rainbow_bound_check(c)
    assert bound.rainbow_count == 0
    assert bound.bound_holds
    assert 2 * bound.mono_pairs >= bound.total_triangles


@pytest.mark.parametrize("seed", range(100))
def test_size2_always_finds_rainbow(f13, service, make_coloring, seed):
    """Test every coloring with classes of at most two points has a verified rainbow triangle."""
    c = make_coloring(f13, "max2", seed=seed)
    triangle = service.find_rainbow_size2(c)
    assert RainbowService.verify_witness(c, triangle)


def test_size2_follows_alternate_apex(f13, service):
    """Test the construction when the least triangle has a repeated color."""
    first = first_triangle(f13).indices
    assignment = np.arange(169) + 1
    assignment[list(first[:2])] = 0
    c = Coloring(assignment, f13)
    triangle = service.find_rainbow_size2(c)
    assert RainbowService.verify_witness(c, triangle)
    assert triangle.indices != first


def test_size2_errors(f7, f13, service, make_coloring):
    """Test size2 refuses large classes and fields without triangles."""
    with pytest.raises(ClassTooLarge):
        service.find_rainbow_size2(make_coloring(f13, "monochrome"))
    with pytest.raises(NoTriangles):
        service.find_rainbow_size2(make_coloring(f7, "all-distinct"))


def test_verify_witness_rejects(f13, service, make_coloring):
    """Test re-verification catches non-unit triples, shared colors and bad indices."""
    c = make_coloring(f13, "all-distinct")
    mono = make_coloring(f13, "monochrome")
    first = first_triangle(f13).indices
    assert RainbowService.verify_witness(c, first)
    assert not RainbowService.verify_witness(mono, first)
    assert not RainbowService.verify_witness(c, (0, 1, 2))
    assert not RainbowService.verify_witness(c, (0, 0, 1))
    assert not RainbowService.verify_witness(c, (0, 1, 1000))


def test_mono_pair_ledger(f13, service, make_coloring):
    """Test per-class ordered pairs sum to 2T, in class order."""
    c = make_coloring(f13, "uniform-random", colors=5, seed=3)
    ledger = service.mono_pair_ledger(c)
    assert [entry.color for entry in ledger] == [color for color, _ in c.sorted_classes()]
    assert sum(entry.ordered_pairs for entry in ledger) == 2 * service.mono_unit_pairs(c)
    whole = service.mono_pair_ledger(Coloring(np.zeros(169, dtype=np.int64), f13))
    assert whole[0].ordered_pairs == 2028
    assert whole[0].ratio == Fraction(12, 13)


def test_subset_unit_pairs(f13, service):
    """Test the whole plane gives circle_size / q and the empty set gives 0."""
    whole = service.subset_unit_pairs(f13, range(169))
    assert whole.count == 2028
    assert whole.ratio == Fraction(12, 13)
    empty = service.subset_unit_pairs(f13, [])
    assert (empty.subset_size, empty.count, empty.ratio) == (0, 0, 0)
    axis = service.subset_unit_pairs(f13, [0, 1, 2])
    assert axis.count == 4


def test_default_u():
    """Test u = ceil(sqrt(q))."""
    assert default_u(13) == 4
    assert default_u(16) == 4
    assert default_u(101) == 11


@pytest.mark.parametrize("seed", range(3))
def test_pipeline_fair_random(f13, service, make_coloring, seed):
    """Test the pipeline keeps the refinement chain and re-verifies its witness."""
    c = make_coloring(f13, "fair-random", colors=13, seed=seed)
    report = service.theorem_pipeline(c)
    assert report.refinement_chain_holds
    assert refines(c, report.fairified) and refines(report.fairified, report.coarsened)
    assert report.t == report.greedy_trace.t
    assert report.k == report.coarsened.class_count
    assert report.u_attempts[0] == 4
    assert report.witness is not None
    assert RainbowService.verify_witness(c, report.witness)
    assert report.witness_colors == tuple(c.color_of(i) for i in report.witness.indices)
    assert report.k_bound_holds


def test_pipeline_without_escalation(f13, service, make_coloring):
    """Test a single coarsening attempt with the default u."""
    c = make_coloring(f13, "fair-random", colors=13, seed=0)
    report = service.theorem_pipeline(c, escalate=False)
    assert report.u_attempts == [Fraction(4)]
    assert report.u == 4
    assert report.class_size_condition == (13 >= report.k ** 2)


def test_pipeline_monochrome(f13, service, make_coloring):
    """Test a monochrome input runs through with no witness and a failed hypothesis."""
    report = service.theorem_pipeline(make_coloring(f13, "monochrome"))
    assert report.witness is None
    assert report.witness_colors is None
    assert report.max_class_fraction == 1
    assert not report.max_class_hypothesis_holds


def test_pipeline_requires_triangles(f7, service, make_coloring):
    """Test the pipeline raises NoTriangles over F_7."""
    with pytest.raises(NoTriangles):
        service.theorem_pipeline(make_coloring(f7, "fair-random", colors=7))


@pytest.fixture(scope="module")
def f97():
    return make_field(97)


@pytest.mark.parametrize("colors", [20, 50, 101])
def test_pipeline_desk_scale(f97, colors):
    """Test 20 seeded fair-random colorings of F_97^2 each yield a witness rainbow in the original coloring."""
    service = RainbowService(threads=1)
    bound = Fraction(101, 10) * default_u(97) + 1
    for seed in range(20):
        c = generate(f97, GeneratorSpec(kind=GeneratorKind.FAIR_RANDOM, color_count=colors, seed=seed))
        report = service.theorem_pipeline(c)
        assert report.witness is not None, seed
        assert RainbowService.verify_witness(c, report.witness)
        assert report.refinement_chain_holds
        assert refines(c, report.fairified) and refines(report.fairified, report.coarsened)
        assert report.k <= bound
        assert report.k_bound_holds


def test_pipeline_desk_scale_threads(f97):
    """Test the pipeline report does not depend on the worker count."""
    c = generate(f97, GeneratorSpec(kind=GeneratorKind.FAIR_RANDOM, color_count=50, seed=7))
    single = RainbowService(threads=1).theorem_pipeline(c)
    parallel = RainbowService(threads=4).theorem_pipeline(c)
    assert (single.t, single.k, single.u_attempts) == (parallel.t, parallel.k, parallel.u_attempts)
    assert (single.witness, single.witness_colors) == (parallel.witness, parallel.witness_colors)
    assert single.coarsen_trace == parallel.coarsen_trace
    assert single.coarsened == parallel.coarsened


def test_no_triangles_at_q101(service, make_coloring):
    """Test F_101 has no unit triangles since 3 is a non-residue mod 101."""
    field = make_field(101)
    with pytest.raises(NoTriangles):
        service.theorem_pipeline(make_coloring(field, "fair-random", colors=20))
