import csv
import io
from fractions import Fraction

import pytest

from rainbowfq.experiments import (
    CSV_COLUMNS,
    VINH_COLUMNS,
    SubsetTooLarge,
    ceil_sqrt_cube,
    sweep,
    vinh_experiment,
)
from rainbowfq.field import CharacteristicTooSmall, InadmissibleField, make_field
from rainbowfq.kinds import SweepTask


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_counts():
    """Test the counts task over q = 11, 13."""
    out = io.StringIO()
    records = sweep([11, 13], [SweepTask.COUNTS], seed=0, out=out)
    assert [(r.circle_size, r.ordered_pairs, r.triangles) for r in records] == [(12, 1452, 484), (12, 2028, 676)]
    text = out.getvalue()
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert "\r" not in text
    rows = read_rows(text)
    assert rows[0]["q"] == "11"
    assert rows[1]["triangles"] == "676"
    assert rows[0]["pipeline_t"] == ""
    assert rows[0]["task"] == "counts"


def test_sweep_column_order():
    """Test the CSV columns follow the record fields, ending with task and vinh_max_ratio."""
    assert CSV_COLUMNS[:6] == ["q", "p", "k_field", "circle_size", "ordered_pairs", "triangles"]
    assert CSV_COLUMNS[-2:] == ["task", "vinh_max_ratio"]


def test_sweep_no_triangles():
    """Test q = 7 records zero triangles."""
    records = sweep([7], [SweepTask.COUNTS], seed=0, out=io.StringIO())
    assert records[0].triangles == 0
    assert records[0].circle_size == 8


def test_sweep_empty():
    """Test an empty q list writes only the header."""
    out = io.StringIO()
    assert sweep([], [SweepTask.COUNTS], seed=0, out=out) == []
    assert out.getvalue() == ",".join(CSV_COLUMNS) + "\n"


def test_sweep_inadmissible():
    """Test non prime powers and small characteristics are refused."""
    with pytest.raises(InadmissibleField):
        sweep([12], [SweepTask.COUNTS], seed=0, out=io.StringIO())
    with pytest.raises(CharacteristicTooSmall):
        sweep([9], [SweepTask.COUNTS], seed=0, out=io.StringIO())


def test_sweep_extension_field():
    """Test a prime power q resolves to its extension field."""
    record = sweep([25], [SweepTask.COUNTS], seed=0, out=io.StringIO())[0]
    assert (record.p, record.k_field, record.circle_size, record.triangles) == (5, 2, 24, 5000)


def test_sweep_pipeline_and_vinh():
    """Test pipeline and vinh cells fill their columns, ordered by (q, task, trial)."""
    out = io.StringIO()
    records = sweep([13, 7], [SweepTask.VINH, SweepTask.PIPELINE], seed=3, out=out, repeats=2)
    keys = [(r.q, r.task, r.coloring_seed) for r in records]
    assert keys == [
        (7, "pipeline", 3), (7, "pipeline", 4), (7, "vinh", 3), (7, "vinh", 4),
        (13, "pipeline", 3), (13, "pipeline", 4), (13, "vinh", 3), (13, "vinh", 4),
    ]
    assert records[0].rainbow_found is False
    assert records[0].pipeline_t is None
    assert records[4].pipeline_t is not None
    assert records[4].color_count == 13
    assert records[6].vinh_max_ratio is not None
    rows = read_rows(out.getvalue())
    assert rows[0]["rainbow_found"] == "0"


def test_sweep_threads_are_deterministic():
    """Test worker count does not change any column except elapsed time."""
    def run(threads):
        records = sweep([11, 13], list(SweepTask), seed=5, out=io.StringIO(), threads=threads)
        return [r.model_dump(exclude={"elapsed_millis"}) for r in records]
    assert run(1) == run(4)


def test_ceil_sqrt_cube():
    """Test ceil(q^{3/2})."""
    assert ceil_sqrt_cube(101) == 1016
    assert ceil_sqrt_cube(13) == 47
    assert ceil_sqrt_cube(25) == 125


def test_vinh_whole_plane(f13):
    """Test the whole plane gives ratio circle_size / q exactly."""
    out = io.StringIO()
    stats = vinh_experiment(f13, 169, 1, seed=0, out=out)
    assert stats[0].ratio == Fraction(12, 13)
    rows = read_rows(out.getvalue())
    assert list(rows[0]) == VINH_COLUMNS
    assert rows[0] == {"trial": "0", "subset_size": "169", "count": "2028",
                       "ratio": "12/13", "ratio_decimal": "0.923077"}


def test_vinh_empty_and_too_large(f13):
    """Test |E| = 0 gives ratio 0 and |E| > q^2 is refused."""
    assert vinh_experiment(f13, 0, 2, seed=0)[0].ratio == 0
    with pytest.raises(SubsetTooLarge):
        vinh_experiment(f13, 170, 1, seed=0)


def test_vinh_is_deterministic(f13):
    """Test trials draw from fixed substreams."""
    first = vinh_experiment(f13, 47, 3, seed=8)
    assert first == vinh_experiment(f13, 47, 3, seed=8)
    assert vinh_experiment(f13, 47, 3, seed=8, threads=4) == first


def test_vinh_bound_q101():
    """Test 20 subsets of size ceil(101^{3/2}) keep q * count / n^2 <= 4."""
    field = make_field(101)
    stats = vinh_experiment(field, 1016, 20, seed=0)
    assert len(stats) == 20
    assert max(s.ratio for s in stats) <= 4
