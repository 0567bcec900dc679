"""
Rainbow unit equilateral triangle search, same-color unit pair counting, subset
unit-distance statistics, and the fairify -> coarsen -> search pipeline.
"""
import logging
import math
import time
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import Field, field_serializer

from .coloring import Coloring, coarsen, greedy_fairify, refines
from .error_models import RainbowFqError
from .field import FieldSpec
from .geometry import Point, Triangle, UnitPlane, distance, first_triangle, other_apex, plane_for, run_chunks
from .kinds import SearchMode
from .models import (
    BoundCheckReport,
    ClassPairCount,
    CoarsenTrace,
    ExactModel,
    GreedyTrace,
    RainbowReport,
    SubsetPairStats,
    as_fraction,
)


class RainbowError(RainbowFqError):
    """
    Base exception for search preconditions and pipeline failures.
    """
    code = "rainbow_error"


class IncompleteColoring(RainbowError):
    code = "incomplete_coloring"


class NoTriangles(RainbowError):
    code = "no_triangles"
    exit_code = 1


class ClassTooLarge(RainbowError):
    code = "class_too_large"


class PipelineInvariantError(RainbowError):
    code = "pipeline_invariant"


class PipelineReport(ExactModel):
    """
    Trace of the fairify -> coarsen -> search pipeline.

    Args:
        original (Coloring): Input coloring.
        fairified (Coloring): Greedy fair t-coloring (refined by the original).
        coarsened (Coloring): Coarsened k-coloring (refined by the fairified one).
        greedy_trace (GreedyTrace): Merge record of stage 1.
        coarsen_trace (CoarsenTrace): Packing record of stage 2.
        t (int): Classes after stage 1.
        k (int): Classes after stage 2.
        u (Fraction): Coarsening parameter of the final attempt.
        u_attempts (List[Fraction]): Every u tried, in order.
        witness (Optional[Triangle]): Rainbow triangle of the coarsened coloring, if any.
        witness_colors (Optional[Tuple[int, int, int]]): Witness colors in the ORIGINAL coloring.
        refinement_chain_holds (bool): original refines fairified refines coarsened.
        k_bound_holds (bool): k <= 10.1 * u + 1.
        max_class_fraction (Fraction): Largest original class divided by q^2.
        max_class_limit (Fraction): Hypothesis bound on that fraction.
        max_class_hypothesis_holds (bool): max_class_fraction <= max_class_limit.
        class_size_condition (bool): Average coarse class q^2 / k is at least q^{3/2} (q >= k^2).
    """
    original: Coloring
    fairified: Coloring
    coarsened: Coloring
    greedy_trace: GreedyTrace
    coarsen_trace: CoarsenTrace
    t: int
    k: int
    u: Fraction
    u_attempts: List[Fraction] = Field(default_factory=list)
    witness: Optional[Triangle] = None
    witness_colors: Optional[Tuple[int, int, int]] = None
    refinement_chain_holds: bool
    k_bound_holds: bool
    max_class_fraction: Fraction
    max_class_limit: Fraction = Field(Fraction(1, 2))
    max_class_hypothesis_holds: bool
    class_size_condition: bool

    @field_serializer("u", "max_class_fraction", "max_class_limit")
    def serialize_fraction(self, value: Fraction) -> str:
        return str(value)

    @field_serializer("u_attempts")
    def serialize_attempts(self, value: List[Fraction]) -> List[str]:
        return [str(u) for u in value]


WitnessKey = Optional[Tuple[int, int, int]]


def default_u(q: int) -> Fraction:
    """Coarsening parameter ceil(sqrt(q))."""
    root = math.isqrt(q)
    return Fraction(root if root * root == q else root + 1)


def _min_key(keys: Iterable[WitnessKey]) -> WitnessKey:
    present = [key for key in keys if key is not None]
    return min(present) if present else None


class RainbowService:
    """
    Service class for rainbow searches over colorings of F_q^2.

    Work is split over circle steps (or step/apex offsets) across ``threads`` workers;
    counts are summed and witnesses reduced by lexicographic minimum, so every
    result is independent of the thread count.
    """

    def __init__(self, threads: int = 1, block_size: int = 4096):
        self.threads = threads
        self.block_size = block_size
        self.logger = logging.getLogger("RainbowService")

    def _plane_and_colors(self, c: Coloring) -> Tuple[UnitPlane, np.ndarray]:
        if c.field is None or c.ground_size != c.field.q ** 2:
            raise IncompleteColoring("coloring does not cover F_q^2")
        return plane_for(c.field), c.assignment

    # ---------- rainbow search ----------

    def find_rainbow(self, c: Coloring, mode: SearchMode = SearchMode.COUNT_ALL) -> RainbowReport:
        """
        Search for rainbow unit equilateral triangles.

        Args:
            c (Coloring): Coloring of F_q^2.
            mode (SearchMode): ``count-all`` counts every rainbow triangle;
                ``first-witness`` stops at the block holding the canonically least one.

        Returns:
            RainbowReport: Counts, witness and same-color pair count T.

        Raises:
            IncompleteColoring: If the coloring does not cover F_q^2.
        """
        plane, colors = self._plane_and_colors(c)
        start_time = time.time()
        mono = self.mono_unit_pairs(c)
        if not plane.offsets:
            return RainbowReport(mode=mode, total_triangles=0, rainbow_count=0, mono_pair_count=mono)

        def scan(offsets, base: Optional[np.ndarray]):
            x = plane.indices if base is None else base
            cx = colors[x]
            total = rainbow = 0
            best: WitnessKey = None
            for va, vb, wa, wb in offsets:
                y = plane.shift(va, vb, base)
                z = plane.shift(wa, wb, base)
                keep = (x < y) & (y < z)
                cy, cz = colors[y], colors[z]
                hit = keep & (cx != cy) & (cy != cz) & (cx != cz)
                total += int(np.count_nonzero(keep))
                found = int(np.count_nonzero(hit))
                if found:
                    rainbow += found
                    i = int(np.argmax(hit))
                    best = _min_key([best, (int(x[i]), int(y[i]), int(z[i]))])
            return total, rainbow, best

        if mode == SearchMode.COUNT_ALL:
            parts = run_chunks(lambda offs: scan(offs, None), plane.offsets, self.threads)
            total = sum(part[0] for part in parts)
            rainbow = sum(part[1] for part in parts)
            best = _min_key(part[2] for part in parts)
        else:
            total = 2 * (plane.size * len(plane.circle) // 2) // 3
            best = None
            for start in range(0, plane.size, self.block_size):
                base = plane.indices[start:start + self.block_size]
                parts = run_chunks(lambda offs: scan(offs, base), plane.offsets, self.threads)
                best = _min_key(part[2] for part in parts)
                if best is not None:
                    break
            rainbow = 1 if best is not None else 0

        witness = Triangle.from_indices(c.field, best) if best else None
        witness_colors = tuple(c.color_of(i) for i in best) if best else None
        self.logger.info(
            f"Rainbow search ({mode.value}) over F_{c.field.q}^2: {rainbow} rainbow of {total} "
            f"completed in {time.time() - start_time:.2f}s"
        )
        return RainbowReport(
            mode=mode,
            total_triangles=total,
            rainbow_count=rainbow,
            witness=witness,
            witness_colors=witness_colors,
            mono_pair_count=mono,
        )

    def find_rainbow_size2(self, c: Coloring) -> Triangle:
        """
        Constructive search for colorings whose classes have at most two points.

        Takes the canonically least triangle; if two of its vertices a1, a2 share a
        color and b is the third, the alternate apexes c1 of (a1, b) and c2 of
        (a2, b) cannot both share b's color, so one of (a1, b, c1), (a2, b, c2)
        is rainbow.

        Raises:
            NoTriangles: If the field has no unit equilateral triangles.
            ClassTooLarge: If some class has more than two points.
        """
        plane, _ = self._plane_and_colors(c)
        if not plane.offsets:
            raise NoTriangles(f"F_{c.field.q}^2 has no unit equilateral triangles")
        color, size = c.sorted_classes()[0]
        if size > 2:
            raise ClassTooLarge(f"color {color} has {size} points")
        triangle = first_triangle(c.field)
        if self.verify_witness(c, triangle):
            return triangle
        pts = triangle.vertices
        cols = [c.color_of(pt.index) for pt in pts]
        for i, j, other in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            if cols[i] == cols[j]:
                a1, a2, b = pts[i], pts[j], pts[other]
                break
        c1 = other_apex(a1, b, a2, plane.s)
        c2 = other_apex(a2, b, a1, plane.s)
        for candidate in (Triangle((a1, b, c1)), Triangle((a2, b, c2))):
            if self.verify_witness(c, candidate):
                return candidate
        self.logger.error(f"No rainbow candidate around {triangle}")
        raise PipelineInvariantError(f"neither alternate apex of {triangle} is rainbow")

    @staticmethod
    def verify_witness(c: Coloring, triangle: Union[Triangle, Sequence[int]]) -> bool:
        """
        Re-verify a witness from raw data: three distinct points, pairwise distance 1,
        three distinct colors.
        """
        field = c.field
        indices = triangle.indices if isinstance(triangle, Triangle) else tuple(int(i) for i in triangle)
        if field is None or len(indices) != 3 or len(set(indices)) != 3:
            return False
        if any(not 0 <= i < c.ground_size for i in indices):
            return False
        pts = [Point.from_index(field, i) for i in indices]
        for i, j in ((0, 1), (0, 2), (1, 2)):
            if distance(pts[i], pts[j]) != field.one:
                return False
        return len({c.color_of(i) for i in indices}) == 3

    # ---------- same-color pairs ----------

    def mono_unit_pairs(self, c: Coloring) -> int:
        """Unordered unit-distance pairs whose endpoints share a color (T)."""
        plane, colors = self._plane_and_colors(c)

        def count(steps):
            total = 0
            for va, vb in steps:
                total += int(np.count_nonzero(colors == colors[plane.shift(va, vb)]))
            return total

        ordered = sum(run_chunks(count, plane.steps, self.threads))
        return ordered // 2

    def mono_pair_ledger(self, c: Coloring) -> List[ClassPairCount]:
        """Per-class ordered same-color unit pairs, in class order."""
        plane, colors = self._plane_and_colors(c)
        ids, dense = np.unique(colors, return_inverse=True)

        def count(steps):
            totals = np.zeros(ids.size, dtype=np.int64)
            for va, vb in steps:
                same = colors == colors[plane.shift(va, vb)]
                totals += np.bincount(dense[same], minlength=ids.size)
            return totals

        totals = sum(run_chunks(count, plane.steps, self.threads))
        by_color = {int(color): int(n) for color, n in zip(ids, totals)}
        q = c.field.q
        return [
            ClassPairCount(color=color, size=size, ordered_pairs=by_color[color],
                           ratio=Fraction(q * by_color[color], size * size))
            for color, size in c.sorted_classes()
        ]

    def subset_unit_pairs(self, field: FieldSpec, points: Iterable[Union[int, Point]]) -> SubsetPairStats:
        """
        Ordered unit-distance pairs inside a point set E and the ratio q * count / |E|^2.
        """
        plane = plane_for(field)
        indices = np.unique(np.array([pt.index if isinstance(pt, Point) else int(pt) for pt in points],
                                     dtype=np.int64))
        n = int(indices.size)
        if n == 0:
            return SubsetPairStats(subset_size=0, count=0, ratio=Fraction(0))
        member = np.zeros(plane.size, dtype=bool)
        member[indices] = True

        def count(steps):
            total = 0
            for va, vb in steps:
                total += int(np.count_nonzero(member[plane.shift(va, vb, indices)]))
            return total

        pairs = sum(run_chunks(count, plane.steps, self.threads))
        return SubsetPairStats(subset_size=n, count=pairs, ratio=Fraction(field.q * pairs, n * n))

    def no_rainbow_bound_check(self, c: Coloring) -> BoundCheckReport:
        """Check rainbow_count > 0 or 2 * T >= total_triangles."""
        report = self.find_rainbow(c, SearchMode.COUNT_ALL)
        holds = report.rainbow_count > 0 or 2 * report.mono_pair_count >= report.total_triangles
        if not holds:
            self.logger.error(f"Bound violated: T={report.mono_pair_count}, triangles={report.total_triangles}")
        return BoundCheckReport(
            mono_pairs=report.mono_pair_count,
            total_triangles=report.total_triangles,
            rainbow_count=report.rainbow_count,
            bound_holds=holds,
        )

    # ---------- pipeline ----------

    def theorem_pipeline(self, c: Coloring, u=None, max_class_limit=Fraction(1, 2),
                         escalate: bool = True) -> PipelineReport:
        """
        Fairify, coarsen with u (default ceil(sqrt(q))), then search the coarsened
        coloring for a first witness and re-verify it under the original coloring.

        With ``escalate`` a coarsening without a witness is retried with u doubled,
        until a witness appears or u reaches t (the coarsening is then the identity).

        Raises:
            NoTriangles: If the field has no unit equilateral triangles.
            EmptyColoring: If the coloring has no classes.
        """
        plane, _ = self._plane_and_colors(c)
        field = c.field
        if not plane.offsets:
            raise NoTriangles(f"F_{field.q}^2 has no unit equilateral triangles")
        q = field.q
        u = default_u(q) if u is None else as_fraction(u)
        start_time = time.time()

        fairified, greedy_trace = greedy_fairify(c)
        attempts = []
        while True:
            attempts.append(u)
            coarsened, coarsen_trace = coarsen(fairified, u)
            report = self.find_rainbow(coarsened, SearchMode.FIRST_WITNESS)
            if report.witness is not None or not escalate or u >= greedy_trace.t:
                break
            self.logger.warning(f"No witness after coarsening to k={coarsen_trace.k} with u={u}; retrying with u={2 * u}")
            u = 2 * u

        witness_colors = None
        if report.witness is not None:
            if not self.verify_witness(c, report.witness):
                self.logger.error(f"Witness {report.witness} is not rainbow in the original coloring")
                raise PipelineInvariantError("coarse witness is not rainbow in the original coloring")
            witness_colors = tuple(c.color_of(i) for i in report.witness.indices)

        chain = refines(c, fairified) and refines(fairified, coarsened) and refines(c, coarsened)
        k = coarsen_trace.k
        max_fraction = Fraction(c.sorted_classes()[0][1], q * q)
        max_class_limit = as_fraction(max_class_limit)
        hypothesis = max_fraction <= max_class_limit
        if not hypothesis:
            self.logger.warning(f"Largest class covers {max_fraction} of the plane (limit {max_class_limit})")
        self.logger.info(f"Pipeline t={greedy_trace.t} k={k} u={u} completed in {time.time() - start_time:.2f}s")
        return PipelineReport(
            original=c,
            fairified=fairified,
            coarsened=coarsened,
            greedy_trace=greedy_trace,
            coarsen_trace=coarsen_trace,
            t=greedy_trace.t,
            k=k,
            u=u,
            u_attempts=attempts,
            witness=report.witness,
            witness_colors=witness_colors,
            refinement_chain_holds=chain,
            k_bound_holds=k <= Fraction(101, 10) * u + 1,
            max_class_fraction=max_fraction,
            max_class_limit=max_class_limit,
            max_class_hypothesis_holds=hypothesis,
            class_size_condition=q >= k * k,
        )
