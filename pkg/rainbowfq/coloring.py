"""
Colorings of a ground set [0, s): class-size indexing, fairness, refinement, and the
two coarsening constructions (greedy fairification and group packing).

Class order everywhere is (size descending, color id ascending); "the two smallest
classes" are the last two in that order.
"""
import heapq
import logging
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .error_models import RainbowFqError
from .field import FieldSpec
from .kinds import CoarsenBranch
from .models import CoarsenTrace, FairnessParams, FairnessResult, GreedyTrace, MergeStep, as_fraction

logger = logging.getLogger(__name__)


class ColoringError(RainbowFqError):
    """
    Base exception for malformed colorings and coarsening preconditions.
    """
    code = "coloring_error"


class EmptyColoring(ColoringError):
    code = "empty_coloring"


class GroundSetMismatch(ColoringError):
    code = "ground_set_mismatch"


class NonpositiveU(ColoringError):
    code = "nonpositive_u"


class Coloring:
    """
    A total assignment of non-negative color ids to the elements of [0, s).

    When ``field`` is given the ground set is F_q^2 in canonical point-index order
    and s must equal q^2. The assignment array is read-only.
    """

    def __init__(self, assignment: Union[Sequence[int], np.ndarray], field: Optional[FieldSpec] = None):
        arr = np.array(assignment, dtype=np.int64)
        if arr.ndim != 1:
            raise ColoringError("assignment must be one-dimensional")
        if arr.size and arr.min() < 0:
            raise ColoringError("color ids must be non-negative")
        if field is not None and arr.size != field.q ** 2:
            raise GroundSetMismatch(f"coloring of {arr.size} elements does not cover F_{field.q}^2")
        arr.setflags(write=False)
        self._assignment = arr
        self.field = field

    @classmethod
    def from_classes(cls, classes: Iterable[Iterable[int]], ground_size: int,
                     field: Optional[FieldSpec] = None) -> "Coloring":
        """Build a coloring where the j-th class gets color j."""
        assignment = np.full(ground_size, -1, dtype=np.int64)
        for color, members in enumerate(classes):
            members = np.fromiter(members, dtype=np.int64)
            if members.size and (members.min() < 0 or members.max() >= ground_size):
                raise ColoringError(f"class {color} has elements outside [0, {ground_size})")
            if np.any(assignment[members] != -1) or len(np.unique(members)) != members.size:
                raise ColoringError(f"class {color} overlaps another class")
            assignment[members] = color
        if np.any(assignment == -1):
            raise ColoringError("classes do not cover the ground set")
        return cls(assignment, field)

    @property
    def assignment(self) -> np.ndarray:
        return self._assignment

    @property
    def ground_size(self) -> int:
        return int(self._assignment.size)

    def color_of(self, element: int) -> int:
        return int(self._assignment[element])

    @cached_property
    def classes(self) -> Dict[int, np.ndarray]:
        """Color id -> sorted element indices."""
        order = np.argsort(self._assignment, kind="stable")
        colors, starts = np.unique(self._assignment[order], return_index=True)
        return {int(c): members for c, members in zip(colors, np.split(order, starts[1:]))}

    @cached_property
    def sizes(self) -> Dict[int, int]:
        colors, counts = np.unique(self._assignment, return_counts=True)
        return {int(c): int(n) for c, n in zip(colors, counts)}

    @property
    def class_count(self) -> int:
        return len(self.sizes)

    def sorted_classes(self) -> List[Tuple[int, int]]:
        """(color, size) pairs in (size descending, color ascending) order."""
        return sorted(self.sizes.items(), key=lambda item: (-item[1], item[0]))

    def merge_groups(self, groups: Sequence[Sequence[int]], labels: Optional[Sequence[int]] = None) -> "Coloring":
        """
        Coarser coloring in which the colors of groups[j] become labels[j] (default j).
        """
        labels = list(range(len(groups))) if labels is None else list(labels)
        top = int(self._assignment.max()) + 1 if self.ground_size else 0
        lookup = np.full(top, -1, dtype=np.int64)
        for label, group in zip(labels, groups):
            lookup[np.asarray(group, dtype=np.int64)] = label
        merged = lookup[self._assignment]
        if np.any(merged == -1):
            raise ColoringError("groups do not cover every color of the coloring")
        return Coloring(merged, self.field)

    def relabel(self) -> "Coloring":
        """Same partition with colors renumbered 0..k-1 in class order."""
        groups = [[color] for color, _ in self.sorted_classes()]
        return self.merge_groups(groups)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coloring):
            return NotImplemented
        return self.field == other.field and np.array_equal(self._assignment, other._assignment)

    __hash__ = None

    def __repr__(self) -> str:
        where = f" over F_{self.field.q}^2" if self.field else ""
        return f"Coloring(s={self.ground_size}, classes={self.class_count}{where})"


def class_size_profile(c: Coloring) -> List[int]:
    """Class sizes in non-increasing order."""
    return [size for _, size in c.sorted_classes()]


def is_fair(c: Coloring, params: Optional[FairnessParams] = None) -> FairnessResult:
    """
    Check that every class size lies in [lower * n, upper * n] (inclusive).

    Args:
        c (Coloring): Coloring to check.
        params (Optional[FairnessParams]): Bounds; n defaults to s / k.

    Returns:
        FairnessResult: Verdict and, on failure, a smallest violating class.
    """
    params = params or FairnessParams()
    if c.class_count == 0:
        return FairnessResult(fair=True, n=Fraction(0))
    n = params.n if params.n is not None else Fraction(c.ground_size, c.class_count)
    low, high = params.lower * n, params.upper * n
    violating = [(size, color) for color, size in c.sizes.items() if not low <= size <= high]
    if not violating:
        return FairnessResult(fair=True, n=n)
    size, color = min(violating)
    return FairnessResult(fair=False, n=n, witness_color=color, witness_size=size)


def refines(fine: Coloring, coarse: Coloring) -> bool:
    """
    True iff every class of ``fine`` lies inside a class of ``coarse``.

    Raises:
        GroundSetMismatch: If the colorings have different ground sets.
    """
    if fine.ground_size != coarse.ground_size:
        raise GroundSetMismatch(f"ground sets of size {fine.ground_size} and {coarse.ground_size}")
    if fine.ground_size == 0:
        return True
    pairs = np.unique(np.stack([fine.assignment, coarse.assignment]), axis=1)
    return pairs.shape[1] == fine.class_count


def greedy_fairify(c: Coloring, params: Optional[FairnessParams] = None) -> Tuple[Coloring, GreedyTrace]:
    """
    Merge the two smallest classes until every class has at least lower * a elements,
    a the largest class size.

    A merge whose larger part exceeds (1 - lower) * a ends the loop: every remaining
    class is then above (1 - lower) * a and the merged one is at most (1 + lower) * a.
    The merged class keeps the smaller of the two color ids.

    Raises:
        EmptyColoring: If the coloring has no classes.
    """
    params = params or FairnessParams()
    if c.class_count == 0:
        raise EmptyColoring("cannot fairify a coloring without classes")
    lower = params.lower
    a = max(c.sizes.values())
    heap = [(size, -color) for color, size in c.sizes.items()]
    heapq.heapify(heap)
    groups: Dict[int, List[int]] = {color: [color] for color in c.sizes}
    merges: List[MergeStep] = []
    terminal = "check"
    while len(heap) > 1 and heap[0][0] < lower * a:
        size_r, neg_r = heapq.heappop(heap)
        size_r1, neg_r1 = heapq.heappop(heap)
        id_r, id_r1 = -neg_r, -neg_r1
        kept, absorbed = min(id_r, id_r1), max(id_r, id_r1)
        big = size_r1 > (1 - lower) * a
        groups[kept] = groups[kept] + groups.pop(absorbed)
        heapq.heappush(heap, (size_r + size_r1, -kept))
        merges.append(MergeStep(
            kept=kept,
            absorbed=absorbed,
            kept_size=size_r if kept == id_r else size_r1,
            absorbed_size=size_r1 if kept == id_r else size_r,
            max_size=a,
            big_branch=big,
        ))
        if big:
            terminal = "big-class"
            break
    ordered = sorted(heap, key=lambda item: (-item[0], -item[1]))
    labels = [-neg for _, neg in ordered]
    group_list = [sorted(groups[label]) for label in labels]
    result = c.merge_groups(group_list, labels)
    trace = GreedyTrace(merges=merges, max_size=a, terminal=terminal, t=len(labels), groups=group_list)
    logger.info(f"Greedy fairification: {c.class_count} -> {trace.t} classes with {len(merges)} merges ({terminal})")
    return result, trace


def _pack(items: Sequence[Tuple[int, int]], cap: Fraction) -> List[List[Tuple[int, int]]]:
    groups, current, total = [], [], 0
    for color, size in items:
        if current and total + size > cap:
            groups.append(current)
            current, total = [], 0
        current.append((color, size))
        total += size
    if current:
        groups.append(current)
    return groups


def _group_size(group: Sequence[Tuple[int, int]]) -> int:
    return sum(size for _, size in group)


def coarsen(c: Coloring, u, t: Optional[int] = None) -> Tuple[Coloring, CoarsenTrace]:
    """
    Pack classes, largest first, into groups of total size at most 10 * m * ell,
    where m = s / t and ell = t / u.

    When the last group is below 0.1 * m * ell, the last full group is re-packed
    with threshold 7 * m * ell and everything left over forms the final group; a
    final group still below 0.1 * m * ell is merged into its predecessor. Output
    color j is the j-th group.

    Raises:
        EmptyColoring: If the coloring has no classes.
        NonpositiveU: If u <= 0.
    """
    if c.class_count == 0:
        raise EmptyColoring("cannot coarsen a coloring without classes")
    u = as_fraction(u)
    if u <= 0:
        raise NonpositiveU(f"u={u} must be positive")
    if t is not None and t != c.class_count:
        raise ValueError(f"t={t} does not match the {c.class_count} classes of the coloring")
    t = c.class_count
    ordered = c.sorted_classes()
    m = Fraction(c.ground_size, t)
    ell = Fraction(t) / u
    unit = m * ell
    cap = 10 * unit
    if t <= u:
        trace = CoarsenTrace(
            m=m, ell=ell, cap=cap,
            group_sizes=[size for _, size in ordered],
            group_class_counts=[1] * t,
            groups=[[color] for color, _ in ordered],
            branch=CoarsenBranch.IDENTITY,
            k=t,
        )
        return c, trace

    groups = _pack(ordered, cap)
    floor = unit / 10
    big = [j for j, group in enumerate(groups) if _group_size(group) >= floor]
    branch = CoarsenBranch.CLEAN
    fallback = False
    if big and big[-1] < len(groups) - 1:
        kprime = big[-1]
        rest = [item for group in groups[kprime:] for item in group]
        repacked = _pack(rest, 7 * unit)[0]
        remaining = rest[len(repacked):]
        groups = groups[:kprime] + [repacked] + ([remaining] if remaining else [])
        branch = CoarsenBranch.LEFTOVER
        if remaining and _group_size(remaining) < floor:
            tail = groups.pop()
            groups[-1] = groups[-1] + tail
            branch = CoarsenBranch.FALLBACK
            fallback = True
            logger.warning(f"Coarsening merged an undersized final group ({_group_size(remaining)} < {floor})")

    color_groups = [[color for color, _ in group] for group in groups]
    result = c.merge_groups(color_groups)
    trace = CoarsenTrace(
        m=m, ell=ell, cap=cap,
        group_sizes=[_group_size(group) for group in groups],
        group_class_counts=[len(group) for group in groups],
        groups=color_groups,
        branch=branch,
        fallback_used=fallback,
        k=len(groups),
    )
    logger.info(f"Coarsening with u={u}: {t} -> {trace.k} classes ({branch.value})")
    return result, trace
