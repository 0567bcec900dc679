"""
Points of F_q^2, the distance functional, the unit circle, apex construction and
unit equilateral triangle enumeration.

Bulk enumeration works on canonical point indices ``idx = enc(x1) * q + enc(x2)``.
Every unit equilateral triangle is a translate {x, x + v, x + w} of one with a vertex
at the origin, where v is a unit circle vector and w one of the two apexes of (0, v);
the canonical representative has idx(x) < idx(x + v) < idx(x + w).
"""
import concurrent.futures
import logging
import time
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .config import resolve_workers
from .error_models import RainbowFqError
from .field import FieldElement, FieldSpec, MixedFields, field_sqrt

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class GeometryError(RainbowFqError):
    """
    Base exception for geometric precondition failures.
    """
    code = "geometry_error"


class NotUnitPair(GeometryError):
    code = "not_unit_pair"


class InvalidS(GeometryError):
    code = "invalid_s"


@dataclass(frozen=True)
class Point:
    """
    A point of F_q^2.
    """
    x1: FieldElement
    x2: FieldElement

    def __post_init__(self):
        if self.x1.field != self.x2.field:
            raise MixedFields("point coordinates from different fields")

    @classmethod
    def from_index(cls, field: FieldSpec, idx: int) -> "Point":
        a, b = divmod(int(idx), field.q)
        return cls(field.element(a), field.element(b))

    @classmethod
    def of(cls, field: FieldSpec, a: int, b: int) -> "Point":
        """Point with prime-subfield coordinates (a mod p, b mod p)."""
        return cls(field.from_int(a), field.from_int(b))

    @property
    def field(self) -> FieldSpec:
        return self.x1.field

    @property
    def index(self) -> int:
        return self.x1.enc * self.field.q + self.x2.enc

    def __repr__(self) -> str:
        return f"Point({self.x1.enc}, {self.x2.enc})"

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x1 - other.x1, self.x2 - other.x2)

    def __neg__(self) -> "Point":
        return Point(-self.x1, -self.x2)

    def scale(self, c: FieldElement) -> "Point":
        return Point(self.x1 * c, self.x2 * c)

    def rotate(self) -> "Point":
        """Quarter-turn (a, b) -> (-b, a)."""
        return Point(-self.x2, self.x1)


def distance(x: Point, y: Point) -> FieldElement:
    """
    The distance functional d(x, y) = (x1 - y1)^2 + (x2 - y2)^2.

    Raises:
        MixedFields: If the points live over different fields.
    """
    if x.field != y.field:
        raise MixedFields("points from different fields")
    d1 = x.x1 - y.x1
    d2 = x.x2 - y.x2
    return d1 * d1 + d2 * d2


@dataclass(frozen=True)
class Triangle:
    """
    A unit equilateral triangle; vertices are kept sorted by point index.
    """
    vertices: Tuple[Point, Point, Point]

    def __post_init__(self):
        ordered = tuple(sorted(self.vertices, key=lambda pt: pt.index))
        if len({pt.index for pt in ordered}) != 3:
            raise GeometryError(f"degenerate triangle {ordered}")
        a, b, c = ordered
        if not (distance(a, b) == a.field.one and distance(a, c) == a.field.one
                and distance(b, c) == a.field.one):
            raise NotUnitPair(f"{ordered} is not a unit equilateral triangle")
        object.__setattr__(self, "vertices", ordered)

    @classmethod
    def from_indices(cls, field: FieldSpec, indices: Sequence[int]) -> "Triangle":
        return cls(tuple(Point.from_index(field, i) for i in indices))

    @property
    def indices(self) -> Tuple[int, int, int]:
        return tuple(pt.index for pt in self.vertices)

    def __repr__(self) -> str:
        return f"Triangle{self.indices}"


@dataclass(frozen=True)
class UnitCircle:
    """
    The solution set {v : v1^2 + v2^2 = 1}, vectors sorted by point index.
    """
    field: FieldSpec
    vectors: Tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.vectors)

    def __contains__(self, v: Point) -> bool:
        return v.index in self._indices

    @cached_property
    def _indices(self) -> frozenset:
        return frozenset(v.index for v in self.vectors)


@lru_cache(maxsize=32)
def unit_circle(field: FieldSpec) -> UnitCircle:
    """
    Build the unit circle by solving x2^2 = 1 - x1^2 for every abscissa x1.
    """
    vectors = []
    for a in range(field.q):
        x1 = field.element(a)
        roots = field_sqrt(field.one - x1 * x1)
        if roots:
            vectors.extend(Point(x1, r) for r in roots)
    logger.info(f"Unit circle over F_{field.q}: {len(vectors)} vectors")
    return UnitCircle(field, tuple(vectors))


def count_unit_pairs(field: FieldSpec) -> int:
    """Exact number of ordered pairs (x, y) with d(x, y) = 1, i.e. q^2 * |circle|."""
    return field.q ** 2 * len(unit_circle(field))


def sqrt3(field: FieldSpec) -> Optional[FieldElement]:
    """The root of s^2 = 3 with the smaller encoding, or None when 3 is a non-residue."""
    roots = field_sqrt(field.from_int(3))
    return roots[0] if roots else None


def triangles_exist(field: FieldSpec) -> bool:
    return sqrt3(field) is not None


def apexes(x: Point, y: Point, s: FieldElement) -> Tuple[Point, Point]:
    """
    The two points completing the unit pair (x, y) to unit equilateral triangles.

    With v = y - x and m = (x + y) / 2 the apexes are m +- (s / 2) * Rv, Rv the
    quarter-turn of v; <v, Rv> = 0 gives d(apex, x) = (1 + s^2) / 4 * d(x, y) = 1.

    Raises:
        NotUnitPair: If d(x, y) != 1.
        InvalidS: If s^2 != 3 or s = 0.
    """
    field = x.field
    if distance(x, y) != field.one:
        raise NotUnitPair(f"d({x}, {y}) != 1")
    if s.field != field or s.enc == 0 or s * s != field.from_int(3):
        raise InvalidS(f"{s} is not a square root of 3 in {field!r}")
    half = field.from_int(2).inverse()
    midpoint = (x + y).scale(half)
    offset = (y - x).rotate().scale(s * half)
    return midpoint + offset, midpoint - offset


def other_apex(x: Point, y: Point, z: Point, s: FieldElement) -> Point:
    """The apex of edge (x, y) that is not z."""
    first, second = apexes(x, y, s)
    return second if first == z else first


# ---------- index-space engine ----------

class UnitPlane:
    """
    Index-space view of F_q^2 used by every bulk enumeration.

    Holds the coordinate encodings of all q^2 points, the circle steps and, when a
    square root of 3 exists, the offset pairs (v, w) with w an apex of (0, v).
    """

    def __init__(self, field: FieldSpec):
        self.field = field
        self.q = field.q
        self.size = self.q * self.q
        self.indices = np.arange(self.size, dtype=np.int64)
        self.xa = self.indices // self.q
        self.xb = self.indices % self.q
        self.circle = unit_circle(field)
        self.steps: List[Tuple[int, int]] = [(v.x1.enc, v.x2.enc) for v in self.circle]
        self.s = sqrt3(field)
        self.offsets: List[Tuple[int, int, int, int]] = []
        if self.s is not None:
            origin = Point(field.zero, field.zero)
            for v in self.circle:
                for w in apexes(origin, v, self.s):
                    if w.index in (0, v.index):
                        raise GeometryError(f"degenerate apex {w} for step {v}")
                    self.offsets.append((v.x1.enc, v.x2.enc, w.x1.enc, w.x2.enc))

    def shift(self, va: int, vb: int, base: Optional[np.ndarray] = None) -> np.ndarray:
        """Indices of base + (va, vb) for every base index (all points by default)."""
        if base is None:
            xa, xb = self.xa, self.xb
        else:
            xa, xb = self.xa[base], self.xb[base]
        return self.field.add_arr(xa, va) * self.q + self.field.add_arr(xb, vb)


@lru_cache(maxsize=8)
def plane_for(field: FieldSpec) -> UnitPlane:
    return UnitPlane(field)


def split_chunks(items: Sequence[T], parts: int) -> List[Sequence[T]]:
    """Split items into at most ``parts`` contiguous, non-empty chunks."""
    parts = max(1, min(parts, len(items)))
    size, extra = divmod(len(items), parts)
    chunks, start = [], 0
    for i in range(parts):
        end = start + size + (1 if i < extra else 0)
        if end > start:
            chunks.append(items[start:end])
        start = end
    return chunks


def run_chunks(fn: Callable[[Sequence[T]], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """
    Apply fn to contiguous chunks of items, in parallel when threads != 1.

    Results are returned in chunk order so reductions do not depend on scheduling.
    """
    workers = resolve_workers(threads)
    chunks = split_chunks(items, workers)
    if workers == 1 or len(chunks) <= 1:
        return [fn(chunk) for chunk in chunks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, chunks))


def count_triangles(field: FieldSpec, threads: int = 1) -> int:
    """Number of unit equilateral triangles, counted by enumeration."""
    plane = plane_for(field)
    if not plane.offsets:
        return 0
    start_time = time.time()
    x = plane.indices

    def count_chunk(offsets):
        total = 0
        for va, vb, wa, wb in offsets:
            y = plane.shift(va, vb)
            z = plane.shift(wa, wb)
            total += int(np.count_nonzero((x < y) & (y < z)))
        return total

    total = sum(run_chunks(count_chunk, plane.offsets, threads))
    logger.info(f"Triangle count over F_{field.q}: {total} (completed in {time.time() - start_time:.2f}s)")
    return total


def triangle_array(field: FieldSpec, threads: int = 1) -> np.ndarray:
    """All triangles as a (T, 3) array of sorted index triples, in lexicographic order."""
    plane = plane_for(field)
    if not plane.offsets:
        return np.zeros((0, 3), dtype=np.int64)
    x = plane.indices

    def collect_chunk(offsets):
        rows = []
        for va, vb, wa, wb in offsets:
            y = plane.shift(va, vb)
            z = plane.shift(wa, wb)
            keep = (x < y) & (y < z)
            rows.append(np.stack([x[keep], y[keep], z[keep]], axis=1))
        return np.concatenate(rows) if rows else np.zeros((0, 3), dtype=np.int64)

    triples = np.concatenate(run_chunks(collect_chunk, plane.offsets, threads))
    order = np.lexsort((triples[:, 2], triples[:, 1], triples[:, 0]))
    return triples[order]


def enumerate_triangles(field: FieldSpec, threads: int = 1) -> Iterator[Triangle]:
    """Yield every unit equilateral triangle exactly once, in canonical order."""
    for row in triangle_array(field, threads):
        yield Triangle.from_indices(field, row)


def first_triangle(field: FieldSpec) -> Optional[Triangle]:
    """The canonically least triangle; its least vertex is the origin (index 0)."""
    plane = plane_for(field)
    base = np.zeros(1, dtype=np.int64)
    best = None
    for va, vb, wa, wb in plane.offsets:
        y = int(plane.shift(va, vb, base)[0])
        z = int(plane.shift(wa, wb, base)[0])
        if 0 < y < z and (best is None or (y, z) < best):
            best = (y, z)
    if best is None:
        return None
    return Triangle.from_indices(field, (0,) + best)
