"""
Seeded coloring generators for F_q^2 and subset sampling.

Every generator draws from a PCG64 stream derived from ``SeedSequence(seed, spawn_key=(i,))``;
substream i = 0 is used for a single coloring, trial and cell indices select the others.
"""
import logging
from fractions import Fraction
from typing import List

import numpy as np

from .coloring import Coloring
from .error_models import RainbowFqError
from .field import FieldSpec
from .geometry import Point, distance
from .kinds import GeneratorKind
from .models import GeneratorSpec

logger = logging.getLogger(__name__)


class GeneratorError(RainbowFqError):
    """
    Base exception for generator parameter errors.
    """
    code = "generator_error"


class BadColorCount(GeneratorError):
    code = "bad_color_count"


class FieldTooSmall(GeneratorError):
    code = "field_too_small"


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent PCG64 generator for substream ``index`` of ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_subset(size: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform n-subset of [0, size) by partial Fisher-Yates, returned sorted."""
    if not 0 <= n <= size:
        raise ValueError(f"cannot sample {n} of {size} elements")
    pool = np.arange(size, dtype=np.int64)
    for i in range(n):
        j = int(rng.integers(i, size))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:n])


def _fair_sizes(total: int, colors: int, rng: np.random.Generator, max_fraction=None) -> List[int]:
    low = -(-total // (10 * colors))           # ceil(0.1 * total / colors)
    high = (10 * total) // colors
    if max_fraction is not None:
        high = min(high, int(Fraction(total) * max_fraction))
    if colors * low > total or colors * high < total or low > high:
        raise BadColorCount(f"no fair {colors}-coloring of {total} points within the class-size cap")
    weights = rng.exponential(1.0, size=colors)
    sizes = np.clip(np.floor(weights / weights.sum() * total).astype(np.int64), low, high)
    diff = total - int(sizes.sum())
    i = 0
    while diff:
        if diff > 0 and sizes[i] < high:
            step = min(diff, high - int(sizes[i]))
            sizes[i] += step
            diff -= step
        elif diff < 0 and sizes[i] > low:
            step = min(-diff, int(sizes[i]) - low)
            sizes[i] -= step
            diff += step
        i = (i + 1) % colors
    return [int(s) for s in sizes]


def _largest_prime_divisors(n: int) -> np.ndarray:
    largest = np.arange(n, dtype=np.int64)
    composite = np.zeros(n, dtype=bool)
    for p in range(2, n):
        if not composite[p]:
            composite[2 * p::p] = True
            largest[p::p] = p
    return largest


def degenerate_axis(field: FieldSpec) -> List[Point]:
    """
    The non-blue points of the degenerate example: (2e, 0) for the elements e whose
    constant coefficient lies in [1, (p - 1) / 2]; over a prime field these are the
    points (2i, 0), i = 1 .. floor(q / 2).
    """
    two = field.from_int(2)
    half = (field.p - 1) // 2
    return [Point(two * field.element(enc), field.zero)
            for enc in range(field.q) if 1 <= enc % field.p <= half]


def generate(field: FieldSpec, spec: GeneratorSpec) -> Coloring:
    """
    Build a coloring of F_q^2 for the given generator spec.

    Raises:
        BadColorCount: If the color count is unusable for the kind.
        FieldTooSmall: If the degenerate example is requested over a field with q < 3.
    """
    total = field.q ** 2
    rng = substream(spec.seed)
    kind = spec.kind
    needs_colors = kind in (GeneratorKind.UNIFORM_RANDOM, GeneratorKind.FAIR_RANDOM)
    if needs_colors and not 1 <= spec.color_count <= total:
        raise BadColorCount(f"color count {spec.color_count} outside [1, {total}]")

    if kind == GeneratorKind.MONOCHROME:
        assignment = np.zeros(total, dtype=np.int64)
    elif kind == GeneratorKind.ALL_DISTINCT:
        assignment = np.arange(total, dtype=np.int64)
    elif kind == GeneratorKind.UNIFORM_RANDOM:
        assignment = rng.integers(0, spec.color_count, size=total)
    elif kind == GeneratorKind.FAIR_RANDOM:
        sizes = _fair_sizes(total, spec.color_count, rng, spec.max_class_fraction)
        order = rng.permutation(total)
        assignment = np.empty(total, dtype=np.int64)
        assignment[order] = np.repeat(np.arange(spec.color_count, dtype=np.int64), sizes)
    elif kind == GeneratorKind.MAX2:
        order = rng.permutation(total)
        assignment = np.empty(total, dtype=np.int64)
        assignment[order] = np.arange(total, dtype=np.int64) // 2
    elif kind == GeneratorKind.PRIME_DIVISOR:
        assignment = _largest_prime_divisors(total)
    elif kind == GeneratorKind.DEGENERATE_EXAMPLE:
        if field.q < 3:
            raise FieldTooSmall("the degenerate example needs q >= 3")
        axis = degenerate_axis(field)
        for i, x in enumerate(axis):
            for y in axis[i + 1:]:
                if distance(x, y) == field.one:
                    raise GeneratorError(f"axis points {x} and {y} are a unit distance apart")
        assignment = np.zeros(total, dtype=np.int64)
        assignment[[pt.index for pt in axis]] = np.arange(1, len(axis) + 1, dtype=np.int64)
    else:
        raise GeneratorError(f"unknown generator kind {kind}")

    coloring = Coloring(assignment, field)
    logger.info(f"Generated {kind.value} coloring of F_{field.q}^2 with {coloring.class_count} colors")
    return coloring
