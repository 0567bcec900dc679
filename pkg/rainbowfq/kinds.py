from enum import Enum


class GeneratorKind(str, Enum):
    """
    Enum for supported coloring generators.
    """
    UNIFORM_RANDOM = "uniform-random"
    FAIR_RANDOM = "fair-random"
    MAX2 = "max2"                          # every class has at most two points
    DEGENERATE_EXAMPLE = "degenerate-example"  # axis points rainbow, rest blue
    MONOCHROME = "monochrome"
    ALL_DISTINCT = "all-distinct"
    PRIME_DIVISOR = "prime-divisor"        # color = largest prime divisor of the point index


class SearchMode(str, Enum):
    COUNT_ALL = "count-all"
    FIRST_WITNESS = "first-witness"


class CoarsenBranch(str, Enum):
    IDENTITY = "identity"
    CLEAN = "clean"
    LEFTOVER = "leftover-7ml"
    FALLBACK = "fallback-merge"


class SweepTask(str, Enum):
    COUNTS = "counts"
    PIPELINE = "pipeline"
    VINH = "vinh"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"
    CSV = "csv"
