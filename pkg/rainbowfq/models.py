from fractions import Fraction
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from .geometry import Triangle
from .kinds import CoarsenBranch, GeneratorKind, SearchMode


def as_fraction(value) -> Fraction:
    """Coerce ints, strings ("1/10", "0.1") and floats to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


class ExactModel(BaseModel):
    """
    Base model for records carrying exact rationals and domain value objects.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class FairnessParams(ExactModel):
    """
    Bounds of the fairness predicate.

    Args:
        lower (Fraction): Lower factor; classes need at least lower * n elements.
        upper (Fraction): Upper factor; classes hold at most upper * n elements.
        n (Optional[Fraction]): Reference size; defaults to s / k for the coloring checked.
    """
    lower: Fraction = Field(Fraction(1, 10), description="Lower factor; classes need at least lower * n elements.")
    upper: Fraction = Field(Fraction(10), description="Upper factor; classes hold at most upper * n elements.")
    n: Optional[Fraction] = Field(None, description="Reference size; defaults to s / k for the coloring checked.")

    @field_validator("lower", "upper", "n", mode="before")
    @classmethod
    def coerce_exact(cls, value):
        return None if value is None else as_fraction(value)

    @model_validator(mode="after")
    def check_ordered(self):
        if not (0 < self.lower < 1 < self.upper):
            raise ValueError("fairness bounds must satisfy 0 < lower < 1 < upper")
        if self.n is not None and self.n <= 0:
            raise ValueError("reference size n must be positive")
        return self


class FairnessResult(ExactModel):
    """
    Outcome of a fairness check.

    Args:
        fair (bool): Whether every class size lies in [lower * n, upper * n].
        n (Fraction): Reference size used.
        witness_color (Optional[int]): Color of a smallest violating class.
        witness_size (Optional[int]): Size of that class.
    """
    fair: bool
    n: Fraction
    witness_color: Optional[int] = None
    witness_size: Optional[int] = None


class MergeStep(ExactModel):
    """
    One merge of the two smallest classes during greedy fairification.

    Args:
        kept (int): Color id carried by the merged class (the smaller of the two ids).
        absorbed (int): The other color id, merged into ``kept``.
        kept_size (int): Size of ``kept`` before the merge.
        absorbed_size (int): Size of ``absorbed``.
        max_size (int): Largest class size a at the time of the merge.
        big_branch (bool): True when ``kept_size > 0.9a`` (the merge ends the loop).
    """
    kept: int
    absorbed: int
    kept_size: int
    absorbed_size: int
    max_size: int
    big_branch: bool


class GreedyTrace(ExactModel):
    """
    Record of a greedy fairification run.
    """
    merges: List[MergeStep] = Field(default_factory=list, description="Every merge, in order.")
    max_size: int = Field(..., description="Largest input class size a.")
    terminal: str = Field(..., description="'check' when the size check passed, 'big-class' for the 0.9a branch.")
    t: int = Field(..., description="Number of output classes.")
    groups: List[List[int]] = Field(default_factory=list, description="Input color ids of each output class.")


class CoarsenTrace(ExactModel):
    """
    Record of a coarsening run.

    Args:
        m (Fraction): Average class size s / t.
        ell (Fraction): Group width t / u.
        cap (Fraction): Packing threshold 10 * m * ell.
        group_sizes (List[int]): Sizes of the output classes.
        group_class_counts (List[int]): Number of input classes per output class.
        groups (List[List[int]]): Input color ids forming each output class.
        branch (CoarsenBranch): Construction branch taken.
        fallback_used (bool): Whether a final undersized group was merged into its predecessor.
        k (int): Number of output classes.
    """
    m: Fraction
    ell: Fraction
    cap: Fraction
    group_sizes: List[int]
    group_class_counts: List[int]
    groups: List[List[int]]
    branch: CoarsenBranch
    fallback_used: bool = False
    k: int

    @field_serializer("m", "ell", "cap")
    def serialize_fraction(self, value: Fraction) -> str:
        return str(value)


class RainbowReport(ExactModel):
    """
    Result of a rainbow-triangle search.

    Args:
        mode (SearchMode): Search mode used.
        total_triangles (int): Number of unit equilateral triangles in the plane.
        rainbow_count (int): Rainbow triangles found (0 or 1 in first-witness mode).
        witness (Optional[Triangle]): Canonically least rainbow triangle, if any.
        witness_colors (Optional[Tuple[int, int, int]]): Colors of the witness vertices.
        mono_pair_count (int): Unordered same-color unit pairs T.
    """
    mode: SearchMode
    total_triangles: int
    rainbow_count: int
    witness: Optional[Triangle] = None
    witness_colors: Optional[Tuple[int, int, int]] = None
    mono_pair_count: int

    @model_validator(mode="after")
    def check_witness(self):
        if (self.witness is not None) != (self.rainbow_count > 0):
            raise ValueError("witness must be present exactly when rainbow_count > 0")
        return self


class SubsetPairStats(ExactModel):
    """
    Unit-distance statistics of a point set E.

    Args:
        subset_size (int): |E|.
        count (int): Ordered pairs (x, y) in E x E with d(x, y) = 1.
        ratio (Fraction): Normalized count q * count / |E|^2 (0 for empty E).
    """
    subset_size: int
    count: int
    ratio: Fraction

    @field_serializer("ratio")
    def serialize_ratio(self, value: Fraction) -> str:
        return str(value)


class ClassPairCount(ExactModel):
    """
    Same-color unit pairs contributed by one color class.

    Args:
        color (int): Color id.
        size (int): Class size.
        ordered_pairs (int): Ordered unit pairs inside the class.
        ratio (Fraction): q * ordered_pairs / size^2.
    """
    color: int
    size: int
    ordered_pairs: int
    ratio: Fraction

    @field_serializer("ratio")
    def serialize_ratio(self, value: Fraction) -> str:
        return str(value)


class BoundCheckReport(ExactModel):
    """
    The pigeonhole bound behind the counting argument: without a rainbow triangle,
    every triangle owns a same-color edge and every edge lies in two triangles.
    """
    mono_pairs: int = Field(..., description="Unordered same-color unit pairs T.")
    total_triangles: int
    rainbow_count: int
    bound_holds: bool = Field(..., description="rainbow_count > 0 or 2 * T >= total_triangles.")


class GeneratorSpec(ExactModel):
    """
    Parameters of a coloring generator.

    Args:
        kind (GeneratorKind): Generator to run.
        color_count (int): Number of colors, where the kind uses one.
        seed (int): Unsigned 64-bit seed.
        max_class_fraction (Optional[Fraction]): Upper cap on class size as a fraction of q^2 (fair-random).
    """
    kind: GeneratorKind
    color_count: int = Field(1, description="Number of colors, where the kind uses one.")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="Unsigned 64-bit seed.")
    max_class_fraction: Optional[Fraction] = Field(None, description="Upper cap on class size as a fraction of q^2.")

    @field_validator("max_class_fraction", mode="before")
    @classmethod
    def coerce_exact(cls, value):
        return None if value is None else as_fraction(value)


class ExperimentRecord(BaseModel):
    """
    One row of a sweep CSV. Column order is the field declaration order.
    """
    q: int
    p: int
    k_field: int
    circle_size: int
    ordered_pairs: int
    triangles: int
    coloring_seed: Optional[int] = None
    color_count: Optional[int] = None
    pipeline_t: Optional[int] = None
    pipeline_k: Optional[int] = None
    rainbow_found: Optional[bool] = None
    elapsed_millis: int = 0
    task: str = ""
    vinh_max_ratio: Optional[str] = None

    @model_validator(mode="after")
    def check_counts(self):
        if self.ordered_pairs != self.q ** 2 * self.circle_size:
            raise ValueError("ordered_pairs must equal q^2 * circle_size")
        if self.triangles and 3 * self.triangles != self.ordered_pairs:
            raise ValueError("3 * triangles must equal ordered_pairs when triangles exist")
        return self

    def csv_row(self) -> dict:
        row = {}
        for name, value in self.model_dump().items():
            if value is None:
                row[name] = ""
            elif isinstance(value, bool):
                row[name] = int(value)
            else:
                row[name] = value
        return row
