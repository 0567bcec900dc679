"""
Seeded experiment sweeps and the subset unit-distance experiment, emitted as CSV.
"""
import concurrent.futures
import csv
import logging
import math
import time
from fractions import Fraction
from typing import List, Optional, Sequence, TextIO

from .config import resolve_workers
from .error_models import RainbowFqError
from .field import FieldSpec, make_field, parse_prime_power
from .generators import generate, sample_subset, substream
from .geometry import count_triangles, count_unit_pairs, unit_circle
from .kinds import GeneratorKind, SweepTask
from .models import ExperimentRecord, GeneratorSpec, SubsetPairStats
from .rainbow import RainbowService

logger = logging.getLogger(__name__)

CSV_COLUMNS = list(ExperimentRecord.model_fields)
VINH_COLUMNS = ["trial", "subset_size", "count", "ratio", "ratio_decimal"]
TASK_ORDER = {task: i for i, task in enumerate(SweepTask)}


class SubsetTooLarge(RainbowFqError):
    code = "subset_too_large"


def field_for_q(q: int, seed: int = 0) -> FieldSpec:
    """Field of order q (modulus search seeded by ``seed`` for extension fields)."""
    p, k = parse_prime_power(q)
    return make_field(p, k, seed=seed)


def ceil_sqrt_cube(q: int) -> int:
    """ceil(q^{3/2})."""
    root = math.isqrt(q ** 3)
    return root if root * root == q ** 3 else root + 1


def _decimal(value: Fraction) -> str:
    return f"{float(value):.6f}"


def _writer(out: TextIO, columns: Sequence[str]) -> csv.DictWriter:
    writer = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    return writer


def vinh_experiment(field: FieldSpec, subset_size: int, trial_count: int, seed: int,
                    out: Optional[TextIO] = None, threads: int = 1) -> List[SubsetPairStats]:
    """
    Sample ``trial_count`` uniform subsets of the plane and record their unit-pair
    counts and normalized ratios q * count / n^2. Trial i draws from substream i.

    Raises:
        SubsetTooLarge: If subset_size exceeds q^2.
    """
    total = field.q ** 2
    if not 0 <= subset_size <= total:
        raise SubsetTooLarge(f"subset size {subset_size} outside [0, {total}]")
    service = RainbowService(threads=threads)
    writer = _writer(out, VINH_COLUMNS) if out is not None else None
    results = []
    for trial in range(trial_count):
        subset = sample_subset(total, subset_size, substream(seed, trial))
        stats = service.subset_unit_pairs(field, subset)
        results.append(stats)
        if writer:
            writer.writerow({
                "trial": trial,
                "subset_size": stats.subset_size,
                "count": stats.count,
                "ratio": str(stats.ratio),
                "ratio_decimal": _decimal(stats.ratio),
            })
    if results:
        logger.info(f"Subset experiment over F_{field.q}^2: max ratio {_decimal(max(r.ratio for r in results))}")
    return results


def run_cell(q: int, task: SweepTask, seed: int, trial: int = 0,
             color_count: Optional[int] = None, vinh_trials: int = 1) -> ExperimentRecord:
    """Run one (q, task, trial) cell of a sweep."""
    start_time = time.time()
    field = field_for_q(q, seed)
    circle = len(unit_circle(field))
    record = dict(
        q=q, p=field.p, k_field=field.k,
        circle_size=circle,
        ordered_pairs=count_unit_pairs(field),
        triangles=count_triangles(field),
        task=task.value,
    )
    service = RainbowService(threads=1)
    if task == SweepTask.PIPELINE:
        colors = color_count or q
        coloring_seed = seed + trial
        coloring = generate(field, GeneratorSpec(kind=GeneratorKind.FAIR_RANDOM, color_count=colors,
                                                 seed=coloring_seed))
        record.update(coloring_seed=coloring_seed, color_count=coloring.class_count)
        if record["triangles"]:
            report = service.theorem_pipeline(coloring)
            record.update(pipeline_t=report.t, pipeline_k=report.k, rainbow_found=report.witness is not None)
        else:
            record.update(rainbow_found=False)
    elif task == SweepTask.VINH:
        stats = vinh_experiment(field, min(ceil_sqrt_cube(q), q * q), vinh_trials, seed + trial)
        record.update(coloring_seed=seed + trial, vinh_max_ratio=_decimal(max(s.ratio for s in stats)))
    record["elapsed_millis"] = int((time.time() - start_time) * 1000)
    return ExperimentRecord(**record)


def sweep(q_list: Sequence[int], tasks: Sequence[SweepTask], seed: int, out: TextIO,
          threads: int = 1, color_count: Optional[int] = None, repeats: int = 1,
          vinh_trials: int = 1) -> List[ExperimentRecord]:
    """
    Run every (q, task, trial) cell and write one CSV row per cell, ordered by
    (q, task, trial) regardless of completion order.

    Raises:
        InadmissibleField: If some q is not an admissible field order.
    """
    for q in q_list:
        field_for_q(q, seed)
    cells = [(q, SweepTask(task), trial) for q in q_list for task in tasks for trial in range(repeats)]
    workers = resolve_workers(threads)

    def run(cell):
        q, task, trial = cell
        return cell, run_cell(q, task, seed, trial, color_count, vinh_trials)

    if workers == 1 or len(cells) <= 1:
        results = [run(cell) for cell in cells]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, cells))
    results.sort(key=lambda item: (item[0][0], TASK_ORDER[item[0][1]], item[0][2]))
    writer = _writer(out, CSV_COLUMNS)
    records = [record for _, record in results]
    for record in records:
        writer.writerow(record.csv_row())
    logger.info(f"Sweep wrote {len(records)} records")
    return records
