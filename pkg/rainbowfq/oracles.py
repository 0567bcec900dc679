"""
Brute-force oracles for small fields. They share no code path with the fast
constructions they check.
"""
from typing import List, Set, Tuple

import numpy as np

from .coloring import Coloring
from .field import FieldSpec
from .geometry import Point


def _squares(field: FieldSpec) -> np.ndarray:
    encs = np.arange(field.q, dtype=np.int64)
    return field.mul_arr(encs, encs)


def unit_circle_bruteforce(field: FieldSpec) -> List[Point]:
    """All (a, b) with a^2 + b^2 = 1, by scanning the q^2 pairs."""
    sq = _squares(field)
    found = []
    for a in range(field.q):
        sums = field.add_arr(np.full(field.q, sq[a]), sq)
        for b in np.nonzero(sums == 1)[0]:
            found.append(Point(field.element(a), field.element(int(b))))
    return found


def unit_adjacency(field: FieldSpec) -> np.ndarray:
    """Boolean q^2 x q^2 matrix of d(x, y) = 1, from coordinate differences."""
    q = field.q
    idx = np.arange(q * q, dtype=np.int64)
    xa, xb = idx // q, idx % q
    neg = np.array([field.neg_enc(int(e)) for e in range(q)], dtype=np.int64)
    sq = _squares(field)
    da = field.add_arr(xa[:, None], neg[xa][None, :])
    db = field.add_arr(xb[:, None], neg[xb][None, :])
    return field.add_arr(sq[da], sq[db]) == 1


def triangles_bruteforce(field: FieldSpec) -> List[Tuple[int, int, int]]:
    """Every index triple x < y < z with all three pairs at distance 1."""
    adj = unit_adjacency(field)
    found = []
    n = adj.shape[0]
    for x in range(n):
        above = np.nonzero(adj[x, x + 1:])[0] + x + 1
        for i, y in enumerate(above):
            for z in above[i + 1:]:
                if adj[y, z]:
                    found.append((x, int(y), int(z)))
    return found


def refines_bruteforce(fine: Coloring, coarse: Coloring) -> bool:
    """Subset check: every fine class is contained in some coarse class."""
    coarse_sets: List[Set[int]] = [set(members.tolist()) for members in coarse.classes.values()]
    for members in fine.classes.values():
        block = set(members.tolist())
        if not any(block <= candidate for candidate in coarse_sets):
            return False
    return True
