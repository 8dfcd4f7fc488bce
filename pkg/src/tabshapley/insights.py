"""Reordering and top-K maximum-sum rectangle extraction.

Rows and columns are sorted by ascending Shapley value so anomalies drift to
the top-left. Each cell then gets a reward (PA) or penalty (NA) that decays
with distance from the top-left corner, and disjoint maximum-sum rectangles
are peeled off one at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidAlpha, InvalidK, MatrixTooLarge
from .shapley import ShapleyScores, rank_ascending
from .table import LabelMatrix

DEFAULT_ALPHA = 0.2
DEFAULT_K = 3
BRUTE_FORCE_MAX_CELLS = 400
# sums closer than this count as ties; the two searches add in different
# orders, so float noise alone must not decide which rectangle wins
TIE_TOL = 1e-9


class Rect(NamedTuple):
    """Inclusive rectangle bounds."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def area(self) -> int:
        return (self.bottom - self.top + 1) * (self.right - self.left + 1)

    def slices(self) -> tuple[slice, slice]:
        return slice(self.top, self.bottom + 1), slice(self.left, self.right + 1)


@dataclass(frozen=True, eq=False)
class Reordering:
    row_perm: np.ndarray
    col_perm: np.ndarray
    reordered_labels: LabelMatrix
    record_ids: tuple = ()
    attribute_names: tuple = ()

    def original_labels(self) -> LabelMatrix:
        pa = np.empty_like(self.reordered_labels.pa)
        pa[np.ix_(self.row_perm, self.col_perm)] = self.reordered_labels.pa
        return LabelMatrix(pa)


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    scores: np.ndarray
    alpha: float
    excluded: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape


@dataclass(frozen=True)
class Insight:
    rank: int
    rect: Rect
    score_sum: float
    pa_count: int
    na_count: int
    record_ids: tuple
    attribute_names: tuple

    @property
    def row_range(self) -> tuple[int, int]:
        return self.rect.top, self.rect.bottom

    @property
    def col_range(self) -> tuple[int, int]:
        return self.rect.left, self.rect.right


def _check_alpha(alpha) -> float:
    try:
        alpha = float(alpha)
    except (TypeError, ValueError):
        raise InvalidAlpha(f"alpha must be a positive real, got {alpha!r}") from None
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidAlpha(f"alpha must be a positive real, got {alpha!r}")
    return alpha


def reorder(labels: LabelMatrix, scores: ShapleyScores, record_ids: Sequence = (), attribute_names: Sequence = ()) -> Reordering:
    n, m = labels.shape
    if len(scores.record_values) != n or len(scores.attribute_values) != m:
        raise DimensionMismatch("scores do not match the label matrix")
    rows = rank_ascending(scores.record_values)
    cols = rank_ascending(scores.attribute_values)
    ids = tuple(record_ids) if len(record_ids) else tuple(range(n))
    names = tuple(attribute_names) if len(attribute_names) else tuple(str(j) for j in range(m))
    return Reordering(rows, cols, LabelMatrix(labels.pa[np.ix_(rows, cols)]), ids, names)


def build_score_matrix(r: Reordering | LabelMatrix, alpha: float = DEFAULT_ALPHA) -> ScoreMatrix:
    alpha = _check_alpha(alpha)
    labels = r.reordered_labels if isinstance(r, Reordering) else r
    pa = labels.pa
    n, m = pa.shape
    decay = np.outer(np.arange(n), np.arange(m)) / (n * m)
    scores = np.where(pa, 1.0 - decay, alpha * (decay - 1.0))
    return ScoreMatrix(scores, alpha, np.zeros((n, m), dtype=bool))


def kadane_max_rect(s: ScoreMatrix) -> tuple[Rect, float] | None:
    """Maximum-sum rectangle avoiding excluded cells, or None if all are excluded.

    Runs a 1-D Kadane down the rows for every column pair at once, so the
    cost is O(n m^2) arithmetic in O(m^2) vectorized steps. A row whose strip
    touches an excluded cell resets the run. Sums within TIE_TOL are ties and
    go to the lexicographically smallest (top, left, bottom, right).
    """
    a = np.asarray(s.scores, dtype=float)
    n, m = a.shape
    left, right = np.triu_indices(m)
    csum = np.zeros((n, m + 1))
    np.cumsum(a, axis=1, out=csum[:, 1:])
    ccount = np.zeros((n, m + 1), dtype=np.int64)
    np.cumsum(s.excluded, axis=1, out=ccount[:, 1:])

    npairs = left.size
    cur = np.full(npairs, -np.inf)
    cur_top = np.zeros(npairs, dtype=np.int64)
    best = np.full(npairs, -np.inf)
    best_top = np.zeros(npairs, dtype=np.int64)
    best_bottom = np.zeros(npairs, dtype=np.int64)
    for i in range(n):
        x = csum[i, right + 1] - csum[i, left]
        blocked = ccount[i, right + 1] - ccount[i, left] > 0
        # extend on cur == 0 so the earlier top row wins ties
        extend = cur >= -TIE_TOL
        cur = np.where(extend, cur + x, x)
        cur_top = np.where(extend, cur_top, i)
        cur[blocked] = -np.inf
        with np.errstate(invalid="ignore"):  # -inf minus -inf
            tied = (np.abs(cur - best) <= TIE_TOL) & (cur_top < best_top) & ~blocked
        better = (cur > best + TIE_TOL) | tied
        best = np.where(better, cur, best)
        best_top = np.where(better, cur_top, best_top)
        best_bottom = np.where(better, i, best_bottom)
    top_sum = best.max()
    if top_sum == -np.inf:
        return None
    cand = np.flatnonzero(best >= top_sum - TIE_TOL)
    order = np.lexsort((right[cand], best_bottom[cand], left[cand], best_top[cand]))
    k = cand[order[0]]
    return Rect(int(best_top[k]), int(left[k]), int(best_bottom[k]), int(right[k])), float(best[k])


def brute_force_max_rect(s: ScoreMatrix) -> tuple[Rect, float] | None:
    """Exhaustive search over every rectangle, visited in tie-break order."""
    a = np.asarray(s.scores, dtype=float)
    n, m = a.shape
    if n * m > BRUTE_FORCE_MAX_CELLS:
        raise MatrixTooLarge(f"{n}x{m} exceeds {BRUTE_FORCE_MAX_CELLS} cells")
    blocked = np.zeros((n + 1, m + 1), dtype=np.int64)
    blocked[1:, 1:] = np.cumsum(np.cumsum(s.excluded, axis=0), axis=1)
    best = None
    for top in range(n):
        for lft in range(m):
            for bottom in range(top, n):
                for rgt in range(lft, m):
                    hits = (blocked[bottom + 1, rgt + 1] - blocked[top, rgt + 1]
                            - blocked[bottom + 1, lft] + blocked[top, lft])
                    if hits:
                        break  # widening further keeps the excluded cell
                    total = float(a[top:bottom + 1, lft:rgt + 1].sum())
                    if best is None or total > best[1] + TIE_TOL:
                        best = (Rect(top, lft, bottom, rgt), total)
    return best


def extract_top_k(r: Reordering, k: int = DEFAULT_K, alpha: float = DEFAULT_ALPHA) -> list[Insight]:
    """Peel off up to k disjoint maximum-sum rectangles.

    Stops early once no rectangle with a positive sum remains.
    """
    alpha = _check_alpha(alpha)
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise InvalidK(f"k must be a positive integer, got {k!r}")
    sm = build_score_matrix(r, alpha)
    excluded = np.zeros(sm.shape, dtype=bool)
    pa = r.reordered_labels.pa
    out = []
    for rank in range(1, k + 1):
        found = kadane_max_rect(ScoreMatrix(sm.scores, alpha, excluded))
        if found is None or found[1] <= 0:
            break
        rect, total = found
        rows, cols = rect.slices()
        n_pa = int(pa[rows, cols].sum())
        out.append(
            Insight(
                rank=rank,
                rect=rect,
                score_sum=total,
                pa_count=n_pa,
                na_count=rect.area - n_pa,
                record_ids=tuple(r.record_ids[i] for i in r.row_perm[rows]),
                attribute_names=tuple(r.attribute_names[j] for j in r.col_perm[cols]),
            )
        )
        excluded[rows, cols] = True
    return out
