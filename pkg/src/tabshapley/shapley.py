"""Evidence sets, the union-cardinality game and its Shapley values.

An attribute's evidence set is the set of records whose cell under that
attribute is NA. The attribute game assigns to a coalition of attributes the
number of records covered by the union of their evidence sets. Its Shapley
value has a closed form: each record splits one unit of payoff evenly among
the attributes whose evidence sets contain it. Records get the dual game.

Lower values mean more anomalous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, TooManyPlayers
from .table import ErrorMatrix, LabelMatrix

MAX_PLAYERS = 12


@dataclass(frozen=True, eq=False)
class EvidenceSets:
    na: np.ndarray  # n x m bool, True where the cell is NA
    attribute_sets: tuple[frozenset[int], ...]
    record_sets: tuple[frozenset[int], ...]
    record_na_count: np.ndarray
    attribute_na_count: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.na.shape


@dataclass(frozen=True)
class ShapleyScores:
    attribute_values: np.ndarray
    record_values: np.ndarray
    weighted: bool = False


@dataclass(frozen=True)
class GameOracle:
    """A characteristic-function game over players ``0..player_count-1``."""

    player_count: int
    characteristic: Callable[[frozenset], float]

    def value(self, coalition) -> float:
        coalition = frozenset(coalition)
        return 0 if not coalition else self.characteristic(coalition)


def build_evidence_sets(labels: LabelMatrix) -> EvidenceSets:
    na = np.array(labels.na)
    na.setflags(write=False)
    attribute_sets = tuple(frozenset(np.flatnonzero(col).tolist()) for col in na.T)
    record_sets = tuple(frozenset(np.flatnonzero(row).tolist()) for row in na)
    return EvidenceSets(
        na=na,
        attribute_sets=attribute_sets,
        record_sets=record_sets,
        record_na_count=na.sum(axis=1),
        attribute_na_count=na.sum(axis=0),
    )


def characteristic_attributes(s, ev: EvidenceSets) -> int:
    s = list(s)
    if not s:
        return 0
    return int(ev.na[:, s].any(axis=1).sum())


def characteristic_records(s, ev: EvidenceSets) -> int:
    s = list(s)
    if not s:
        return 0
    return int(ev.na[s, :].any(axis=0).sum())


def _inverse_or_zero(counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    return np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)


def shapley_attributes(ev: EvidenceSets) -> np.ndarray:
    """phi(a_j) = sum over records i in E_{a_j} of 1 / (number of evidence sets containing i)."""
    share = _inverse_or_zero(ev.record_na_count)
    # a plain reduction, unlike BLAS, adds identical columns in identical order,
    # so symmetric players get bit-equal values and ranking ties stay ties
    return np.where(ev.na, share[:, None], 0.0).sum(axis=0)


def shapley_records(ev: EvidenceSets) -> np.ndarray:
    share = _inverse_or_zero(ev.attribute_na_count)
    return np.where(ev.na, share[None, :], 0.0).sum(axis=1)


def _weighted_shares(weights: np.ndarray, na: np.ndarray, axis: int) -> np.ndarray:
    w = np.where(na, weights, 0.0)
    total = w.sum(axis=axis, keepdims=True)
    return np.divide(w, total, out=np.zeros_like(w), where=total > 0)


def _check_error_dims(ev: EvidenceSets, e: ErrorMatrix) -> np.ndarray:
    if e.shape != ev.shape:
        raise DimensionMismatch(f"error matrix is {e.shape}, labels are {ev.shape}")
    return e.values


def shapley_attributes_weighted(ev: EvidenceSets, e: ErrorMatrix) -> np.ndarray:
    """Each record splits one unit among its NA attributes in proportion to their errors.

    A record whose NA-cell errors are all zero contributes nothing.
    """
    w = _check_error_dims(ev, e)
    return _weighted_shares(w, ev.na, axis=1).sum(axis=0)


def shapley_records_weighted(ev: EvidenceSets, e: ErrorMatrix) -> np.ndarray:
    w = _check_error_dims(ev, e)
    return _weighted_shares(w, ev.na, axis=0).sum(axis=1)


def compute_scores(ev: EvidenceSets, e: ErrorMatrix | None = None, weighted: bool = False) -> ShapleyScores:
    if weighted:
        if e is None:
            raise ValueError("weighted scores need an error matrix")
        return ShapleyScores(shapley_attributes_weighted(ev, e), shapley_records_weighted(ev, e), True)
    return ShapleyScores(shapley_attributes(ev), shapley_records(ev), False)


def attribute_game(ev: EvidenceSets) -> GameOracle:
    return GameOracle(ev.shape[1], lambda s: characteristic_attributes(s, ev))


def record_game(ev: EvidenceSets) -> GameOracle:
    return GameOracle(ev.shape[0], lambda s: characteristic_records(s, ev))


def weighted_attribute_game(ev: EvidenceSets, e: ErrorMatrix) -> GameOracle:
    """Additive game whose worth is the summed error share of the coalition's NA cells."""
    shares = _weighted_shares(_check_error_dims(ev, e), ev.na, axis=1)
    return GameOracle(ev.shape[1], lambda s: float(shares[:, sorted(s)].sum()))


def _coalition_values(g: GameOracle) -> list:
    if g.player_count > MAX_PLAYERS:
        raise TooManyPlayers(f"{g.player_count} players exceeds the cap of {MAX_PLAYERS}")
    n = g.player_count
    values = [0] * (1 << n)
    for mask in range(1, 1 << n):
        values[mask] = g.characteristic(frozenset(i for i in range(n) if mask >> i & 1))
    return values


def _subset_weights(n: int) -> list[Fraction]:
    # weight of a coalition of size s not containing the player
    return [Fraction(math.factorial(s) * math.factorial(n - s - 1), math.factorial(n)) for s in range(n)]


def shapley_brute_force(g: GameOracle, exact: bool = False):
    """Shapley values by enumerating every coalition with factorial weights.

    With ``exact=True`` the result is a list of ``Fraction`` computed in
    rational arithmetic; otherwise a float array.
    """
    n = g.player_count
    values = _coalition_values(g)
    weights = _subset_weights(n)
    if exact:
        v = [Fraction(x) for x in values]
        out = []
        for i in range(n):
            bit = 1 << i
            total = Fraction(0)
            for mask in range(1 << n):
                if not mask & bit:
                    total += weights[mask.bit_count()] * (v[mask | bit] - v[mask])
            out.append(total)
        return out
    v = np.array(values, dtype=float)
    masks = np.arange(1 << n)
    sizes = np.array([int(x).bit_count() for x in masks])
    w = np.array([float(x) for x in weights] + [0.0])[sizes]
    out = np.empty(n)
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        out[i] = np.sum(w[without] * (v[without | bit] - v[without]))
    return out


def find_superadditivity_violation(g: GameOracle, tol: float = 0.0):
    """Return a disjoint pair ``(S, R)`` with v(S | R) < v(S) + v(R), or None."""
    n = g.player_count
    values = _coalition_values(g)
    full = (1 << n) - 1
    for s in range(1, full + 1):
        rest = full & ~s
        r = rest
        while r:
            # each unordered pair is visited twice; cheap enough at n <= 12
            if values[s | r] < values[s] + values[r] - tol:
                as_set = lambda mask: frozenset(i for i in range(n) if mask >> i & 1)
                return as_set(s), as_set(r)
            r = (r - 1) & rest
    return None


def verify_superadditive(g: GameOracle, tol: float = 0.0) -> bool:
    return find_superadditivity_violation(g, tol) is None


def rank_ascending(scores) -> np.ndarray:
    """Indices sorted by ascending score, ties by index; most anomalous first."""
    return np.argsort(np.asarray(scores, dtype=float), kind="stable")
