"""TOPSIS and weighted-sum ranking of candidate correspondents.

All criteria are benefit criteria: a higher judgment entry is always better.
Weights are applied as given (0..10), without rescaling to sum to one.
"""
import json
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .common import EmptyInputError, InvalidInputError, id_key
from .profiles import JudgmentMatrix, WeightVector


@dataclass(frozen=True)
class RankingResult:
    evaluator_id: str
    method: str
    scores: Dict[str, float]
    preference_list: Tuple[str, ...]


@dataclass(frozen=True)
class TopsisTrace:
    normalized: np.ndarray
    weighted: np.ndarray
    positive_ideal: np.ndarray
    negative_ideal: np.ndarray
    sep_positive: np.ndarray
    sep_negative: np.ndarray
    closeness: np.ndarray

    def to_json(self, candidate_ids: Sequence[str] = (), criteria: Sequence[str] = ()) -> str:
        doc = {
            "candidates": list(candidate_ids),
            "criteria": list(criteria),
            "normalized": self.normalized.tolist(),
            "weighted": self.weighted.tolist(),
            "positive_ideal": self.positive_ideal.tolist(),
            "negative_ideal": self.negative_ideal.tolist(),
            "sep_positive": self.sep_positive.tolist(),
            "sep_negative": self.sep_negative.tolist(),
            "closeness": self.closeness.tolist(),
        }
        return json.dumps(doc, indent=2)


def _entries(matrix) -> np.ndarray:
    x = np.asarray(getattr(matrix, "entries", matrix), dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInputError("judgment matrix must be a non-empty 2-D array")
    return x


def _weights(w, criteria=None) -> np.ndarray:
    if isinstance(w, WeightVector):
        return w.as_array(criteria)
    return np.asarray(w, dtype=float)


def normalize(matrix) -> np.ndarray:
    """Divide each column by its Euclidean norm; zero columns stay zero."""
    x = _entries(matrix)
    norms = np.sqrt((x ** 2).sum(axis=0))
    safe = np.where(norms > 0, norms, 1.0)
    return x / safe


def weight(r, w) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    w = _weights(w)
    if w.shape != (r.shape[1],):
        raise InvalidInputError(f"{w.size} weights for {r.shape[1]} criteria")
    return r * w


def ideal_solutions(v) -> Tuple[np.ndarray, np.ndarray]:
    """Column-wise best (max) and worst (min) weighted values."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise EmptyInputError("empty weighted matrix")
    return v.max(axis=0), v.min(axis=0)


def separations(v, a_pos, a_neg) -> Tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=float)
    s_pos = np.sqrt(((v - a_pos) ** 2).sum(axis=1))
    s_neg = np.sqrt(((v - a_neg) ** 2).sum(axis=1))
    return s_pos, s_neg


def closeness(s_pos, s_neg) -> np.ndarray:
    """Relative closeness ``S- / (S* + S-)``; 0.5 when both distances vanish."""
    s_pos = np.asarray(s_pos, dtype=float)
    s_neg = np.asarray(s_neg, dtype=float)
    if s_pos.shape != s_neg.shape:
        raise InvalidInputError("separation vectors differ in length")
    total = s_pos + s_neg
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(total > 0, s_neg / np.where(total > 0, total, 1.0), 0.5)
    return c


def _order(ids: Sequence[str], scores: np.ndarray) -> Tuple[str, ...]:
    keyed = sorted(range(len(ids)), key=lambda i: (-scores[i], id_key(ids[i])))
    return tuple(ids[i] for i in keyed)


def _ids(matrix, n):
    ids = getattr(matrix, "candidate_ids", None)
    return tuple(ids) if ids is not None else tuple(f"alt{i + 1}" for i in range(n))


def topsis_rank(matrix, w) -> Tuple[RankingResult, TopsisTrace]:
    """Rank the rows of a judgment matrix by closeness to the ideal solution.

    Ties in closeness are broken by ascending candidate identifier.
    """
    x = _entries(matrix)
    w = _weights(w, getattr(matrix, "criteria", None))
    r = normalize(x)
    v = weight(r, w)
    a_pos, a_neg = ideal_solutions(v)
    s_pos, s_neg = separations(v, a_pos, a_neg)
    c = closeness(s_pos, s_neg)
    ids = _ids(matrix, x.shape[0])
    result = RankingResult(
        getattr(matrix, "evaluator_id", ""),
        "topsis",
        {i: float(s) for i, s in zip(ids, c)},
        _order(ids, c),
    )
    return result, TopsisTrace(r, v, a_pos, a_neg, s_pos, s_neg, c)


def wsm_rank(matrix, w) -> RankingResult:
    """Weighted-sum baseline over the raw (un-normalized) judgment entries."""
    x = _entries(matrix)
    w = _weights(w, getattr(matrix, "criteria", None))
    if w.shape != (x.shape[1],):
        raise InvalidInputError(f"{w.size} weights for {x.shape[1]} criteria")
    scores = x @ w
    ids = _ids(matrix, x.shape[0])
    return RankingResult(
        getattr(matrix, "evaluator_id", ""),
        "wsm",
        {i: float(s) for i, s in zip(ids, scores)},
        _order(ids, scores),
    )


def weight_superiority(row_n, row_m, w) -> float:
    """Total weight of the criteria on which ``row_n`` strictly beats ``row_m``."""
    row_n = np.asarray(row_n, dtype=float)
    row_m = np.asarray(row_m, dtype=float)
    w = _weights(w)
    if not row_n.shape == row_m.shape == w.shape or row_n.ndim != 1:
        raise InvalidInputError("rows and weights must share one criterion set")
    return float(w[row_n > row_m].sum())


def batch_closeness(tensor: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """TOPSIS closeness for many evaluators at once.

    ``tensor`` has shape (evaluators, candidates, criteria) and ``weights``
    (evaluators, criteria); returns (evaluators, candidates).
    """
    x = np.asarray(tensor, dtype=float)
    w = np.asarray(weights, dtype=float)
    norms = np.sqrt((x ** 2).sum(axis=1, keepdims=True))
    r = x / np.where(norms > 0, norms, 1.0)
    v = r * w[:, None, :]
    a_pos = v.max(axis=1, keepdims=True)
    a_neg = v.min(axis=1, keepdims=True)
    s_pos = np.sqrt(((v - a_pos) ** 2).sum(axis=2))
    s_neg = np.sqrt(((v - a_neg) ** 2).sum(axis=2))
    return closeness(s_pos, s_neg)
