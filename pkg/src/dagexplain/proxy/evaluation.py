"""Fidelity of the pair classifier: accuracy, ROC/AUC and the confusion matrix (PN is the positive class)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import RandomForest
from .pairing import PN, PairedInstance, pairs_to_arrays


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class FidelityReport:
    accuracy: float
    roc: tuple[tuple[float, float], ...]
    auc: float
    # rows: actual PN, actual NP; columns: predicted PN, predicted NP
    confusion: tuple[tuple[int, int], tuple[int, int]]
    n_pn: int
    n_np: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "auc": self.auc,
            "roc": [list(p) for p in self.roc],
            "confusion": {
                "labels": ["PN", "NP"],
                "matrix": [list(r) for r in self.confusion],
            },
            "n_pn": self.n_pn,
            "n_np": self.n_np,
        }


def roc_curve(labels, scores) -> list[tuple[float, float]]:
    """ROC points from (0, 0) to (1, 1), one per distinct score threshold (``score >= t`` is PN)."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    pos = labels == PN
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("ROC needs both classes")
    order = np.argsort(-scores, kind="stable")
    s, p = scores[order], pos[order]
    tp = np.cumsum(p)
    fp = np.cumsum(~p)
    # keep the last index of each run of equal scores
    last = np.r_[s[1:] != s[:-1], True]
    points = [(0.0, 0.0)]
    points += [(fp[i] / n_neg, tp[i] / n_pos) for i in np.flatnonzero(last)]
    return [(float(a), float(b)) for a, b in points]


def auc_trapezoid(roc) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(roc, roc[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def confusion_matrix(labels, predicted) -> tuple[tuple[int, int], tuple[int, int]]:
    labels = np.asarray(labels)
    predicted = np.asarray(predicted)
    a_pn, p_pn = labels == PN, predicted == PN
    return (
        (int((a_pn & p_pn).sum()), int((a_pn & ~p_pn).sum())),
        (int((~a_pn & p_pn).sum()), int((~a_pn & ~p_pn).sum())),
    )


def fidelity_from_scores(labels, scores, threshold: float = 0.5) -> FidelityReport:
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    roc = roc_curve(labels, scores)
    predicted = np.where(scores >= threshold, PN, 1 - PN)
    return FidelityReport(
        accuracy=float(np.mean(predicted == labels)),
        roc=tuple(roc),
        auc=auc_trapezoid(roc),
        confusion=confusion_matrix(labels, predicted),
        n_pn=int((labels == PN).sum()),
        n_np=int((labels != PN).sum()),
    )


def evaluate_classifier(forest: RandomForest, test_pairs: list[PairedInstance]) -> FidelityReport:
    X, y = pairs_to_arrays(test_pairs)
    if len(np.unique(y)) < 2:
        raise EvaluationError("test set must contain both PN and NP pairs")
    return fidelity_from_scores(y, forest.pn_fraction(X))
