"""Selection-quality metrics; the intercept is excluded from scoring."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


def auc(scores: np.ndarray, truth: np.ndarray) -> float:
    """Rank-statistic AUC with tie-averaging; nan if truth is one-class."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth, dtype=bool)
    npos = int(truth.sum())
    nneg = truth.size - npos
    if npos == 0 or nneg == 0:
        return float("nan")
    ranks = rankdata(scores)
    return (float(ranks[truth].sum()) - npos * (npos + 1) / 2.0) / (npos * nneg)


def confusion(selected: np.ndarray, truth: np.ndarray) -> dict:
    selected = np.asarray(selected, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    tp = int((selected & truth).sum())
    fp = int((selected & ~truth).sum())
    fn = int((~selected & truth).sum())
    return {"tp": tp, "fp": fp, "fn": fn}


def selection_metrics(
    mip: np.ndarray,
    selected: np.ndarray,
    beta_true: np.ndarray,
    beta_hat: np.ndarray | None = None,
) -> dict:
    """AUC / F1 / TPR / FDR over covariates 2..p, plus MSE over all of beta.

    ``mip`` scores the ranking (AUC), ``selected`` is the binary choice
    (median-probability or MaP mask).  FDR of an empty selection is 0 by
    convention so that aggregation over replications stays defined.
    """
    mip = np.asarray(mip, dtype=float)
    selected = np.asarray(selected, dtype=bool)
    beta_true = np.asarray(beta_true, dtype=float)
    truth = beta_true[1:] != 0.0
    sel = selected[1:]
    c = confusion(sel, truth)
    tp, fp, fn = c["tp"], c["fp"], c["fn"]
    tpr = tp / max(tp + fn, 1)
    fdr = fp / (tp + fp) if (tp + fp) > 0 else 0.0
    f1 = 2.0 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
    out = {
        "auc": auc(mip[1:], truth),
        "f1": f1,
        "tpr": tpr,
        "fdr": fdr,
    }
    if beta_hat is not None:
        d = np.asarray(beta_hat, dtype=float) - beta_true
        out["mse"] = float(d @ d) / beta_true.size
    return out
