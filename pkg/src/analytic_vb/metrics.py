"""Next-item recommendation metrics and the popularity / item-kNN baselines."""

import numpy as np

from .sessions import SessionDataset

__all__ = [
    "ranked_top_k",
    "recall_at_k",
    "tdcg_at_k",
    "pop_baseline",
    "itemknn_baseline",
    "evaluate",
]


def ranked_top_k(scores, k):
    """Item ids of the k highest scores, ties broken by ascending id."""
    scores = np.asarray(scores, dtype=float)
    if k > scores.size:
        raise ValueError("k exceeds the number of items")
    order = np.argsort(-scores, kind="stable")
    return order[:k]


def recall_at_k(recommended, held_out, k):
    """1 if the held-out item appears in the top k, else 0."""
    recommended = np.asarray(recommended)
    if k > recommended.size:
        raise ValueError("k exceeds the ranked-list length")
    return int(held_out in recommended[:k])


def tdcg_at_k(recommended, held_out, k):
    """1/log2(rank + 1) if the held-out item has rank <= k (rank from 1)."""
    recommended = np.asarray(recommended)
    if k > recommended.size:
        raise ValueError("k exceeds the ranked-list length")
    hits = np.nonzero(recommended[:k] == held_out)[0]
    if hits.size == 0:
        return 0.0
    rank = int(hits[0]) + 1
    return float(1.0 / np.log2(rank + 1))


def pop_baseline(train: SessionDataset):
    """Scorer returning global item counts, regardless of context."""
    counts = np.zeros(train.catalog_size)
    for session in train.sessions:
        np.add.at(counts, session, 1.0)

    def scorer(context):
        return counts.copy()

    return scorer


def itemknn_baseline(train: SessionDataset):
    """Scorer by Pearson correlation to the most recently viewed item.

    Correlations are computed between per-session occurrence indicators;
    items with undefined variance get zero correlation.  The query item
    itself is excluded from its own recommendations.
    """
    p = train.catalog_size
    u = train.n_sessions
    indicator = np.zeros((u, p))
    for i, session in enumerate(train.sessions):
        indicator[i, np.unique(session)] = 1.0
    centered = indicator - indicator.mean(axis=0)
    norms = np.sqrt(np.sum(centered * centered, axis=0))
    safe = np.where(norms > 0, norms, 1.0)
    corr = (centered.T @ centered) / np.outer(safe, safe)
    corr[norms == 0, :] = 0.0
    corr[:, norms == 0] = 0.0

    def scorer(context):
        last = int(np.asarray(context)[-1])
        scores = corr[:, last].copy()
        scores[last] = -np.inf
        return scores

    return scorer


def evaluate(scorer, test: SessionDataset, k=5):
    """Leave-last-out evaluation: context is the session minus its final
    item, which becomes the single relevant item."""
    recalls = []
    tdcgs = []
    skipped = 0
    for session in test.sessions:
        if len(session) < 2:
            skipped += 1
            continue
        context, held_out = session[:-1], int(session[-1])
        recommended = ranked_top_k(scorer(context), k)
        recalls.append(recall_at_k(recommended, held_out, k))
        tdcgs.append(tdcg_at_k(recommended, held_out, k))
    return {
        f"recall_at_{k}": float(np.mean(recalls)) if recalls else 0.0,
        f"tdcg_at_{k}": float(np.mean(tdcgs)) if tdcgs else 0.0,
        "events": len(recalls),
        "skipped": skipped,
    }
