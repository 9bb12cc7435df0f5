import numpy as np
import pytest

from analytic_vb import (
    SessionDataset,
    evaluate,
    itemknn_baseline,
    pop_baseline,
    ranked_top_k,
    recall_at_k,
    tdcg_at_k,
)


class TestRanking:
    def test_orders_by_score(self):
        assert list(ranked_top_k([0.1, 0.9, 0.5], 3)) == [1, 2, 0]

    def test_ties_broken_by_ascending_id(self):
        assert list(ranked_top_k([0.5, 0.5, 0.5, 1.0], 3)) == [3, 0, 1]

    def test_k_validated(self):
        with pytest.raises(ValueError):
            ranked_top_k([1.0, 2.0], 3)


class TestRecall:
    def test_hit(self):
        assert recall_at_k([4, 2, 7], 2, 3) == 1

    def test_miss(self):
        assert recall_at_k([4, 2, 7], 9, 3) == 0

    def test_truncation(self):
        assert recall_at_k([4, 2, 7], 7, 2) == 0

    def test_k_validated(self):
        with pytest.raises(ValueError):
            recall_at_k([4, 2], 4, 5)


class TestTdcg:
    def test_rank_one(self):
        assert tdcg_at_k([5, 1, 3], 5, 3) == pytest.approx(1.0)

    def test_rank_two(self):
        assert tdcg_at_k([5, 1, 3], 1, 3) == pytest.approx(1.0 / np.log2(3.0))

    def test_rank_three(self):
        assert tdcg_at_k([5, 1, 3], 3, 3) == pytest.approx(0.5)

    def test_miss_is_zero(self):
        assert tdcg_at_k([5, 1, 3], 9, 3) == 0.0

    def test_truncation(self):
        assert tdcg_at_k([5, 1, 3], 3, 2) == 0.0


class TestPopBaseline:
    def test_counts_recounted_by_hand(self):
        train = SessionDataset([[0, 1, 1], [1, 2], [1]], 4)
        scorer = pop_baseline(train)
        assert np.array_equal(scorer([0]), [1.0, 4.0, 1.0, 0.0])

    def test_context_independent(self):
        train = SessionDataset([[0, 1], [2, 0]], 3)
        scorer = pop_baseline(train)
        assert np.array_equal(scorer([1]), scorer([2, 0]))

    def test_tie_break_ranking(self):
        train = SessionDataset([[2, 1], [1, 2], [3]], 5)
        # items 1 and 2 tie at count 2; lower id wins
        assert list(ranked_top_k(pop_baseline(train)([0]), 3)) == [1, 2, 3]


class TestItemKnnBaseline:
    def test_two_by_two_contingency(self):
        # items 0 and 1 always co-occur; items 0 and 2 never do
        train = SessionDataset([[0, 1], [0, 1], [2], [2]], 3)
        scorer = itemknn_baseline(train)
        scores = scorer([0])
        assert scores[1] == pytest.approx(1.0)
        assert scores[2] == pytest.approx(-1.0)
        assert scores[0] == -np.inf  # query item excluded

    def test_matches_independent_correlation(self):
        rng = np.random.default_rng(0)
        sessions = [list(rng.choice(6, size=rng.integers(1, 5), replace=False)) for _ in range(30)]
        train = SessionDataset(sessions, 6)
        indicator = np.zeros((30, 6))
        for i, s in enumerate(sessions):
            indicator[i, s] = 1.0
        scorer = itemknn_baseline(train)
        q = 3
        scores = scorer([q])
        for j in range(6):
            if j == q:
                continue
            want = np.corrcoef(indicator[:, j], indicator[:, q])[0, 1]
            assert scores[j] == pytest.approx(want, abs=1e-12)

    def test_constant_item_gets_zero(self):
        # item 0 occurs in every session: zero variance, correlation undefined
        train = SessionDataset([[0, 1], [0, 2], [0, 1]], 3)
        scores = itemknn_baseline(train)([1])
        assert scores[0] == 0.0

    def test_uses_last_item_of_context(self):
        train = SessionDataset([[0, 1], [0, 1], [2, 3], [2, 3]], 4)
        scorer = itemknn_baseline(train)
        assert np.argmax(scorer([0, 2])) == 3
        assert np.argmax(scorer([2, 0])) == 1


class TestEvaluate:
    def test_perfect_scorer(self):
        test = SessionDataset([[0, 1, 2], [3, 4]], 5)

        def oracle(context):
            scores = np.zeros(5)
            scores[{(0, 1): 2, (3,): 4}[tuple(context)]] = 1.0
            return scores

        out = evaluate(oracle, test, k=1)
        assert out["recall_at_1"] == 1.0
        assert out["tdcg_at_1"] == 1.0
        assert out["events"] == 2 and out["skipped"] == 0

    def test_adversarial_scorer(self):
        test = SessionDataset([[0, 1], [2, 3]], 5)

        def worst(context):
            scores = np.ones(5)
            scores[int(context[-1]) + 1] = -1.0  # bury the held-out item
            return scores

        out = evaluate(worst, test, k=4)
        assert out["recall_at_4"] == 0.0
        assert out["tdcg_at_4"] == 0.0

    def test_singleton_sessions_skipped(self):
        test = SessionDataset([[0], [1, 2]], 3)
        out = evaluate(lambda c: np.array([0.0, 0.0, 1.0]), test, k=1)
        assert out["skipped"] == 1 and out["events"] == 1
        assert out["recall_at_1"] == 1.0

    def test_rank_preserving_transform_invariance(self):
        rng = np.random.default_rng(1)
        sessions = [list(rng.integers(0, 8, size=4)) for _ in range(20)]
        test = SessionDataset(sessions, 8)
        base = lambda c: np.sin(np.arange(8) + len(c))
        warped = lambda c: 3.0 * np.exp(base(c)) + 7.0
        assert evaluate(base, test, k=3) == evaluate(warped, test, k=3)

    def test_hand_averaged_mixture(self):
        # one hit at rank 2 (k=2), one miss: recall 0.5, tdcg (1/log2(3))/2
        test = SessionDataset([[0, 1], [0, 2]], 4)

        def scorer(context):
            return np.array([0.0, 0.5, 0.0, 1.0])

        out = evaluate(scorer, test, k=2)
        assert out["recall_at_2"] == pytest.approx(0.5)
        assert out["tdcg_at_2"] == pytest.approx(0.5 / np.log2(3.0))
