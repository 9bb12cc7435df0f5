"""Training the latent-variable session model for next-item ranking.

Simulates session data with two planted item clusters, fits the encoder
model by SGD on the analytic evidence bound (full partition function and
negative-sampled variants), and compares next-item recall against the
popularity and item-kNN baselines.

Run: python3 demos/demo_session_model.py
"""

import numpy as np

from analytic_vb import (
    LvmConfig,
    SimSessionSpec,
    evaluate,
    itemknn_baseline,
    pop_baseline,
    score_items,
    sim_sessions,
)
from analytic_vb import sessions as lvm


def main():
    p, k_true = 30, 2
    psi = np.zeros((p, k_true))
    psi[: p // 2, 0] = 2.5  # two well-separated item clusters
    psi[p // 2 :, 1] = 2.5
    train, test, _ = sim_sessions(
        SimSessionSpec(u_train=150, u_test=80, p=p, k_true=k_true, mean_length=8.0, seed=1),
        psi_true=psi,
    )
    print(f"simulated {train.n_sessions} train / {test.n_sessions} test sessions, catalog {p}\n")

    results = {}
    results["popularity"] = evaluate(pop_baseline(train), test, k=5)
    results["item-kNN"] = evaluate(itemknn_baseline(train), test, k=5)

    for label, negatives in (("full partition", 0), ("10 sampled negatives", 10)):
        config = LvmConfig(latent_dim=4, negatives=negatives, learning_rate=0.2, epochs=25, seed=3)
        params, trace = lvm.fit(train, config)
        print(f"{label}: bound {trace[0]['bound']:.1f} -> {trace[-1]['bound']:.1f} "
              f"over {len(trace)} epochs")
        results[label] = evaluate(lambda c: score_items(c, params), test, k=5)

    print(f"\n{'scorer':>22} {'recall@5':>9} {'tdcg@5':>8}")
    for name, rep in results.items():
        print(f"{name:>22} {rep['recall_at_5']:9.3f} {rep['tdcg_at_5']:8.3f}")
    print("\nThe trained model recovers the cluster structure and beats both")
    print("baselines; subsampling the partition function costs a little recall")
    print("but trains on a fraction of the catalog per step.")


if __name__ == "__main__":
    main()
