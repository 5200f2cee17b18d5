"""
Learners, fold ensembles and metrics
====================================

Three built-in learners share a ``train``/``predict_proba`` interface. A fold
ensemble trains one model per stratified fold and averages their test-set
probabilities; five metrics summarize the result.
"""

# %%
import numpy as np

from timesplit.evaluation import fit_fold_ensemble
from timesplit.learners import LearnerSpec, predict_proba, train
from timesplit.metrics import compute_metrics, roc_auc

rng = np.random.default_rng(3)
X = rng.normal(size=(300, 5))
logit = 1.5 * X[:, 0] - X[:, 1] + 0.5 * X[:, 0] * X[:, 2]
y = (rng.uniform(size=300) < 1 / (1 + np.exp(-logit))).astype(float)
X_train, y_train, X_test, y_test = X[:200], y[:200], X[200:], y[200:]

# %%
# Elastic net: z-scored features, L1 + L2 penalty, proximal gradient steps.
model = train(LearnerSpec("elastic_net", {"l1_weight": 0.02}), X_train, y_train)
print("coefficients:", np.round(model.params["coef"], 3))

# %%
# All three learners in a 5-fold ensemble.
for kind in ("elastic_net", "naive_bayes", "gbdt"):
    ens = fit_fold_ensemble(LearnerSpec(kind), X_train, y_train, k=5, splitting_seed=1)
    p = ens.predict(X_test)
    m = compute_metrics(p, y_test)
    spread = ens.member_predictions(X_test).std(axis=0).mean()
    print(f"{kind:12s} AUC {m.roc_auc:.3f}  PR-AUC {m.pr_auc:.3f}  F1 {m.f1:.3f}  "
          f"MCC {m.mcc:.3f}  fold spread {spread:.3f}")

# %%
# AUC counts correctly ordered positive/negative pairs, ties count half.
print(roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]))

# %%
# A boosted model with no trees predicts the training base rate.
m0 = train(LearnerSpec("gbdt", {"n_trees": 0}), X_train, y_train)
print(predict_proba(m0, X_test[:3]), y_train.mean())
