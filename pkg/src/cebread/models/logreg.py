"""Multinomial logistic regression trained from zero weights.

The objective is mean cross-entropy plus a penalty scaled by 1/(C * n) so C
behaves like the usual inverse regularization strength. Both penalties are
applied after the gradient step on the cross-entropy part: l1 by
soft-thresholding, l2 by exact shrinkage (divide by 1 + step * lam). Doing
the penalty in closed form instead of through the gradient keeps the step
size usable even when the penalty dwarfs the data term, so the unpenalized
bias can still fit the class priors. Step size starts at 1.0 and halves
whenever a step would increase the objective, which keeps the recorded
loss history monotonically non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelError

_MIN_STEP = 1e-14
_STEP_GROWTH = 1.2


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _soft_threshold(w: np.ndarray, amount: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - amount, 0.0)


@dataclass
class LogisticModel:
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    loss_history: list[float] = field(default_factory=list, repr=False)
    converged: bool = False

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.atleast_2d(X) @ self.weights.T + self.bias

    def predict_class_index(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision(X), axis=1)  # first max: lowest class


def _objective(X, onehot, weights, bias, penalty, lam):
    logp = _log_softmax(X @ weights.T + bias)
    ce = -float((onehot * logp).sum()) / X.shape[0]
    if penalty == "l2":
        return ce + 0.5 * lam * float(np.square(weights).sum())
    return ce + lam * float(np.abs(weights).sum())


def fit_logreg(X, y_idx, n_classes, penalty, C, max_iter, tol=1e-8) -> LogisticModel:
    """Minimize penalized softmax cross-entropy; returns the fitted model."""
    if penalty not in ("l1", "l2"):
        raise ModelError(f"penalty must be l1 or l2, got {penalty!r}")
    if C <= 0:
        raise ModelError(f"C must be positive, got {C}")
    X = np.asarray(X, dtype=float)
    y_idx = np.asarray(y_idx, dtype=int)
    n, d = X.shape
    lam = 1.0 / (C * n)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0

    weights = np.zeros((n_classes, d))
    bias = np.zeros(n_classes)
    loss = _objective(X, onehot, weights, bias, penalty, lam)
    history = [loss]
    step = 1.0
    converged = False

    for _ in range(max_iter):
        probs = np.exp(_log_softmax(X @ weights.T + bias))
        resid = probs - onehot
        grad_w = resid.T @ X / n
        grad_b = resid.mean(axis=0)

        while True:
            stepped = weights - step * grad_w
            if penalty == "l1":
                cand_w = _soft_threshold(stepped, step * lam)
            else:
                cand_w = stepped / (1.0 + step * lam)
            cand_b = bias - step * grad_b
            cand_loss = _objective(X, onehot, cand_w, cand_b, penalty, lam)
            if cand_loss <= loss or step <= _MIN_STEP:
                break
            step /= 2.0

        if cand_loss > loss:
            # Even the smallest step would go uphill: we are at a minimum
            # up to float precision.
            converged = True
            break
        improved = loss - cand_loss
        weights, bias, loss = cand_w, cand_b, cand_loss
        history.append(loss)
        if improved < tol * max(1.0, abs(loss)):
            converged = True
            break
        step = min(step * _STEP_GROWTH, 1e3)

    return LogisticModel(weights=weights, bias=bias, loss_history=history, converged=converged)
