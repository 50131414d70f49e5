"""Support vector machines, one binary classifier per class (one-vs-rest).

Linear kernel: deterministic full-batch subgradient descent on the primal
hinge objective with lambda = 1/(C * n), Pegasos-style 1/(lambda * t) steps
and a norm projection. The iterate with the lowest objective seen so far is
kept, and the tail-averaged iterate is swapped in if it scores lower still.

RBF kernel: SMO on the dual. The first index of a KKT violation is paired
with the index maximizing |E_i - E_j|, so runs are deterministic. Hitting
the iteration cap before a clean pass sets converged=False and keeps the
current state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelError

_KKT_TOL = 1e-3
_ALPHA_MIN_STEP = 1e-12
_SUPPORT_EPS = 1e-10


@dataclass
class LinearBinarySvm:
    w: np.ndarray
    b: float
    converged: bool = True

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.atleast_2d(X) @ self.w + self.b


@dataclass
class RbfBinarySvm:
    support_x: np.ndarray  # (n_sv, d)
    alpha_y: np.ndarray  # (n_sv,) alpha_i * y_i
    b: float
    gamma: float
    converged: bool = True

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        sq = (
            np.square(X).sum(axis=1)[:, None]
            + np.square(self.support_x).sum(axis=1)[None, :]
            - 2.0 * X @ self.support_x.T
        )
        k = np.exp(-self.gamma * np.maximum(sq, 0.0))
        return k @ self.alpha_y + self.b


@dataclass
class OvrSvm:
    """One binary machine per class, argmax of decision values."""

    machines: list
    converged: bool = True

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.column_stack([m.decision(X) for m in self.machines])

    def predict_class_index(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision(X), axis=1)  # first max: lowest class


def _hinge_objective(X, y, w, b, lam) -> float:
    margins = y * (X @ w + b)
    return 0.5 * lam * float(w @ w) + float(np.maximum(0.0, 1.0 - margins).mean())


def _fit_linear_binary(X, y, C, max_iter) -> LinearBinarySvm:
    n, d = X.shape
    lam = 1.0 / (C * n)
    w = np.zeros(d)
    b = 0.0
    best_obj = _hinge_objective(X, y, w, b, lam)
    best_w, best_b = w.copy(), b
    radius = 1.0 / np.sqrt(lam)
    tail_start = max_iter // 2
    avg_w = np.zeros(d)
    avg_b = 0.0
    tail_n = 0

    for t in range(1, max_iter + 1):
        margins = y * (X @ w + b)
        active = margins < 1.0
        ya = np.where(active, y, 0.0)
        grad_w = lam * w - X.T @ ya / n
        grad_b = -float(ya.mean())
        eta = 1.0 / (lam * t)
        w = w - eta * grad_w
        b = b - eta * grad_b
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w *= radius / norm
        obj = _hinge_objective(X, y, w, b, lam)
        if obj < best_obj:
            best_obj = obj
            best_w, best_b = w.copy(), b
        if t > tail_start:
            avg_w += w
            avg_b += b
            tail_n += 1

    if tail_n:
        avg_w /= tail_n
        avg_b /= tail_n
        if _hinge_objective(X, y, avg_w, avg_b, lam) < best_obj:
            best_w, best_b = avg_w, avg_b
    return LinearBinarySvm(w=best_w, b=float(best_b))


def _fit_rbf_binary(X, y, C, gamma, max_iter) -> RbfBinarySvm:
    n = X.shape[0]
    sq = np.square(X).sum(axis=1)
    K = np.exp(-gamma * np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0))
    alpha = np.zeros(n)
    b = 0.0
    # E_i = f(x_i) - y_i, kept incrementally up to date.
    errors = -y.astype(float)
    steps = 0
    converged = False

    while steps < max_iter:
        changed = 0
        for i in range(n):
            Ei = errors[i]
            r = Ei * y[i]
            violates = (r < -_KKT_TOL and alpha[i] < C) or (r > _KKT_TOL and alpha[i] > 0)
            if not violates:
                continue
            j = int(np.argmax(np.abs(Ei - errors)))
            if j == i:
                continue
            Ej = errors[j]
            eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if eta <= 0:
                continue
            if y[i] == y[j]:
                low = max(0.0, alpha[i] + alpha[j] - C)
                high = min(C, alpha[i] + alpha[j])
            else:
                low = max(0.0, alpha[j] - alpha[i])
                high = min(C, C + alpha[j] - alpha[i])
            if high - low < _ALPHA_MIN_STEP:
                continue
            aj_new = np.clip(alpha[j] + y[j] * (Ei - Ej) / eta, low, high)
            delta_j = aj_new - alpha[j]
            if abs(delta_j) < _ALPHA_MIN_STEP:
                continue
            ai_new = alpha[i] - y[i] * y[j] * delta_j
            delta_i = ai_new - alpha[i]

            b1 = b - Ei - y[i] * delta_i * K[i, i] - y[j] * delta_j * K[i, j]
            b2 = b - Ej - y[i] * delta_i * K[i, j] - y[j] * delta_j * K[j, j]
            if 0.0 < ai_new < C:
                b_new = b1
            elif 0.0 < aj_new < C:
                b_new = b2
            else:
                b_new = (b1 + b2) / 2.0
            errors += y[i] * delta_i * K[:, i] + y[j] * delta_j * K[:, j] + (b_new - b)
            alpha[i] = ai_new
            alpha[j] = aj_new
            b = b_new
            changed += 1
            steps += 1
            if steps >= max_iter:
                break
        if changed == 0:
            converged = True
            break

    keep = alpha > _SUPPORT_EPS
    if not keep.any():
        keep = np.ones(n, dtype=bool)
    return RbfBinarySvm(
        support_x=X[keep].copy(),
        alpha_y=(alpha * y)[keep],
        b=float(b),
        gamma=float(gamma),
        converged=converged,
    )


def resolve_gamma(gamma, X: np.ndarray) -> float:
    """Turn the "scale" shorthand into 1 / (n_features * Var(X))."""
    if gamma == "scale":
        var = float(np.asarray(X, dtype=float).var())
        if var <= 0:
            var = 1.0
        return 1.0 / (X.shape[1] * var)
    value = float(gamma)
    if value <= 0:
        raise ModelError(f"gamma must be positive, got {gamma!r}")
    return value


def fit_svm(X, y_idx, n_classes, kernel, C, gamma, max_iter) -> OvrSvm:
    """Fit one binary machine per class index against the rest."""
    if kernel not in ("linear", "rbf"):
        raise ModelError(f"kernel must be linear or rbf, got {kernel!r}")
    if C <= 0:
        raise ModelError(f"C must be positive, got {C}")
    X = np.asarray(X, dtype=float)
    y_idx = np.asarray(y_idx, dtype=int)
    machines = []
    gamma_value = resolve_gamma(gamma, X) if kernel == "rbf" else None
    for k in range(n_classes):
        y_bin = np.where(y_idx == k, 1.0, -1.0)
        if kernel == "linear":
            machines.append(_fit_linear_binary(X, y_bin, C, max_iter))
        else:
            machines.append(_fit_rbf_binary(X, y_bin, C, gamma_value, max_iter))
    return OvrSvm(machines=machines, converged=all(m.converged for m in machines))
