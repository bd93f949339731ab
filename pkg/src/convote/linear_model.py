"""Soft-margin linear SVM trained in the dual with SMO.

Minimises ``0.5*|w|^2 + C * sum(max(0, 1 - y_i (w.x_i + b)))`` with an
unregularised bias, like SVM-light. The decision value is the functional
margin ``w.x + b``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import IntegrityError, TrainingError
from .features import FeatureVector, stack


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    regularization_c: float = 1.0
    training_meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def __neg__(self) -> "LinearModel":
        return LinearModel(-self.weights, -self.bias, self.regularization_c, dict(self.training_meta))

    def save(self, path) -> None:
        lines = [f"{self.dim}\t{self.bias!r}\t{self.regularization_c!r}\n"]
        for i in np.flatnonzero(self.weights):
            lines.append(f"{i}\t{float(self.weights[i])!r}\n")
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LinearModel":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        dim, bias, c = lines[0].split("\t")
        weights = np.zeros(int(dim))
        for line in lines[1:]:
            if line:
                i, w = line.split("\t")
                weights[int(i)] = float(w)
        return cls(weights, float(bias), float(c))


def hinge_objective(w: np.ndarray, b: float, X, y: np.ndarray, c: float) -> float:
    margins = y * (X @ w + b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def train_matrix(X, y, c: float = 1.0, seed: int = 0, tol: float = 1e-3,
                 rel_tol: float = 1e-6, max_iter: int | None = None) -> LinearModel:
    """Train on a (sparse or dense) design matrix with labels in {+1, -1}."""
    if c <= 0:
        raise TrainingError(f"C must be positive, got {c}")
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n == 0 or X.shape[0] != n:
        raise TrainingError("no training examples" if n == 0 else "label count does not match rows")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise TrainingError("training data contains a single class")

    order = np.random.default_rng(seed).permutation(n)
    Xp = X[order]
    yp = y[order]
    K = Xp @ Xp.T
    K = K.toarray() if sp.issparse(K) else np.asarray(K)
    Q = K * np.outer(yp, yp)
    if max_iter is None:
        max_iter = max(10_000_000, 100 * n)
    alpha, b, n_iter, trace = _kernels.smo_solve(Q, yp, float(c), float(tol), float(rel_tol), int(max_iter))
    coef = alpha * yp
    w = np.asarray(Xp.T @ coef).ravel()
    meta = {
        "seed": seed,
        "iterations": n_iter,
        "passes": len(trace),
        "dual_objective": trace,
        "primal_objective": hinge_objective(w, b, Xp, yp, c),
        "n_support": int((alpha > 0).sum()),
        "backend": _kernels.BACKEND,
    }
    return LinearModel(w, float(b), float(c), meta)


def train_linear(examples: Sequence[tuple[FeatureVector, int]], c: float = 1.0, seed: int = 0,
                 **kwargs) -> LinearModel:
    if not examples:
        raise TrainingError("no training examples")
    dims = {v.dim for v, _ in examples}
    if len(dims) != 1:
        raise IntegrityError(f"feature vectors of mixed dimensions {sorted(dims)}")
    X = stack([v for v, _ in examples])
    y = np.array([lab for _, lab in examples], dtype=np.float64)
    return train_matrix(X, y, c=c, seed=seed, **kwargs)


def decision_value(model: LinearModel, v: FeatureVector) -> float:
    if v.dim != model.dim:
        raise IntegrityError(f"vector dimension {v.dim} != model dimension {model.dim}")
    if not v.indices:
        return model.bias
    return float(model.weights[list(v.indices)].sum() * v.value + model.bias)


def decision_values(model: LinearModel, X) -> np.ndarray:
    if X.shape[1] != model.dim:
        raise IntegrityError(f"matrix width {X.shape[1]} != model dimension {model.dim}")
    return np.asarray(X @ model.weights).ravel() + model.bias


def predict(model: LinearModel, v: FeatureVector) -> int:
    """Sign of the decision value; exactly 0 counts as +1."""
    return 1 if decision_value(model, v) >= 0 else -1
