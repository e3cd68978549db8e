"""Feed-forward softmax classifier trained with mini-batch Adam.

The reference topology is input -> 128 -> 64 -> 32 -> 3 with ReLU hidden
activations.  Initialization, the validation split, and per-epoch shuffling
all come from one seeded generator, so two fits with the same seed produce
bit-comparable loss trajectories.  `nn_loss_and_grads` exposes the
backpropagation gradient for finite-difference checks.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import CLASSES, check_fitted, check_labels, check_matrix

N_CLASSES = len(CLASSES)

Params = list[np.ndarray]  # [W1, b1, W2, b2, ...]


def parameter_count(input_dim: int, hidden=(128, 64, 32), n_classes: int = N_CLASSES) -> int:
    total = 0
    fan_in = input_dim
    for width in tuple(hidden) + (n_classes,):
        total += fan_in * width + width
        fan_in = width
    return total


def init_params(input_dim: int, hidden, n_classes: int, rng: np.random.Generator) -> Params:
    """He-normal weights for the ReLU layers, Xavier for the output layer."""
    params: Params = []
    sizes = [input_dim, *hidden, n_classes]
    for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        scale = np.sqrt(2.0 / fan_in) if i < len(sizes) - 2 else np.sqrt(1.0 / fan_in)
        params.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def _forward(params: Params, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Returns output logits and the post-activation value of every layer."""
    activations = [X]
    a = X
    n_layers = len(params) // 2
    for layer in range(n_layers):
        w, b = params[2 * layer], params[2 * layer + 1]
        z = a @ w + b
        a = z if layer == n_layers - 1 else np.maximum(z, 0.0)
        activations.append(a)
    return a, activations


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def nn_loss_and_grads(params: Params, X: np.ndarray, y_index: np.ndarray) -> tuple[float, Params]:
    """Mean cross-entropy of the softmax output and gradients via
    backpropagation, ordered like `params`."""
    n = X.shape[0]
    logits, activations = _forward(params, X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(n), y_index].mean())

    grads: Params = [np.empty(0)] * len(params)
    delta = np.exp(log_probs)
    delta[np.arange(n), y_index] -= 1.0
    delta /= n
    n_layers = len(params) // 2
    for layer in range(n_layers - 1, -1, -1):
        a_prev = activations[layer]
        grads[2 * layer] = a_prev.T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params[2 * layer].T) * (activations[layer] > 0)
    return loss, grads


def flatten_params(params: Params) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def unflatten_params(flat: np.ndarray, like: Params) -> Params:
    out: Params = []
    offset = 0
    for p in like:
        out.append(flat[offset : offset + p.size].reshape(p.shape))
        offset += p.size
    return out


class FeedForwardClassifier(BaseEstimator, ClassifierMixin):
    """Mini-batch Adam training with early stopping on a held-out slice.

    When `val_fraction` > 0 and the data is large enough, the seeded
    generator carves off that fraction for validation; training stops after
    `patience` epochs without improvement and the best parameters are
    restored.  A non-finite loss aborts training and restores the last good
    checkpoint.
    """

    def __init__(self, hidden=(128, 64, 32), learning_rate: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, adam_eps: float = 1e-8,
                 epochs: int = 200, batch_size: int = 32,
                 val_fraction: float = 0.1, patience: int = 20, seed: int = 0):
        self.hidden = tuple(hidden)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.epochs = epochs
        self.batch_size = batch_size
        self.val_fraction = val_fraction
        self.patience = patience
        self.seed = seed

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        if len(np.unique(y)) < 2:
            raise ValueError("need at least two distinct classes in y")
        rng = np.random.default_rng(self.seed)
        y_index = np.searchsorted(np.array(CLASSES), y)
        n = X.shape[0]

        n_val = int(round(self.val_fraction * n)) if self.val_fraction > 0 else 0
        if n_val >= 1 and n - n_val >= 2:
            order = rng.permutation(n)
            val_idx, train_idx = order[:n_val], order[n_val:]
        else:
            order = rng.permutation(n)  # keep the generator stream aligned
            val_idx, train_idx = np.empty(0, dtype=int), np.arange(n)
        X_train, y_train = X[train_idx], y_index[train_idx]
        X_val, y_val = X[val_idx], y_index[val_idx]

        params = init_params(X.shape[1], self.hidden, N_CLASSES, rng)
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        step = 0

        best_params = [p.copy() for p in params]
        best_val = np.inf
        best_epoch = 0
        epochs_since_best = 0
        self.epoch_losses_ = []
        self.val_losses_ = []
        self.aborted_ = False

        n_train = len(train_idx)
        for epoch in range(self.epochs):
            perm = rng.permutation(n_train)
            batch_losses = []
            abort = False
            for start in range(0, n_train, self.batch_size):
                batch = perm[start : start + self.batch_size]
                loss, grads = nn_loss_and_grads(params, X_train[batch], y_train[batch])
                if not np.isfinite(loss):
                    abort = True
                    break
                batch_losses.append(loss)
                step += 1
                bc1 = 1.0 - self.beta1**step
                bc2 = 1.0 - self.beta2**step
                for p, g, mi, vi in zip(params, grads, m, v):
                    mi *= self.beta1
                    mi += (1.0 - self.beta1) * g
                    vi *= self.beta2
                    vi += (1.0 - self.beta2) * g * g
                    p -= self.learning_rate * (mi / bc1) / (np.sqrt(vi / bc2) + self.adam_eps)
            if abort:
                self.aborted_ = True
                warnings.warn(
                    f"non-finite training loss at epoch {epoch}; "
                    "restoring last good checkpoint",
                    RuntimeWarning,
                    stacklevel=2,
                )
                params = best_params
                break
            self.epoch_losses_.append(float(np.mean(batch_losses)))

            if len(val_idx) > 0:
                val_loss, _ = nn_loss_and_grads(params, X_val, y_val)
                self.val_losses_.append(val_loss)
                if val_loss < best_val:
                    best_val = val_loss
                    best_epoch = epoch
                    best_params = [p.copy() for p in params]
                    epochs_since_best = 0
                else:
                    epochs_since_best += 1
                    if epochs_since_best >= self.patience:
                        break
            else:
                best_params = [p.copy() for p in params]
                best_epoch = epoch

        self.params_ = best_params
        self.best_epoch_ = best_epoch
        self.n_epochs_run_ = len(self.epoch_losses_)
        self.classes_ = np.array(CLASSES)
        self.input_dim_ = X.shape[1]
        return self

    def parameter_count_(self) -> int:
        check_fitted(self, "params_")
        return int(sum(p.size for p in self.params_))

    def decision_function(self, X) -> np.ndarray:
        check_fitted(self, "params_")
        X = check_matrix(X)
        if X.shape[1] != self.input_dim_:
            raise ValueError(f"X has {X.shape[1]} columns, model expects {self.input_dim_}")
        logits, _ = _forward(self.params_, X)
        return logits

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


class AugmentedHeadClassifier(FeedForwardClassifier):
    """Head over frozen user embeddings concatenated with behavior features.

    The input must be exactly embedding_dim + behavior_dim wide (default
    512 + 134 = 646); the provenance tag of the embedding table rides along
    for audit.
    """

    def __init__(self, embedding_dim: int = 512, behavior_dim: int = 134,
                 provenance: str = "", hidden=(128, 64, 32),
                 learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, adam_eps: float = 1e-8, epochs: int = 200,
                 batch_size: int = 32, val_fraction: float = 0.1,
                 patience: int = 20, seed: int = 0):
        super().__init__(hidden=hidden, learning_rate=learning_rate, beta1=beta1,
                         beta2=beta2, adam_eps=adam_eps, epochs=epochs,
                         batch_size=batch_size, val_fraction=val_fraction,
                         patience=patience, seed=seed)
        self.embedding_dim = embedding_dim
        self.behavior_dim = behavior_dim
        self.provenance = provenance

    def fit(self, X, y):
        X = check_matrix(X)
        expected = self.embedding_dim + self.behavior_dim
        if X.shape[1] != expected:
            raise ValueError(
                f"augmented head expects {expected} columns "
                f"({self.embedding_dim} embedding + {self.behavior_dim} behavior), "
                f"got {X.shape[1]}"
            )
        return super().fit(X, y)
