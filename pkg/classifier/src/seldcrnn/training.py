"""Training loop: Adam, mixup augmentation, LR halving on plateau, early stop.

Batch size 100, initial learning rate 1e-3 halved when validation accuracy
plateaus for 5 epochs, early stopping with patience 15 on validation
accuracy, categorical cross-entropy on (possibly soft) mixup targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .model import CrnnClassifier


def one_hot(labels, n_classes):
    out = np.zeros((len(labels), n_classes), dtype=np.float32)
    out[np.arange(len(labels)), labels] = 1.0
    return out


def mixup_batch(patches, labels, alpha, rng=None, lam=None, perm=None):
    """Convex combinations of a batch with its shuffled self.

    ``labels`` must already be one-hot (or soft); ``lam``/``perm`` override
    the Beta(alpha, alpha) draw and pairing for deterministic use.
    """
    if alpha <= 0:
        raise ValueError("mixup alpha must be positive")
    rng = rng or np.random.default_rng()
    x = np.asarray(patches, dtype=np.float32)
    y = np.asarray(labels, dtype=np.float32)
    if lam is None:
        lam = float(rng.beta(alpha, alpha))
    if perm is None:
        perm = rng.permutation(len(x))
    x_mix = lam * x + (1.0 - lam) * x[perm]
    y_mix = lam * y + (1.0 - lam) * y[perm]
    return x_mix, y_mix


def soft_cross_entropy(logits, targets):
    return -(targets * torch.log_softmax(logits, dim=1)).sum(dim=1).mean()


@dataclass
class TrainConfig:
    epochs: int = 120
    batch_size: int = 100
    learning_rate: float = 1e-3
    lr_patience: int = 5
    early_stop_patience: int = 15
    mixup_alpha: float = 0.1
    use_mixup: bool = True
    seed: int = 0


@dataclass
class TrainLog:
    epochs: list = field(default_factory=list)  # dicts: loss, train_acc, val_acc, lr
    best_val_acc: float = 0.0


def train(patches, labels, config=None, n_classes=11, val_fraction=0.2,
          model=None, batch_hook=None):
    """Train a CRNN on (n, 50, 64) patches with integer labels.

    Returns (model, TrainLog).  ``batch_hook`` receives every (x, y) batch
    actually fed to the optimizer (used by tests to intercept mixup output).
    """
    config = config or TrainConfig()
    x = np.asarray(patches, dtype=np.float32)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 3 or len(x) != len(y):
        raise ValueError("need matching (n, T, F) patches and n labels")
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate dataset: fewer than 2 classes present")

    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(x))
    n_val = max(1, int(round(val_fraction * len(x)))) if val_fraction > 0 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]
    if train_idx.size == 0:
        train_idx, val_idx = order, order
    x_train, y_train = x[train_idx], y[train_idx]
    x_val = torch.as_tensor(x[val_idx] if n_val else x_train)
    y_val = y[val_idx] if n_val else y_train
    y_train_hot = one_hot(y_train, n_classes)

    model = model or CrnnClassifier(n_classes=n_classes)
    model.set_feature_scaling(x_train.mean(), x_train.std())
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, mode="max", factor=0.5, patience=config.lr_patience)

    log = TrainLog()
    best_state = None
    since_best = 0
    for _epoch in range(config.epochs):
        model.train()
        epoch_order = rng.permutation(len(x_train))
        losses = []
        for lo in range(0, len(epoch_order), config.batch_size):
            idx = epoch_order[lo:lo + config.batch_size]
            xb, yb = x_train[idx], y_train_hot[idx]
            if config.use_mixup and len(idx) > 1:
                xb, yb = mixup_batch(xb, yb, config.mixup_alpha, rng)
            if batch_hook is not None:
                batch_hook(xb, yb)
            xt = torch.as_tensor(xb)
            yt = torch.as_tensor(yb)
            optimizer.zero_grad()
            loss = soft_cross_entropy(model(xt), yt)
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))

        model.eval()
        with torch.no_grad():
            train_pred = model(torch.as_tensor(x_train)).argmax(dim=1).numpy()
            val_pred = model(x_val).argmax(dim=1).numpy()
        train_acc = float((train_pred == y_train).mean())
        val_acc = float((val_pred == y_val).mean())
        scheduler.step(val_acc)
        log.epochs.append({"loss": float(np.mean(losses)),
                           "train_acc": train_acc, "val_acc": val_acc,
                           "lr": optimizer.param_groups[0]["lr"]})
        if val_acc > log.best_val_acc:
            log.best_val_acc = val_acc
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.early_stop_patience:
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    return model, log
