import numpy as np
import pytest
import torch

from seldcrnn import CrnnClassifier


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_model():
    torch.manual_seed(123)  # order-independent weights
    return CrnnClassifier(n_classes=3, conv_filters=(2, 2, 2), gru_units=3,
                          fc_units=4, dropout=0.0)


def toy_patch_set(rng, n_per_class=4, n_classes=3):
    """Synthetic, trivially separable patches: class = band of active mels."""
    patches, labels = [], []
    for cls in range(n_classes):
        for _ in range(n_per_class):
            p = rng.normal(-23.0, 0.1, (50, 64)).astype(np.float32)
            band = slice(cls * 20, cls * 20 + 12)
            p[:, band] += 18.0 + rng.normal(0, 0.5)
            patches.append(p)
            labels.append(cls)
    return np.stack(patches), np.array(labels)
