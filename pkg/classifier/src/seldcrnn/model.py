"""CRNN event classifier: three conv blocks, one BiGRU, FC, 11-way softmax.

Canonical configuration (~178k weights, within 10% of the 175k target):
conv filters 48/64/64 with 3x3 kernels and frequency max-pooling 4/4/4,
a bidirectional GRU with 96 units, a 96-unit FC layer, and dropout 0.5
throughout; no batch normalization.
"""

from __future__ import annotations

import torch
from torch import nn

N_CLASSES = 11


class CrnnClassifier(nn.Module):
    def __init__(self, n_classes=N_CLASSES, n_mels=64, conv_filters=(48, 64, 64),
                 gru_units=96, fc_units=96, dropout=0.5):
        super().__init__()
        blocks = []
        in_ch = 1
        for out_ch in conv_filters:
            blocks += [
                nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1),
                nn.ReLU(),
                nn.MaxPool2d(kernel_size=(1, 4)),
                nn.Dropout(dropout),
            ]
            in_ch = out_ch
        self.conv = nn.Sequential(*blocks)
        freq_out = n_mels // 4 ** len(conv_filters)
        self.gru = nn.GRU(conv_filters[-1] * freq_out, gru_units,
                          batch_first=True, bidirectional=True)
        self.dropout = nn.Dropout(dropout)
        self.fc = nn.Linear(2 * gru_units, fc_units)
        self.out = nn.Linear(fc_units, n_classes)
        # input standardization fitted at training time, carried in the
        # checkpoint so inference sees the same scaling
        self.register_buffer("feature_mean", torch.zeros(()))
        self.register_buffer("feature_std", torch.ones(()))

    def set_feature_scaling(self, mean, std):
        self.feature_mean.fill_(float(mean))
        self.feature_std.fill_(max(float(std), 1e-6))

    def forward(self, x):
        """x: (batch, 50, 64) log-mel patches -> (batch, n_classes) logits."""
        x = (x - self.feature_mean) / self.feature_std
        if x.dim() == 3:
            x = x.unsqueeze(1)  # channel axis
        h = self.conv(x)                        # (B, C, T, F')
        h = h.permute(0, 2, 1, 3).flatten(2)    # (B, T, C*F')
        h, _ = self.gru(h)
        h = h.mean(dim=1)                       # temporal average
        h = self.dropout(torch.relu(self.fc(self.dropout(h))))
        return self.out(h)

    def predict_proba(self, patches):
        """Per-patch class probabilities for an (n, 50, 64) array/tensor."""
        self.eval()
        with torch.no_grad():
            x = torch.as_tensor(patches, dtype=torch.float32)
            return torch.softmax(self(x), dim=1).numpy()


def parameter_count(model):
    return sum(p.numel() for p in model.parameters())


def save_checkpoint(model, path, class_names=None):
    torch.save({"state_dict": model.state_dict(),
                "n_classes": model.out.out_features,
                "class_names": class_names}, path)


def load_checkpoint(path):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    model = CrnnClassifier(n_classes=blob["n_classes"])
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, blob.get("class_names")
