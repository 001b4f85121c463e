"""Target classifier architectures.

All classifiers output a probability vector per image (softmax applied in
`forward`); raw scores are available through `logits`. Group normalization
keeps training deterministic and batch-size independent, which matters for
adversarial loops that mix batch shapes.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F


class ProbClassifier(nn.Module):
    """Base: `forward` returns probabilities, `logits` the pre-softmax scores."""

    def __init__(self, in_channels, num_classes, profile):
        super().__init__()
        self.in_channels = in_channels
        self.num_classes = num_classes
        self.profile = profile

    def logits(self, x):
        raise NotImplementedError

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ValueError(
                f"expected [N, {self.in_channels}, H, W] input, got {tuple(x.shape)}"
            )
        return F.softmax(self.logits(x), dim=1)


def _gn(channels):
    groups = 8 if channels % 8 == 0 else 4 if channels % 4 == 0 else 1
    return nn.GroupNorm(groups, channels)


class SmallCNN(ProbClassifier):
    """4-layer CNN profile for fast desk-scale runs."""

    def __init__(self, in_channels=1, num_classes=10, width=8):
        super().__init__(in_channels, num_classes, "cnn-small")
        self.c1 = nn.Conv2d(in_channels, width, 3, padding=1)
        self.g1 = _gn(width)
        self.c2 = nn.Conv2d(width, width * 2, 3, stride=2, padding=1)
        self.g2 = _gn(width * 2)
        self.c3 = nn.Conv2d(width * 2, width * 4, 3, stride=2, padding=1)
        self.g3 = _gn(width * 4)
        self.pool = nn.AdaptiveAvgPool2d(7)  # fixed head size for any input
        self.head = nn.Linear(width * 4 * 49, num_classes)

    def logits(self, x):
        h = F.relu(self.g1(self.c1(x)))
        h = F.relu(self.g2(self.c2(h)))
        h = F.relu(self.g3(self.c3(h)))
        return self.head(self.pool(h).flatten(1))


class _ResBlock(nn.Module):
    def __init__(self, cin, cout, stride=1):
        super().__init__()
        self.c1 = nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False)
        self.n1 = _gn(cout)
        self.c2 = nn.Conv2d(cout, cout, 3, padding=1, bias=False)
        self.n2 = _gn(cout)
        self.short = (
            nn.Conv2d(cin, cout, 1, stride=stride, bias=False)
            if stride != 1 or cin != cout
            else None
        )

    def forward(self, x):
        h = F.relu(self.n1(self.c1(x)))
        h = self.n2(self.c2(h))
        s = x if self.short is None else self.short(x)
        return F.relu(h + s)


class ResNetSmall(ProbClassifier):
    """Reduced residual network: 3 stages of width 16/32/64, 3 blocks each."""

    def __init__(self, in_channels=1, num_classes=10, blocks_per_stage=3):
        super().__init__(in_channels, num_classes, "resnet-small")
        self.stem = nn.Conv2d(in_channels, 16, 3, padding=1, bias=False)
        stages = []
        cin = 16
        for width, stride in ((16, 1), (32, 2), (64, 2)):
            for j in range(blocks_per_stage):
                stages.append(_ResBlock(cin, width, stride if j == 0 else 1))
                cin = width
        self.stages = nn.Sequential(*stages)
        self.head = nn.Linear(64, num_classes)

    def logits(self, x):
        h = self.stages(F.relu(self.stem(x)))
        return self.head(h.mean(dim=(2, 3)))


PROFILES = {
    "cnn-small": SmallCNN,
    "resnet-small": ResNetSmall,
}


def build_classifier(profile, in_channels, num_classes):
    if profile not in PROFILES:
        raise ValueError(f"unknown classifier profile {profile!r}")
    return PROFILES[profile](in_channels=in_channels, num_classes=num_classes)
