"""Core data types: attribute declarations, examples, splits, dataset handles."""

from dataclasses import dataclass, field

import torch

GEOMETRIC_KINDS = ("geometric-rotation", "geometric-scale", "geometric-shift")
OBJECT_KIND = "object-level"
VALID_KINDS = GEOMETRIC_KINDS + (OBJECT_KIND,)


@dataclass(frozen=True)
class AttributeSpec:
    """Declaration of one manipulable attribute.

    `range` is in natural units (degrees for rotation, a multiplicative
    factor for scale, pixels for shift, annotation units for object-level
    attributes). Values are kept in natural units everywhere outside the
    manipulator's internal grid math.
    """

    name: str
    kind: str
    range: tuple = None

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        if self.range is None:
            object.__setattr__(self, "range", _default_range(self.kind))
        lo, hi = self.range
        if not lo < hi:
            raise ValueError(f"attribute {self.name!r}: range must satisfy lo < hi")

    @property
    def lo(self):
        return float(self.range[0])

    @property
    def hi(self):
        return float(self.range[1])

    @property
    def is_geometric(self):
        return self.kind in GEOMETRIC_KINDS

    @property
    def canonical(self):
        """Attribute value of the untransformed image."""
        if self.kind == "geometric-scale":
            return 1.0
        if self.is_geometric:
            return 0.0
        # object-level attributes have no identity value; use range midpoint
        return 0.5 * (self.lo + self.hi)


def _default_range(kind):
    return {
        "geometric-rotation": (-45.0, 45.0),
        "geometric-scale": (0.7, 1.3),
        "geometric-shift": (-4.0, 4.0),
        "object-level": (-1.0, 1.0),
    }[kind]


def rotation_spec(lo=-45.0, hi=45.0, name="rotation"):
    return AttributeSpec(name, "geometric-rotation", (lo, hi))


def scale_spec(lo=0.7, hi=1.3, name="scale"):
    return AttributeSpec(name, "geometric-scale", (lo, hi))


def shift_spec(lo=-4.0, hi=4.0, name="shift"):
    return AttributeSpec(name, "geometric-shift", (lo, hi))


@dataclass(frozen=True)
class Example:
    """One labeled image with its annotated attribute vector."""

    image: torch.Tensor
    label: int
    attributes: torch.Tensor


@dataclass
class SplitData:
    """One split stored as stacked tensors.

    images: float32 [N, C, H, W] in [0, 1]; labels: int64 [N];
    attributes: float32 [N, A] aligned with the handle's spec list.
    """

    images: torch.Tensor
    labels: torch.Tensor
    attributes: torch.Tensor

    def __len__(self):
        return self.images.shape[0]

    def __getitem__(self, i) -> Example:
        return Example(self.images[i], int(self.labels[i]), self.attributes[i])

    def subset(self, idx):
        idx = torch.as_tensor(idx, dtype=torch.long)
        return SplitData(self.images[idx], self.labels[idx], self.attributes[idx])


@dataclass
class DatasetHandle:
    """Immutable view of a loaded dataset; safe to share across workers."""

    name: str
    splits: dict = field(default_factory=dict)
    num_classes: int = 0
    attribute_specs: list = field(default_factory=list)
    seed: int = 0

    @property
    def train(self) -> SplitData:
        return self.splits["train"]

    @property
    def val(self) -> SplitData:
        return self.splits["val"]

    @property
    def test(self) -> SplitData:
        return self.splits["test"]

    @property
    def image_shape(self):
        return tuple(self.train.images.shape[1:])

    def validate(self):
        """Check the Example invariants on every split; raises on violation."""
        nspec = len(self.attribute_specs)
        for split_name, split in self.splits.items():
            im, lab, at = split.images, split.labels, split.attributes
            if im.min() < 0 or im.max() > 1:
                raise ValueError(f"{split_name}: pixel values outside [0, 1]")
            if lab.numel() and (lab.min() < 0 or lab.max() >= self.num_classes):
                raise ValueError(f"{split_name}: label outside [0, {self.num_classes})")
            if at.shape[1] != nspec:
                raise ValueError(f"{split_name}: attribute width {at.shape[1]} != {nspec}")
            for j, spec in enumerate(self.attribute_specs):
                col = at[:, j]
                if col.numel() and (col.min() < spec.lo - 1e-6 or col.max() > spec.hi + 1e-6):
                    raise ValueError(f"{split_name}: attribute {spec.name!r} out of range")
        return self
