from sparobust.manipulator.affine import (
    attr_matrix,
    warp_affine,
    warp_attributes,
    warp_with_matrix,
)
from sparobust.manipulator.base import IdentityManipulator, apply_manipulator
from sparobust.manipulator.geometric import (
    AttributePredictor,
    GeometricManipulator,
    train_attribute_predictor,
)
from sparobust.manipulator.object_level import (
    ObjectLevelManipulator,
    train_object_manipulator,
)

__all__ = [
    "attr_matrix",
    "warp_affine",
    "warp_attributes",
    "warp_with_matrix",
    "IdentityManipulator",
    "apply_manipulator",
    "AttributePredictor",
    "GeometricManipulator",
    "train_attribute_predictor",
    "ObjectLevelManipulator",
    "train_object_manipulator",
]
