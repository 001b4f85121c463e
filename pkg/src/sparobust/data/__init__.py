from sparobust.data.specs import (
    AttributeSpec,
    DatasetHandle,
    Example,
    SplitData,
    rotation_spec,
    scale_spec,
    shift_spec,
)
from sparobust.data.loader import (
    SUPPORTED_DATASETS,
    DataError,
    iter_batches,
    load_dataset,
    synthesize_attribute_batch,
)

__all__ = [
    "AttributeSpec",
    "DatasetHandle",
    "Example",
    "SplitData",
    "rotation_spec",
    "scale_spec",
    "shift_spec",
    "SUPPORTED_DATASETS",
    "DataError",
    "load_dataset",
    "iter_batches",
    "synthesize_attribute_batch",
]
