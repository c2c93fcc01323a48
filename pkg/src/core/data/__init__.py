from .datasets import (
    ImageBatch,
    SampleSet,
    batches,
    dataset_files,
    denormalize_bytes,
    load_raw,
    load_samples,
    normalize,
    prepare,
    to_unit_range,
)
from .idx import load_idx, read_idx, write_idx

__all__ = [
    "ImageBatch",
    "SampleSet",
    "batches",
    "dataset_files",
    "denormalize_bytes",
    "load_raw",
    "load_samples",
    "normalize",
    "prepare",
    "to_unit_range",
    "load_idx",
    "read_idx",
    "write_idx",
]
