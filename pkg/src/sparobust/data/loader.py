"""Dataset ingestion, canonical attribute annotation, caching and batching."""

import hashlib
import json
import os
from pathlib import Path

import numpy as np
import torch

from sparobust.data import idx as idx_io
from sparobust.data import synthetic
from sparobust.data.specs import AttributeSpec, DatasetHandle, SplitData
from sparobust.seeding import make_generator

SUPPORTED_DATASETS = ("mnist", "fashionmnist", "celeba", "synthetic", "synthetic-faces")

_MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


class DataError(RuntimeError):
    pass


def load_dataset(name, root, specs, seed, use_cache=True, **options) -> DatasetHandle:
    """Load a dataset and annotate it for the given attribute specs.

    Images come out as float32 in [0, 1]. Geometric attributes are annotated
    with their canonical (identity-transform) value; object-level attributes
    are read from dataset annotations and mapped onto the spec range. Splits
    and any subset membership are deterministic in `seed` and recorded in the
    cache manifest at `<root>/<name>/manifest.json`.
    """
    if name not in SUPPORTED_DATASETS:
        raise DataError(f"unknown dataset {name!r}; supported: {SUPPORTED_DATASETS}")
    specs = list(specs)
    _check_spec_compat(name, specs)
    root = Path(root)
    fingerprint = _fingerprint(name, specs, seed, options)

    cache_dir = root / name
    manifest_path = cache_dir / "manifest.json"
    if use_cache and manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        if manifest.get("fingerprint") == fingerprint:
            return _load_cached(name, cache_dir, manifest, specs, seed)

    handle, membership = _build(name, root, specs, seed, options)
    handle.validate()
    if use_cache:
        _write_cache(cache_dir, handle, fingerprint, membership, options)
    return handle


def _check_spec_compat(name, specs):
    has_object_annotations = name in ("celeba", "synthetic-faces")
    for spec in specs:
        if not isinstance(spec, AttributeSpec):
            raise DataError(f"expected AttributeSpec, got {type(spec)}")
        if spec.kind == "object-level" and not has_object_annotations:
            raise DataError(
                f"dataset {name!r} has no object-level annotations for {spec.name!r}"
            )


def _fingerprint(name, specs, seed, options):
    payload = {
        "name": name,
        "seed": seed,
        "specs": [[s.name, s.kind, list(s.range)] for s in specs],
        "options": {k: options[k] for k in sorted(options)},
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _build(name, root, specs, seed, options):
    if name in ("mnist", "fashionmnist"):
        return _build_mnist_like(name, root, specs, seed, options)
    if name == "synthetic":
        return _build_synthetic(specs, seed, options)
    if name == "synthetic-faces":
        return _build_faces(specs, seed, options)
    if name == "celeba":
        from sparobust.data.celeba import build_celeba

        return build_celeba(root, specs, seed, options)
    raise DataError(name)


def _canonical_attributes(n, specs):
    if not specs:
        return torch.zeros(n, 0)
    vals = torch.tensor([s.canonical for s in specs], dtype=torch.float32)
    return vals.expand(n, len(specs)).clone()


def _build_mnist_like(name, root, specs, seed, options):
    raw = Path(root) / name / "raw"
    arrays = {}
    for key, fname in _MNIST_FILES.items():
        path = raw / fname
        if not path.exists() and (raw / (fname + ".gz")).exists():
            path = raw / (fname + ".gz")
        if not path.exists():
            raise DataError(
                f"{name}: missing archive {fname}[.gz] under {raw} "
                "(place the standard IDX files there; this environment "
                "cannot download them)"
            )
        arrays[key] = idx_io.read_idx(path)

    train_x, train_y = arrays["train_images"], arrays["train_labels"]
    test_x, test_y = arrays["test_images"], arrays["test_labels"]
    if train_x.shape[0] != train_y.shape[0] or test_x.shape[0] != test_y.shape[0]:
        raise DataError(f"{name}: image/label count mismatch (corrupt archives?)")

    val_size = int(options.get("val_size", 5000))
    perm = torch.randperm(train_x.shape[0], generator=make_generator(seed)).numpy()
    val_idx, tr_idx = np.sort(perm[:val_size]), np.sort(perm[val_size:])

    def pack(images, labels):
        t = torch.from_numpy(np.ascontiguousarray(images)).float().unsqueeze(1) / 255.0
        lab = torch.from_numpy(np.ascontiguousarray(labels)).long()
        return SplitData(t, lab, _canonical_attributes(len(lab), specs))

    handle = DatasetHandle(
        name=name,
        splits={
            "train": pack(train_x[tr_idx], train_y[tr_idx]),
            "val": pack(train_x[val_idx], train_y[val_idx]),
            "test": pack(test_x, test_y),
        },
        num_classes=10,
        attribute_specs=specs,
        seed=seed,
    )
    membership = {
        "train": tr_idx.tolist(),
        "val": val_idx.tolist(),
        "test": list(range(test_x.shape[0])),
    }
    return handle, membership


def _build_synthetic(specs, seed, options):
    sizes = {
        "train": int(options.get("train_size", 6000)),
        "val": int(options.get("val_size", 1000)),
        "test": int(options.get("test_size", 2000)),
    }
    splits = {}
    for i, (split, n) in enumerate(sizes.items()):
        images, labels = synthetic.render_glyphs(n, seed=seed * 1000003 + i)
        splits[split] = SplitData(
            torch.from_numpy(images),
            torch.from_numpy(labels),
            _canonical_attributes(n, specs),
        )
    handle = DatasetHandle(
        name="synthetic",
        splits=splits,
        num_classes=synthetic.GLYPH_CLASSES,
        attribute_specs=specs,
        seed=seed,
    )
    return handle, {k: v for k, v in sizes.items()}


def _build_faces(specs, seed, options):
    sizes = {
        "train": int(options.get("train_size", 3000)),
        "val": int(options.get("val_size", 500)),
        "test": int(options.get("test_size", 1000)),
    }
    splits = {}
    for i, (split, n) in enumerate(sizes.items()):
        images, labels, smiles = synthetic.render_faces(n, seed=seed * 7777 + i)
        attrs = []
        for spec in specs:
            if spec.kind == "object-level":
                # binary annotation mapped to the spec's range endpoints
                col = np.where(smiles > 0, spec.hi, spec.lo).astype(np.float32)
            else:
                col = np.full(n, spec.canonical, dtype=np.float32)
            attrs.append(torch.from_numpy(col))
        at = torch.stack(attrs, dim=1) if attrs else torch.zeros(n, 0)
        splits[split] = SplitData(torch.from_numpy(images), torch.from_numpy(labels), at)
    handle = DatasetHandle(
        name="synthetic-faces",
        splits=splits,
        num_classes=synthetic.FACE_CLASSES,
        attribute_specs=specs,
        seed=seed,
    )
    return handle, {k: v for k, v in sizes.items()}


def _write_cache(cache_dir, handle, fingerprint, membership, options):
    os.makedirs(cache_dir, exist_ok=True)
    for split, data in handle.splits.items():
        torch.save(
            {"images": data.images, "labels": data.labels, "attributes": data.attributes},
            cache_dir / f"{split}.pt",
        )
    manifest = {
        "dataset": handle.name,
        "seed": handle.seed,
        "fingerprint": fingerprint,
        "num_classes": handle.num_classes,
        "specs": [[s.name, s.kind, list(s.range)] for s in handle.attribute_specs],
        "options": {k: options[k] for k in sorted(options)},
        "membership": membership,
    }
    (cache_dir / "manifest.json").write_text(json.dumps(manifest))


def _load_cached(name, cache_dir, manifest, specs, seed):
    splits = {}
    for split in ("train", "val", "test"):
        blob = torch.load(cache_dir / f"{split}.pt", map_location="cpu", weights_only=True)
        splits[split] = SplitData(blob["images"], blob["labels"], blob["attributes"])
    return DatasetHandle(
        name=name,
        splits=splits,
        num_classes=manifest["num_classes"],
        attribute_specs=specs,
        seed=seed,
    ).validate()


def iter_batches(split: SplitData, batch_size, seed, shuffle=True):
    """One pass over a split in a seed-deterministic order.

    Single-consumer; training loops derive a fresh seed per epoch.
    """
    n = len(split)
    order = (
        torch.randperm(n, generator=make_generator(seed))
        if shuffle
        else torch.arange(n)
    )
    for start in range(0, n, batch_size):
        sel = order[start : start + batch_size]
        yield split.images[sel], split.labels[sel], split.attributes[sel]


def synthesize_attribute_batch(images, spec, generator):
    """Warp a batch by uniformly sampled values of one geometric attribute.

    Returns (warped images, sampled values); the values are exact regression
    targets for attribute-predictor training.
    """
    if not spec.is_geometric:
        raise DataError(
            f"attribute {spec.name!r} is object-level; no generative ground truth"
        )
    # local import: the manipulator package imports loader utilities at top level
    from sparobust.manipulator.affine import warp_attributes

    n = images.shape[0]
    values = spec.lo + (spec.hi - spec.lo) * torch.rand(n, generator=generator)
    warped = warp_attributes(images, [spec], values.unsqueeze(1))
    return warped, values
