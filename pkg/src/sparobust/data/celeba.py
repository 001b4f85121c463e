"""Ingestion of a CelebA-style image directory with a binary attribute list.

Expected layout under `<root>/celeba/`:

    img_align_celeba/<name>.jpg ...
    list_attr_celeba.txt   # count line, header line, then "<name> -1 1 ..."

A seed-deterministic subset (default 20000 images) is resized to 32x32 and
split train/val/test. Binary annotations in {-1, +1} are mapped onto each
object-level spec's range endpoints. The classification label is itself one
annotated attribute (default "Male"), mapped to {0, 1}.
"""

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from sparobust.data.specs import DatasetHandle, SplitData
from sparobust.seeding import make_generator


def _read_attr_list(path):
    lines = Path(path).read_text().strip().splitlines()
    if len(lines) < 3:
        raise ValueError(f"{path}: attribute list too short")
    header = lines[1].split()
    rows = {}
    for line in lines[2:]:
        parts = line.split()
        rows[parts[0]] = np.array([int(v) for v in parts[1:]], dtype=np.int8)
    return header, rows


def build_celeba(root, specs, seed, options):
    from sparobust.data.loader import DataError

    base = Path(root) / "celeba"
    img_dir = base / "img_align_celeba"
    attr_path = base / "list_attr_celeba.txt"
    if not img_dir.is_dir() or not attr_path.exists():
        raise DataError(
            f"celeba: expected {img_dir} and {attr_path} "
            "(place the aligned images and attribute list there; this "
            "environment cannot download them)"
        )

    header, rows = _read_attr_list(attr_path)
    label_attr = options.get("label_attribute", "Male")
    if label_attr not in header:
        raise DataError(f"celeba: label attribute {label_attr!r} not in annotations")

    names = sorted(n for n in rows if (img_dir / n).exists())
    if not names:
        raise DataError("celeba: no annotated images found")

    subset_size = min(int(options.get("subset_size", 20000)), len(names))
    image_size = int(options.get("image_size", 32))
    perm = torch.randperm(len(names), generator=make_generator(seed)).numpy()
    chosen = [names[i] for i in perm[:subset_size]]

    fractions = options.get("split_fractions", (0.8, 0.1, 0.1))
    n_train = int(round(subset_size * fractions[0]))
    n_val = int(round(subset_size * fractions[1]))
    membership = {
        "train": chosen[:n_train],
        "val": chosen[n_train : n_train + n_val],
        "test": chosen[n_train + n_val :],
    }

    def attr_columns(name):
        row = rows[name]
        cols = []
        for spec in specs:
            if spec.kind == "object-level":
                try:
                    j = _match_attr(header, spec.name)
                except KeyError:
                    raise DataError(
                        f"celeba: attribute {spec.name!r} not in annotations"
                    ) from None
                cols.append(spec.hi if row[j] > 0 else spec.lo)
            else:
                cols.append(spec.canonical)
        return cols

    label_j = header.index(label_attr)
    splits = {}
    for split, members in membership.items():
        images = np.empty((len(members), 3, image_size, image_size), dtype=np.float32)
        labels = np.empty(len(members), dtype=np.int64)
        attrs = np.empty((len(members), len(specs)), dtype=np.float32)
        for i, name in enumerate(members):
            with Image.open(img_dir / name) as im:
                im = im.convert("RGB").resize((image_size, image_size), Image.BILINEAR)
                images[i] = np.asarray(im, dtype=np.float32).transpose(2, 0, 1) / 255.0
            labels[i] = 1 if rows[name][label_j] > 0 else 0
            attrs[i] = attr_columns(name)
        splits[split] = SplitData(
            torch.from_numpy(images),
            torch.from_numpy(labels),
            torch.from_numpy(attrs),
        )

    handle = DatasetHandle(
        name="celeba", splits=splits, num_classes=2, attribute_specs=specs, seed=seed
    )
    return handle, membership


def _match_attr(header, name):
    """Case/punctuation-insensitive match of a spec name to a header column."""
    canon = lambda s: s.replace("_", "").replace("-", "").lower()
    for j, h in enumerate(header):
        if canon(h) == canon(name):
            return j
    raise KeyError(name)
