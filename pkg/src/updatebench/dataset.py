"""Train/valid/test splitting under time-wise and time-ignore policies."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .corpusio import read_triplets, write_triplets
from .errors import DegenerateSplit
from .mining import MethodPairTriplet

TIME_WISE = "TimeWise"
TIME_IGNORE = "TimeIgnore"

DEFAULT_BOUNDARY = datetime(2020, 1, 1, tzinfo=timezone.utc)


@dataclass
class DatasetSplit:
    train: list[MethodPairTriplet]
    valid: list[MethodPairTriplet]
    test: list[MethodPairTriplet]
    policy: str
    boundary: datetime | None = None
    seed: int | None = None

    @property
    def num_train(self) -> int:
        return len(self.train)


def split_timewise(
    triplets: Sequence[MethodPairTriplet],
    boundary: datetime = DEFAULT_BOUNDARY,
    train_fraction: float = 0.8,
    seed: int = 0,
) -> DatasetSplit:
    """Chronological split: everything at or after the boundary is test;
    the pre-boundary pool is shuffled with the seed and divided
    train_fraction / (1 - train_fraction) into train and valid."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    pre = [t for t in triplets if t.commit_time < boundary]
    post = [t for t in triplets if t.commit_time >= boundary]
    if not pre:
        raise DegenerateSplit(f"no triplets before boundary {boundary.isoformat()}")
    if not post:
        raise DegenerateSplit(f"no triplets at or after boundary {boundary.isoformat()}")
    rng = random.Random(seed)
    pool = list(pre)
    rng.shuffle(pool)
    n_train = int(len(pool) * train_fraction)
    return DatasetSplit(
        train=pool[:n_train],
        valid=pool[n_train:],
        test=post,
        policy=TIME_WISE,
        boundary=boundary,
        seed=seed,
    )


def split_random(
    triplets: Sequence[MethodPairTriplet],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> DatasetSplit:
    """Seeded shuffle then contiguous partition, sized by largest-remainder
    rounding so the three parts always sum to the input size."""
    if len(triplets) < 3:
        raise DegenerateSplit("need at least 3 triplets to split")
    if any(f <= 0 for f in fractions):
        raise ValueError("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    rng = random.Random(seed)
    pool = list(triplets)
    rng.shuffle(pool)
    n = len(pool)
    raw = [f * n for f in fractions]
    sizes = [int(r) for r in raw]
    remainders = sorted(range(3), key=lambda i: (raw[i] - sizes[i], -i), reverse=True)
    for i in range(n - sum(sizes)):
        sizes[remainders[i % 3]] += 1
    train = pool[: sizes[0]]
    valid = pool[sizes[0] : sizes[0] + sizes[1]]
    test = pool[sizes[0] + sizes[1] :]
    return DatasetSplit(train=train, valid=valid, test=test, policy=TIME_IGNORE, seed=seed)


def save_split(split: DatasetSplit, out_dir: str | Path) -> Path:
    """Write train/valid/test JSONL (with example ids) plus a manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for part in ("train", "valid", "test"):
        path = out_dir / f"{part}.jsonl"
        write_triplets(path, getattr(split, part), with_ids=True)
        paths[part] = path.name
    manifest = {
        "policy": split.policy,
        "boundary": split.boundary.isoformat() if split.boundary else None,
        "seed": split.seed,
        "files": paths,
    }
    manifest_path = out_dir / "split_manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest_path


def load_split(manifest_path: str | Path) -> DatasetSplit:
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    parts = {
        part: read_triplets(manifest_path.parent / name)
        for part, name in manifest["files"].items()
    }
    boundary = manifest["boundary"]
    return DatasetSplit(
        train=parts["train"],
        valid=parts["valid"],
        test=parts["test"],
        policy=manifest["policy"],
        boundary=datetime.fromisoformat(boundary) if boundary else None,
        seed=manifest["seed"],
    )
