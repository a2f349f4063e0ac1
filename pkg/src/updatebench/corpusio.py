"""JSON Lines schemas shared by the pipeline stages.

All writers are byte-stable: sorted keys, compact separators, one record
per line, trailing newline. Example ids are content hashes so any two
processes derive the same alignment keys from the same data.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from .mining import MethodPairTriplet


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def example_id(triplet: MethodPairTriplet) -> str:
    payload = canonical_json(
        [triplet.repo_id, triplet.commit_hash, triplet.file_path,
         list(triplet.prior), list(triplet.updated)]
    )
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:16]


def triplet_to_dict(triplet: MethodPairTriplet, with_id: bool = False) -> dict:
    d = {
        "repo_id": triplet.repo_id,
        "commit_hash": triplet.commit_hash,
        "commit_time": triplet.commit_time.isoformat(),
        "message": triplet.message,
        "file_path": triplet.file_path,
        "prior": list(triplet.prior),
        "updated": list(triplet.updated),
    }
    if with_id:
        d["example_id"] = example_id(triplet)
    return d


def triplet_from_dict(d: dict) -> MethodPairTriplet:
    return MethodPairTriplet(
        repo_id=d["repo_id"],
        commit_hash=d["commit_hash"],
        commit_time=datetime.fromisoformat(d["commit_time"]),
        message=d["message"],
        prior=tuple(d["prior"]),
        updated=tuple(d["updated"]),
        file_path=d["file_path"],
    )


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(canonical_json(rec))
            fh.write("\n")


def read_jsonl(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_triplets(path: str | Path, triplets: Sequence[MethodPairTriplet], with_ids: bool = False) -> None:
    write_jsonl(path, (triplet_to_dict(t, with_id=with_ids) for t in triplets))


def read_triplets(path: str | Path) -> list[MethodPairTriplet]:
    return [triplet_from_dict(d) for d in read_jsonl(path)]


def write_candidates(path: str | Path, rows: Sequence[tuple[str, list[list[str]]]]) -> None:
    write_jsonl(path, ({"example_id": eid, "candidates": cands} for eid, cands in rows))


def read_candidates(path: str | Path) -> dict[str, list[list[str]]]:
    out: dict[str, list[list[str]]] = {}
    for d in read_jsonl(path):
        out[d["example_id"]] = [list(c) for c in d["candidates"]]
    return out
