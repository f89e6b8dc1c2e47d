"""Checkpoint persistence: JSON metadata plus raw float64 array files.

A checkpoint is a directory with ``meta.json`` and one little-endian
64-bit-float row-major array file per embedding table. Writes are atomic
(temp directory + rename) and round-trips are byte-exact.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from xkgat.errors import DataError
from xkgat.model import Parameters

META_FILE = "meta.json"
ENTITY_FILE = "entities.f64"
RELATION_FILE = "relations.f64"


@dataclass
class Checkpoint:
    params: Parameters
    meta: dict[str, Any] = field(default_factory=dict)


def save_checkpoint(path: str, params: Parameters, meta: dict[str, Any] | None = None) -> None:
    meta = dict(meta or {})
    meta.update(
        {
            "d": params.d,
            "n_entities": params.entities.shape[0],
            "n_relations_canonical": params.relations.shape[0],
        }
    )
    parent = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".ckpt-", dir=parent)
    try:
        with open(os.path.join(tmp, META_FILE), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        params.entities.astype("<f8").tofile(os.path.join(tmp, ENTITY_FILE))
        params.relations.astype("<f8").tofile(os.path.join(tmp, RELATION_FILE))
        if os.path.exists(path):
            shutil.rmtree(path)
        os.replace(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def load_checkpoint(path: str, expect_d: int | None = None) -> Checkpoint:
    meta_path = os.path.join(path, META_FILE)
    if not os.path.isfile(meta_path):
        raise DataError(f"not a checkpoint directory: {path}")
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    d = int(meta["d"])
    if expect_d is not None and d != expect_d:
        raise DataError(f"checkpoint dimension {d} does not match requested {expect_d}")
    n_ent = int(meta["n_entities"])
    n_rel = int(meta["n_relations_canonical"])
    entities = np.fromfile(os.path.join(path, ENTITY_FILE), dtype="<f8").reshape(n_ent, d)
    relations = np.fromfile(os.path.join(path, RELATION_FILE), dtype="<f8").reshape(n_rel, d)
    return Checkpoint(params=Parameters(entities, relations), meta=meta)
