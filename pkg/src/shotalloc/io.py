"""Grid JSON files and atomic writes."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .court import DEPTH, WIDTH

SURFACE_KINDS = {"fgp_mean", "fgp_draws", "fga_per36", "rank_fgp_map", "rank_fga",
                 "rank_corr", "lpl36", "lpl_per_shot", "rank_fgp_q20",
                 "rank_fgp_q50", "rank_fgp_q80"}


def _clean(v):
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=1)


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write(path, dumps(obj) + "\n")


def _valid_kind(kind: str) -> bool:
    return kind in SURFACE_KINDS or kind.startswith(("plc36_player", "plc_per_shot_player"))


def surface_record(kind: str, values, player_id=None, lineup=None) -> dict:
    if not _valid_kind(kind):
        raise ValueError(f"unknown surface kind {kind!r}")
    arr = np.asarray(values)
    if arr.shape[-1] != WIDTH * DEPTH:
        raise ValueError(f"surface needs {WIDTH * DEPTH} values per row, got {arr.shape}")
    return {"player_id": player_id, "lineup": list(lineup) if lineup else None,
            "kind": kind, "width": WIDTH, "depth": DEPTH, "values": arr}


def write_surface(path, kind, values, player_id=None, lineup=None) -> None:
    write_json(path, surface_record(kind, values, player_id, lineup))


def read_surface(path) -> dict:
    """Load and validate a grid JSON file; ``values`` comes back as an array."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    for key in ("kind", "width", "depth", "values"):
        if key not in d:
            raise ValueError(f"{path}: missing {key!r}")
    vals = np.asarray(d["values"], dtype=float)
    n = int(d["width"]) * int(d["depth"])
    if vals.ndim not in (1, 2) or vals.shape[-1] != n:
        raise ValueError(f"{path}: expected {n} values per surface, got shape {vals.shape}")
    d["values"] = vals
    return d


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if len(d.get("players", [])) != 5:
        raise ValueError(f"{path}: manifest must list five players")
    return d
