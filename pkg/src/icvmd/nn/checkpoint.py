"""Single-file .npz checkpoints with an embedded JSON manifest.

The manifest records the format version and every architecture hyperparameter
needed to rebuild the parameter containers; the arrays are stored float64
under their traversal paths.  Loading validates every shape and refuses
mismatches, with one sanctioned exception: the final affine head may be
re-initialized for a different class count via ``resize_head_to``.
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import ParameterError
from .layers import init_dense
from .model import ModelConfig, NetParams, init_params, iter_arrays, set_array

FORMAT_VERSION = 1


def save_checkpoint(path, params: NetParams) -> Path:
    path = Path(path)
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": asdict(params.config),
        "n_classes": params.n_classes,
        "n_out": params.n_out,
    }
    arrays = {p: a.astype(np.float64) for p, a in iter_arrays(params)}
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, manifest=np.frombuffer(json.dumps(manifest).encode(), dtype=np.uint8), **arrays)
    return path


def load_checkpoint(path, resize_head_to: int | None = None, head_seed: int = 0) -> NetParams:
    """Rebuild NetParams from a checkpoint.

    Any stored array whose shape disagrees with the manifest architecture is a
    hard error.  ``resize_head_to`` replaces the final affine head with a
    freshly seeded one of the requested output size instead of loading it.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such checkpoint: {path}")
    with np.load(path) as z:
        files = dict(z.items())
    if "manifest" not in files:
        raise ParameterError(f"{path} is not a model checkpoint (missing manifest)")
    manifest = json.loads(bytes(files.pop("manifest").tobytes()).decode())
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ParameterError(
            f"unsupported checkpoint format_version {manifest.get('format_version')!r}"
        )
    config = ModelConfig(**manifest["config"])
    params = init_params(config, manifest["n_classes"], seed=0, n_out=manifest["n_out"])

    expected = {p for p, _ in iter_arrays(params)}
    head_keys = {"classifier2.weights", "classifier2.bias"}
    stored = set(files)
    if stored != expected:
        missing = expected - stored
        extra = stored - expected
        raise ParameterError(f"checkpoint key mismatch: missing {sorted(missing)}, extra {sorted(extra)}")

    for p in sorted(expected - (head_keys if resize_head_to is not None else set())):
        set_array(params, p, files[p])  # set_array rejects shape mismatches
    if resize_head_to is not None:
        rng = np.random.default_rng(head_seed)
        params.classifier2 = init_dense(rng, resize_head_to, params.n_classes)
    return params
