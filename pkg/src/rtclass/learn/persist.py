"""Model files: canonical JSON plus a ``.sha256`` digest sidecar."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .forest import ForestConfig, ForestModel, Tree
from .mlp import MlpConfig, MlpModel, MlpParams
from .scaling import ColumnScaler
from .svm import SvmConfig, SvmModel

FORMAT_VERSION = 1


class IntegrityError(ValueError):
    pass


def _arr(a) -> list:
    return np.asarray(a).tolist()


def model_to_dict(model) -> dict:
    if isinstance(model, ForestModel):
        return {
            "kind": "forest", "version": FORMAT_VERSION,
            "n_features": model.n_features, "n_classes": model.n_classes,
            "config": dataclasses.asdict(model.config), "seed": model.seed,
            "trees": [{"feature": _arr(t.feature), "threshold": _arr(t.threshold),
                       "left": _arr(t.left), "right": _arr(t.right),
                       "counts": _arr(t.counts), "gain": _arr(t.gain)} for t in model.trees],
        }
    if isinstance(model, MlpModel):
        p = model.params
        return {
            "kind": "mlp", "version": FORMAT_VERSION,
            "config": dataclasses.asdict(model.config), "seed": model.seed,
            "scaler": {"offset": _arr(model.scaler.offset), "scale": _arr(model.scaler.scale)},
            "W1": _arr(p.W1), "b1": _arr(p.b1), "W2": _arr(p.W2), "b2": _arr(p.b2),
        }
    if isinstance(model, SvmModel):
        return {
            "kind": "svm", "version": FORMAT_VERSION,
            "config": dataclasses.asdict(model.config), "seed": model.seed,
            "scaler": {"offset": _arr(model.scaler.offset), "scale": _arr(model.scaler.scale)},
            "weights": _arr(model.weights), "bias": _arr(model.bias),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "forest":
        trees = tuple(Tree(
            feature=np.array(t["feature"], dtype=np.int64),
            threshold=np.array(t["threshold"], dtype=np.float64),
            left=np.array(t["left"], dtype=np.int64),
            right=np.array(t["right"], dtype=np.int64),
            counts=np.array(t["counts"], dtype=np.int64).reshape(len(t["feature"]), d["n_classes"]),
            gain=np.array(t["gain"], dtype=np.float64)) for t in d["trees"])
        return ForestModel(trees, d["n_features"], d["n_classes"],
                           ForestConfig(**d["config"]), d["seed"])
    scaler = None
    if "scaler" in d:
        scaler = ColumnScaler(np.array(d["scaler"]["offset"], dtype=np.float64),
                              np.array(d["scaler"]["scale"], dtype=np.float64))
    if kind == "mlp":
        params = MlpParams(*(np.array(d[k], dtype=np.float64) for k in ("W1", "b1", "W2", "b2")))
        return MlpModel(params, scaler, MlpConfig(**d["config"]), d["seed"])
    if kind == "svm":
        return SvmModel(np.array(d["weights"], dtype=np.float64),
                        np.array(d["bias"], dtype=np.float64), scaler,
                        SvmConfig(**d["config"]), d["seed"])
    raise ValueError(f"unknown model kind {kind!r}")


def model_bytes(model) -> bytes:
    return json.dumps(model_to_dict(model), separators=(",", ":"), allow_nan=False).encode()


def model_digest(model) -> str:
    return hashlib.sha256(model_bytes(model)).hexdigest()


def digest_path(path: str | os.PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".sha256")


def save_model(model, path: str | os.PathLike) -> str:
    data = model_bytes(model)
    digest = hashlib.sha256(data).hexdigest()
    Path(path).write_bytes(data)
    digest_path(path).write_text(digest + "\n")
    return digest


def load_model(path: str | os.PathLike, verify: bool = True):
    data = Path(path).read_bytes()
    if verify:
        side = digest_path(path)
        if not side.exists():
            raise IntegrityError(f"{path}: digest sidecar {side.name} missing")
        expected = side.read_text().strip()
        actual = hashlib.sha256(data).hexdigest()
        if actual != expected:
            raise IntegrityError(f"{path}: digest mismatch (file {actual[:12]}…, sidecar {expected[:12]}…)")
    return model_from_dict(json.loads(data))
