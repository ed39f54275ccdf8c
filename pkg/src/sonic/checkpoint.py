"""Model persistence: a JSON manifest plus one tensor file per parameter."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .estimators import BackboneClassifier, SonicClassifier
from .models import BackboneKind, ResidualBlock, SingleNetwork, SonicNetwork
from .nn import Conv2D, Dense, Dropout, GlobalAveragePool, ReLU, Softmax
from .tensorfile import read_tensor, write_tensor

__all__ = ["save_classifier", "load_classifier"]

FORMAT = "sonic-checkpoint-v1"


def _describe_layer(layer) -> dict:
    if isinstance(layer, Conv2D):
        return {
            "type": "conv2d",
            "in_channels": layer.in_channels,
            "out_channels": layer.out_channels,
            "kernel": layer.kernel,
            "stride": layer.stride,
            "padding": layer.padding,
        }
    if isinstance(layer, ResidualBlock):
        return {
            "type": "residual_block",
            "in_channels": layer.conv1.in_channels,
            "out_channels": layer.conv1.out_channels,
            "stride": layer.conv1.stride,
            "projected_skip": layer.project is not None,
        }
    if isinstance(layer, Dense):
        return {"type": "dense", "in_features": layer.in_features,
                "out_features": layer.out_features}
    if isinstance(layer, ReLU):
        return {"type": "relu"}
    if isinstance(layer, Dropout):
        return {"type": "dropout", "rate": layer.rate}
    if isinstance(layer, GlobalAveragePool):
        return {"type": "global_average_pool"}
    if isinstance(layer, Softmax):
        return {"type": "softmax"}
    raise TypeError(f"cannot describe layer {type(layer).__name__}")


def _branch_layers(branch) -> list[dict]:
    specs = [_describe_layer(layer) for layer in branch.backbone.layers]
    specs.append(_describe_layer(branch.pool))
    specs.append(_describe_layer(branch.hidden))
    specs.append(_describe_layer(branch.act))
    specs.append(_describe_layer(branch.drop))
    specs.append(_describe_layer(branch.logits))
    return specs


def _network_layers(net) -> dict:
    if isinstance(net, SonicNetwork):
        return {
            "branch_a": _branch_layers(net.branch_a),
            "branch_b": _branch_layers(net.branch_b),
            "fusion": [
                {"type": "concatenate_logits"},
                _describe_layer(net.fusion_hidden),
                _describe_layer(net.fusion_act),
                _describe_layer(net.fusion_out),
                _describe_layer(net.softmax),
            ],
        }
    return {
        "branch": _branch_layers(net.branch),
        "head": [_describe_layer(net.softmax)],
    }


def save_classifier(estimator, directory: str | Path) -> None:
    """Persist a fitted classifier: manifest.json plus params/<name>.spt."""
    if not hasattr(estimator, "network_"):
        raise ValueError("estimator must be fitted before saving")
    net = estimator.network_
    directory = Path(directory)
    params_dir = directory / "params"
    params_dir.mkdir(parents=True, exist_ok=True)

    named = net.named_parameters()
    manifest = {
        "format": FORMAT,
        "model": "sonic" if isinstance(net, SonicNetwork) else "single",
        "n_classes": net.n_classes,
        "classes": [int(c) for c in estimator.classes_],
        "dropout": net.dropout,
        "dtype": net.dtype.name,
        "seed": net.seed,
        "layers": _network_layers(net),
        "parameters": [
            {"name": name, "shape": list(p.value.shape)} for name, p in named
        ],
    }
    if isinstance(net, SonicNetwork):
        manifest["backbones"] = [kind.value for kind in net.backbones]
    else:
        manifest["backbone"] = net.backbone_kind.value

    with open(directory / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, p in named:
        write_tensor(params_dir / f"{name}.spt", p.value)


def load_classifier(directory: str | Path):
    """Rebuild a fitted classifier from :func:`save_classifier` output."""
    directory = Path(directory)
    with open(directory / "manifest.json", encoding="ascii") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != FORMAT:
        raise ValueError(f"{directory}: unknown checkpoint format")

    n_classes = manifest["n_classes"]
    dtype = np.dtype(manifest["dtype"])
    dropout = manifest["dropout"]
    seed = manifest["seed"]
    if manifest["model"] == "sonic":
        kinds = tuple(BackboneKind(b) for b in manifest["backbones"])
        net = SonicNetwork(n_classes, backbones=kinds, seed=seed,
                           dtype=dtype, dropout=dropout)
        estimator = SonicClassifier(
            backbones=tuple(k.value for k in kinds), dropout=dropout,
            random_state=seed, dtype=dtype.name,
        )
    else:
        kind = BackboneKind(manifest["backbone"])
        net = SingleNetwork(n_classes, backbone=kind, seed=seed,
                            dtype=dtype, dropout=dropout)
        estimator = BackboneClassifier(
            backbone=kind.value, dropout=dropout,
            random_state=seed, dtype=dtype.name,
        )

    expected = {entry["name"]: tuple(entry["shape"]) for entry in manifest["parameters"]}
    named = dict(net.named_parameters())
    if set(named) != set(expected):
        raise ValueError(f"{directory}: parameter names do not match the architecture")
    for name, param in named.items():
        value = read_tensor(directory / "params" / f"{name}.spt")
        if value.shape != expected[name] or value.shape != param.value.shape:
            raise ValueError(
                f"{directory}: parameter {name} has shape {value.shape}, "
                f"expected {param.value.shape}"
            )
        param.value = value.astype(dtype, copy=False)

    estimator.network_ = net
    estimator.classes_ = np.array(manifest["classes"])
    estimator.loss_trace_ = []
    return estimator
